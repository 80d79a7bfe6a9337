#include "certsamp/dist.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace certsamp {

std::string to_bitstring(std::uint64_t value, int num_bits) {
    std::string out(static_cast<size_t>(num_bits), '0');
    for (int i = 0; i < num_bits; i++) {
        if (bit_at(value, num_bits, i)) {
            out[static_cast<size_t>(i)] = '1';
        }
    }
    return out;
}

std::uint64_t parse_bitstring(std::string_view text) {
    if (text.size() > static_cast<size_t>(kMaxBits)) {
        throw std::invalid_argument("bitstring longer than " + std::to_string(kMaxBits) + " bits");
    }
    std::uint64_t value = 0;
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bitstring contains '" + std::string(1, c) + "'");
        }
        value = (value << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return value;
}

namespace {

void require_same_length(const Distribution &p, const Distribution &q) {
    if (p.num_bits() != q.num_bits()) {
        throw std::invalid_argument(
            "distribution length mismatch: " + std::to_string(p.num_bits()) + " vs " + std::to_string(q.num_bits()));
    }
}

// Visits every string in the union of both supports once.
template <typename F>
void for_each_in_union(const Distribution &p, const Distribution &q, F &&f) {
    auto a = p.mass().begin();
    auto b = q.mass().begin();
    while (a != p.mass().end() || b != q.mass().end()) {
        if (b == q.mass().end() || (a != p.mass().end() && a->first < b->first)) {
            f(a->second, 0.0);
            ++a;
        } else if (a == p.mass().end() || b->first < a->first) {
            f(0.0, b->second);
            ++b;
        } else {
            f(a->second, b->second);
            ++a;
            ++b;
        }
    }
}

}  // namespace

Distribution::Distribution(int num_bits, std::map<std::uint64_t, double> mass) : num_bits_(num_bits) {
    if (num_bits < 1 || num_bits > kMaxBits) {
        throw std::invalid_argument("distribution bit length out of range: " + std::to_string(num_bits));
    }
    double total = 0;
    for (const auto &[x, p] : mass) {
        if (num_bits < 64 && (x >> num_bits) != 0) {
            throw std::invalid_argument("distribution key does not fit in " + std::to_string(num_bits) + " bits");
        }
        if (!(p >= 0) || !std::isfinite(p)) {
            throw std::invalid_argument("distribution mass must be finite and non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1) > kNormTolerance) {
        throw std::invalid_argument("distribution mass sums to " + std::to_string(total) + ", expected 1");
    }
    for (const auto &[x, p] : mass) {
        if (p > 0) {
            mass_.emplace(x, p);
        }
    }
}

Distribution Distribution::point(int num_bits, std::uint64_t x) {
    return Distribution(num_bits, {{x, 1.0}});
}

Distribution Distribution::uniform(int num_bits) {
    if (num_bits < 1 || num_bits > 24) {
        throw std::invalid_argument("uniform distribution limited to 1..24 bits");
    }
    std::map<std::uint64_t, double> mass;
    double p = std::ldexp(1.0, -num_bits);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << num_bits); x++) {
        mass.emplace_hint(mass.end(), x, p);
    }
    return Distribution(num_bits, std::move(mass));
}

Distribution Distribution::from_dense(int num_bits, std::span<const double> probs) {
    if (num_bits < 1 || num_bits > 30 || probs.size() != (size_t{1} << num_bits)) {
        throw std::invalid_argument("dense probability vector must have length 2^n");
    }
    std::map<std::uint64_t, double> mass;
    for (size_t x = 0; x < probs.size(); x++) {
        if (probs[x] != 0) {
            mass.emplace_hint(mass.end(), x, probs[x]);
        }
    }
    return Distribution(num_bits, std::move(mass));
}

Distribution Distribution::empirical(int num_bits, std::span<const std::uint64_t> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical distribution of an empty sample");
    }
    std::map<std::uint64_t, double> counts;
    for (auto s : samples) {
        counts[s] += 1;
    }
    for (auto &[x, c] : counts) {
        c /= static_cast<double>(samples.size());
    }
    return Distribution(num_bits, std::move(counts));
}

double Distribution::operator()(std::uint64_t x) const {
    auto it = mass_.find(x);
    return it == mass_.end() ? 0.0 : it->second;
}

std::vector<double> Distribution::dense() const {
    if (num_bits_ > 30) {
        throw std::invalid_argument("dense view limited to 30 bits");
    }
    std::vector<double> out(size_t{1} << num_bits_, 0.0);
    for (const auto &[x, p] : mass_) {
        out[x] = p;
    }
    return out;
}

double bhattacharyya(const Distribution &p, const Distribution &q) {
    require_same_length(p, q);
    double sum = 0;
    for_each_in_union(p, q, [&](double a, double b) { sum += std::sqrt(a * b); });
    return sum;
}

double hellinger(const Distribution &p, const Distribution &q) {
    require_same_length(p, q);
    double sum = 0;
    for_each_in_union(p, q, [&](double a, double b) {
        double d = std::sqrt(a) - std::sqrt(b);
        sum += d * d;
    });
    return std::min(1.0, std::sqrt(sum / 2));
}

double total_variation(const Distribution &p, const Distribution &q) {
    require_same_length(p, q);
    double sum = 0;
    for_each_in_union(p, q, [&](double a, double b) { sum += std::abs(a - b); });
    return std::min(1.0, sum / 2);
}

double swap_accept_from_hellinger(double x) {
    if (!(x >= 0 && x <= 1)) {
        throw std::invalid_argument("Hellinger distance must lie in [0, 1]");
    }
    double overlap = 1 - x * x;
    return 0.5 * (1 + overlap * overlap);
}

double hellinger_from_swap_accept(double y) {
    if (!(y >= 0.5 && y <= 1)) {
        throw std::invalid_argument("SWAP acceptance probability must lie in [1/2, 1]");
    }
    return std::sqrt(std::max(0.0, 1 - std::sqrt(2 * y - 1)));
}

Distribution mix(std::span<const std::pair<double, Distribution>> components) {
    if (components.empty()) {
        throw std::invalid_argument("mix of zero components");
    }
    int n = components.front().second.num_bits();
    double total_weight = 0;
    std::map<std::uint64_t, double> mass;
    for (const auto &[w, d] : components) {
        if (!(w >= 0) || !std::isfinite(w)) {
            throw std::invalid_argument("mixture weights must be non-negative");
        }
        if (d.num_bits() != n) {
            throw std::invalid_argument("mixture components have different lengths");
        }
        total_weight += w;
        for (const auto &[x, p] : d.mass()) {
            mass[x] += w * p;
        }
    }
    if (std::abs(total_weight - 1) > kNormTolerance) {
        throw std::invalid_argument("mixture weights sum to " + std::to_string(total_weight));
    }
    for (auto &[x, p] : mass) {
        p /= total_weight;
    }
    return Distribution(n, std::move(mass));
}

Distribution toward_distance(const Distribution &base, double target) {
    int n = base.num_bits();
    if (n > 24) {
        throw std::invalid_argument("toward_distance limited to 24 bits");
    }
    std::uint64_t far = 0;
    double least = 2;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); x++) {
        double p = base(x);
        if (p < least) {
            least = p;
            far = x;
        }
        if (p == 0) {
            break;
        }
    }
    Distribution corner = Distribution::point(n, far);
    auto blend = [&](double t) {
        std::vector<std::pair<double, Distribution>> parts{{1 - t, base}, {t, corner}};
        return mix(parts);
    };
    double reach = hellinger(base, corner);
    if (target < 0 || target > reach + 1e-12) {
        throw std::invalid_argument(
            "target distance " + std::to_string(target) + " outside [0, " + std::to_string(reach) + "]");
    }
    if (target >= reach) {
        return corner;
    }
    // d_H(base, blend(t)) is continuous and non-decreasing in t.
    double lo = 0, hi = 1;
    for (int it = 0; it < 200 && hi - lo > 1e-16; it++) {
        double mid = 0.5 * (lo + hi);
        if (hellinger(base, blend(mid)) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return blend(0.5 * (lo + hi));
}

void to_json(nlohmann::json &j, const Distribution &d) {
    nlohmann::json mass = nlohmann::json::object();
    for (const auto &[x, p] : d.mass()) {
        mass[to_bitstring(x, d.num_bits())] = p;
    }
    j = nlohmann::json{{"n", d.num_bits()}, {"mass", mass}};
}

Distribution distribution_from_json(const nlohmann::json &j) {
    int n = j.at("n").get<int>();
    std::map<std::uint64_t, double> mass;
    for (const auto &[key, value] : j.at("mass").items()) {
        if (static_cast<int>(key.size()) != n) {
            throw std::invalid_argument("distribution key '" + key + "' does not have length " + std::to_string(n));
        }
        mass[parse_bitstring(key)] += value.get<double>();
    }
    return Distribution(n, std::move(mass));
}

void from_json(const nlohmann::json &j, Distribution &d) {
    d = distribution_from_json(j);
}

}  // namespace certsamp
