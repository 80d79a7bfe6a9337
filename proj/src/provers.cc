#include "certsamp/provers.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace certsamp {

namespace {

StatePtr share(const StateVector &s) {
    return std::make_shared<const StateVector>(s);
}

MixtureStrategy weighted(const std::vector<std::pair<double, StateVector>> &components, bool iid) {
    std::vector<double> w;
    std::vector<StatePtr> s;
    for (const auto &[q, psi] : components) {
        w.push_back(q);
        s.push_back(share(psi));
    }
    return MixtureStrategy(std::move(w), std::move(s), iid);
}

}  // namespace

MixtureStrategy::MixtureStrategy(std::vector<double> weights, std::vector<StatePtr> states, bool iid)
    : weights_(std::move(weights)), states_(std::move(states)), iid_(iid) {
    if (states_.empty() || weights_.size() != states_.size()) {
        throw std::invalid_argument("strategy needs one weight per state and at least one state");
    }
    double total = 0;
    for (size_t i = 0; i < states_.size(); i++) {
        if (!(weights_[i] >= 0)) {
            throw std::invalid_argument("strategy weights must be non-negative");
        }
        if (states_[i]->num_qubits() != states_[0]->num_qubits()) {
            throw std::invalid_argument("strategy states must share a qubit count");
        }
        total += weights_[i];
        cdf_.push_back(total);
    }
    if (iid_ && std::abs(total - 1) > kNormTolerance) {
        throw std::invalid_argument("ensemble weights sum to " + std::to_string(total) + ", expected 1");
    }
}

RoundState MixtureStrategy::round_state(std::uint64_t round, RngStream &rng) const {
    if (!iid_) {
        if (round >= states_.size()) {
            throw std::out_of_range(
                "schedule exhausted at round " + std::to_string(round) + " (length " + std::to_string(states_.size()) +
                ")");
        }
        return {states_[round], static_cast<int>(round)};
    }
    if (states_.size() == 1) {
        return {states_[0], 0};
    }
    double u = rng.uniform() * cdf_.back();
    size_t i = 0;
    while (i + 1 < cdf_.size() && cdf_[i] <= u) {
        i++;
    }
    return {states_[i], static_cast<int>(i)};
}

std::string quantum_kind_name(QuantumKind k) {
    switch (k) {
        case QuantumKind::kHonest:
            return "honest";
        case QuantumKind::kFixedState:
            return "fixed_state";
        case QuantumKind::kEnsemble:
            return "ensemble";
        case QuantumKind::kSchedule:
            return "schedule";
    }
    return "unknown";
}

QuantumProver QuantumProver::honest(const Distribution &d) {
    return QuantumProver(QuantumKind::kHonest, MixtureStrategy({1.0}, {share(from_distribution(d))}, true));
}

QuantumProver QuantumProver::honest(const Distribution &d, const StateVector &phase_reference) {
    return QuantumProver(
        QuantumKind::kHonest, MixtureStrategy({1.0}, {share(from_distribution(d, phase_reference))}, true));
}

QuantumProver QuantumProver::fixed_state(const StateVector &psi) {
    return QuantumProver(QuantumKind::kFixedState, MixtureStrategy({1.0}, {share(psi)}, true));
}

QuantumProver QuantumProver::ensemble(const std::vector<std::pair<double, StateVector>> &components) {
    return QuantumProver(QuantumKind::kEnsemble, weighted(components, true));
}

QuantumProver QuantumProver::schedule(const std::vector<StateVector> &states) {
    std::vector<double> w(states.size(), 1.0 / static_cast<double>(std::max<size_t>(1, states.size())));
    // Slots repeating one of the last few distinct states share its pointer so
    // per-state verifier caches stay small for periodic schedules.
    constexpr size_t kRecent = 8;
    std::vector<StatePtr> s;
    std::vector<StatePtr> recent;
    for (const auto &psi : states) {
        StatePtr found;
        for (const auto &r : recent) {
            if (r->num_qubits() == psi.num_qubits() &&
                std::equal(r->amplitudes().begin(), r->amplitudes().end(), psi.amplitudes().begin())) {
                found = r;
                break;
            }
        }
        if (!found) {
            found = share(psi);
            recent.push_back(found);
            if (recent.size() > kRecent) {
                recent.erase(recent.begin());
            }
        }
        s.push_back(found);
    }
    return QuantumProver(QuantumKind::kSchedule, MixtureStrategy(std::move(w), std::move(s), false));
}

Distribution QuantumProver::component_distribution(int i) const {
    return born_distribution(*states().at(static_cast<size_t>(i)));
}

Distribution QuantumProver::implied_distribution() const {
    std::vector<std::pair<double, Distribution>> parts;
    double total = 0;
    for (double w : weights()) {
        total += w;
    }
    for (size_t i = 0; i < states().size(); i++) {
        parts.emplace_back(weights()[i] / total, born_distribution(*states()[i]));
    }
    return mix(parts);
}

std::string history_kind_name(HistoryKind k) {
    switch (k) {
        case HistoryKind::kHonest:
            return "honest_history";
        case HistoryKind::kCorrupted:
            return "corrupted_history";
        case HistoryKind::kEnsemble:
            return "ensemble_history";
    }
    return "unknown";
}

std::string corruption_name(Corruption c) {
    switch (c) {
        case Corruption::kWrongInput:
            return "wrong_input";
        case Corruption::kClockSkew:
            return "clock_skew";
        case Corruption::kInputViolation:
            return "input_violation";
    }
    return "unknown";
}

Corruption corruption_from_name(const std::string &name) {
    for (auto c : {Corruption::kWrongInput, Corruption::kClockSkew, Corruption::kInputViolation}) {
        if (corruption_name(c) == name) {
            return c;
        }
    }
    throw std::invalid_argument("unknown corruption mode '" + name + "'");
}

HistoryProver HistoryProver::honest(const ComparisonCircuit &g, const StateVector &psi) {
    return HistoryProver(
        HistoryKind::kHonest, history_layout(g), MixtureStrategy({1.0}, {share(history_state(g, psi))}, true));
}

HistoryProver HistoryProver::corrupted(
    const ComparisonCircuit &g, const StateVector &psi, double epsilon, Corruption mode) {
    if (!(epsilon >= 0 && epsilon <= 1)) {
        throw std::invalid_argument("corruption strength must lie in [0, 1]");
    }
    HistoryLayout layout = history_layout(g);
    auto slices = computation_slices(g.gates, psi);
    std::vector<double> weights(slices.size(), 1.0);
    switch (mode) {
        case Corruption::kWrongInput:
            break;
        case Corruption::kInputViolation: {
            StateVector flipped = slices[0];
            flipped.apply(Gate::x(g.aux(0)));
            std::vector<Amplitude> amps(slices[0].dim());
            for (std::uint64_t i = 0; i < amps.size(); i++) {
                amps[i] = std::sqrt(1 - epsilon) * slices[0][i] + std::sqrt(epsilon) * flipped[i];
            }
            slices[0] = StateVector::normalized(slices[0].num_qubits(), std::move(amps));
            break;
        }
        case Corruption::kClockSkew:
            for (size_t j = 0; j < weights.size(); j++) {
                weights[j] = j % 2 == 0 ? 1 + epsilon : 1 - epsilon;
            }
            break;
    }
    return HistoryProver(
        HistoryKind::kCorrupted, layout,
        MixtureStrategy({1.0}, {share(assemble_history(layout, slices, weights))}, true));
}

HistoryProver HistoryProver::ensemble(
    const ComparisonCircuit &g, const std::vector<std::pair<double, StateVector>> &components) {
    std::vector<std::pair<double, StateVector>> histories;
    for (const auto &[q, psi] : components) {
        histories.emplace_back(q, history_state(g, psi));
    }
    return HistoryProver(HistoryKind::kEnsemble, history_layout(g), weighted(histories, true));
}

std::pair<std::vector<double>, double> conditioned_adv_weights(const StateVector &state, const HistoryLayout &layout) {
    if (state.num_qubits() != layout.num_qubits()) {
        throw std::invalid_argument("state does not match the history layout");
    }
    // clock = 0, out = 0 and aux = 0 leave only the adv bits, which sit just
    // above the n aux bits.
    std::vector<double> w(std::uint64_t{1} << layout.n);
    double total = 0;
    for (std::uint64_t a = 0; a < w.size(); a++) {
        w[a] = std::norm(state[a << layout.n]);
        total += w[a];
    }
    return {w, total};
}

Distribution HistoryProver::implied_distribution() const {
    std::vector<double> acc(std::uint64_t{1} << layout_.n, 0.0);
    double total = 0;
    for (size_t i = 0; i < states().size(); i++) {
        auto [w, p] = conditioned_adv_weights(*states()[i], layout_);
        for (size_t a = 0; a < w.size(); a++) {
            acc[a] += weights()[i] * w[a];
        }
        total += weights()[i] * p;
    }
    if (!(total > 1e-15)) {
        throw std::invalid_argument("the sampling condition has zero probability under this strategy");
    }
    for (auto &v : acc) {
        v /= total;
    }
    return Distribution::from_dense(layout_.n, acc);
}

std::string classical_kind_name(ClassicalKind k) {
    switch (k) {
        case ClassicalKind::kHonest:
            return "honest_classical";
        case ClassicalKind::kDishonestPreimage:
            return "dishonest_preimage";
        case ClassicalKind::kBiasedSampler:
            return "biased_sampler";
    }
    return "unknown";
}

StateVector hadamard_all(const StateVector &state) {
    std::vector<Amplitude> a(state.amplitudes().begin(), state.amplitudes().end());
    const double scale = 1 / std::sqrt(2.0);
    for (size_t len = 1; len < a.size(); len <<= 1) {
        for (size_t i = 0; i < a.size(); i += 2 * len) {
            for (size_t j = i; j < i + len; j++) {
                Amplitude u = a[j], v = a[j + len];
                a[j] = scale * (u + v);
                a[j + len] = scale * (u - v);
            }
        }
    }
    return StateVector::normalized(state.num_qubits(), std::move(a));
}

std::uint64_t sample_coset(int m, std::uint64_t claw, int o, RngStream &rng) {
    std::uint64_t d = rng.below(std::uint64_t{1} << (m + 1));
    if (parity(d & claw) != o) {
        d ^= std::uint64_t{1} << m;
    }
    return d;
}

ClassicalProver::ClassicalProver(ClassicalKind kind, const StateVector &logical, double error_rate)
    : kind_(kind), logical_(share(logical)), error_rate_(error_rate) {
    if (!(error_rate >= 0 && error_rate <= 1)) {
        throw std::invalid_argument("error rate must lie in [0, 1]");
    }
    auto probs = [](const StateVector &s) {
        std::vector<double> p(s.dim());
        for (std::uint64_t i = 0; i < p.size(); i++) {
            p[i] = std::norm(s[i]);
        }
        return p;
    };
    z_sampler_ = std::make_shared<const CdfSampler>(probs(*logical_));
    x_sampler_ = std::make_shared<const CdfSampler>(probs(hadamard_all(*logical_)));
}

ClassicalProver ClassicalProver::honest(const StateVector &logical) {
    return ClassicalProver(ClassicalKind::kHonest, logical, 0.0);
}

ClassicalProver ClassicalProver::dishonest_preimage(const StateVector &logical, double error_rate) {
    return ClassicalProver(ClassicalKind::kDishonestPreimage, logical, error_rate);
}

ClassicalProver ClassicalProver::biased_sampler(const StateVector &logical) {
    return ClassicalProver(ClassicalKind::kBiasedSampler, logical, 0.0);
}

std::vector<std::uint64_t> ClassicalProver::commit(std::span<const PublicKey> keys, RngStream &rng) const {
    if (keys.size() != static_cast<size_t>(num_qubits())) {
        throw std::invalid_argument("one key per logical qubit required");
    }
    std::vector<std::uint64_t> y;
    y.reserve(keys.size());
    for (const auto &pk : keys) {
        y.push_back(rng.below(std::uint64_t{1} << pk.m));
    }
    return y;
}

ClassicalResponses ClassicalProver::respond(
    std::span<const PublicKey> keys, std::span<const std::uint64_t> commitments, int challenge,
    RngStream &rng) const {
    int q = num_qubits();
    if (keys.size() != static_cast<size_t>(q) || commitments.size() != keys.size()) {
        throw std::invalid_argument("one key and one commitment per logical qubit required");
    }
    if (challenge != 0 && challenge != 1) {
        throw std::invalid_argument("challenge must be 0 or 1");
    }
    ClassicalResponses out;
    out.responses.reserve(keys.size());
    if (challenge == 0) {
        out.bits = z_sampler_->sample(rng);
        for (int i = 0; i < q; i++) {
            const PublicKey &pk = keys[static_cast<size_t>(i)];
            int b = bit_at(out.bits, q, i);
            std::uint64_t tail = b ? commitments[static_cast<size_t>(i)] ^ pk.shift : commitments[static_cast<size_t>(i)];
            out.responses.push_back(encode_preimage(pk.m, b, tail));
        }
        if (error_rate_ > 0 && rng.uniform() < error_rate_) {
            out.responses[rng.below(static_cast<std::uint64_t>(q))] ^= 1;
        }
        return out;
    }
    out.bits = x_sampler_->sample(rng);
    for (int i = 0; i < q; i++) {
        const PublicKey &pk = keys[static_cast<size_t>(i)];
        std::uint64_t claw = (std::uint64_t{1} << pk.m) | pk.shift;
        out.responses.push_back(sample_coset(pk.m, claw, bit_at(out.bits, q, i), rng));
    }
    return out;
}

}  // namespace certsamp
