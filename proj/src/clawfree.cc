#include "certsamp/clawfree.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace certsamp {

namespace {

void require_tail(int m, std::uint64_t x) {
    if (m < 1 || m > kMaxTailBits) {
        throw std::invalid_argument("claw-free tail length must be in 1.." + std::to_string(kMaxTailBits));
    }
    if ((x >> m) != 0) {
        throw std::invalid_argument("value does not fit in " + std::to_string(m) + " bits");
    }
}

}  // namespace

KeyPair gen(int m, RngStream &rng) {
    if (m < 1 || m > kMaxTailBits) {
        throw std::invalid_argument("gen: m must be in 1.." + std::to_string(kMaxTailBits));
    }
    std::uint64_t s = 1 + rng.below((std::uint64_t{1} << m) - 1);
    std::uint64_t id = rng.next_u64();
    return KeyPair{PublicKey{m, id, s}, Trapdoor{s, id}};
}

std::uint64_t eval(const PublicKey &pk, int b, std::uint64_t x) {
    require_tail(pk.m, x);
    if (b != 0 && b != 1) {
        throw std::invalid_argument("eval: label must be 0 or 1");
    }
    return b ? x ^ pk.shift : x;
}

std::uint64_t invert(const Trapdoor &td, int m, std::uint64_t y, int b) {
    require_tail(m, y);
    return encode_preimage(m, b, b ? y ^ td.s : y);
}

std::uint64_t claw_sum(const Trapdoor &td, int m) {
    return (std::uint64_t{1} << m) | td.s;
}

ResponseCheck verify_response(
    const PublicKey &pk, const Trapdoor &td, std::uint64_t y, int challenge, std::uint64_t response) {
    require_tail(pk.m, y);
    if ((response >> (pk.m + 1)) != 0) {
        throw std::invalid_argument("response does not fit in m+1 bits");
    }
    if (td.pk_id != pk.id) {
        throw std::invalid_argument("trapdoor does not belong to this key");
    }
    switch (challenge) {
        case 0: {
            int b = preimage_label(pk.m, response);
            std::uint64_t tail = response & ((std::uint64_t{1} << pk.m) - 1);
            return {eval(pk, b, tail) == y, b};
        }
        case 1:
            return {true, parity(response & claw_sum(td, pk.m))};
        default:
            throw std::invalid_argument("challenge must be 0 or 1");
    }
}

std::uint64_t recover_shift(const PublicKey &pk) {
    return eval(pk, 1, 0) ^ eval(pk, 0, 0);
}

CollapsingGame::CollapsingGame(const KeyPair &keys, std::uint64_t y) : keys_(keys), y_(y) {
    require_tail(keys.pk.m, y);
    if (keys.pk.m + 1 > kMaxSimulatedQubits) {
        throw std::invalid_argument("collapsing game limited to 23 tail bits");
    }
}

StateVector CollapsingGame::adversary_state() const {
    int m = keys_.pk.m;
    std::vector<Amplitude> amps(std::uint64_t{1} << (m + 1));
    amps[invert(keys_.td, m, y_, 0)] = 1 / std::sqrt(2.0);
    amps[invert(keys_.td, m, y_, 1)] = 1 / std::sqrt(2.0);
    return StateVector::from_amplitudes(m + 1, std::move(amps));
}

bool CollapsingGame::play(RngStream &rng) const {
    int m = keys_.pk.m;
    StateVector state = adversary_state();
    int c = rng.bit();
    std::vector<int> all(static_cast<size_t>(m + 1));
    for (int i = 0; i <= m; i++) {
        all[static_cast<size_t>(i)] = i;
    }
    if (c == 1) {
        state = measure(state, all, Basis::kZ, rng).post_state;
    }
    // Project onto the original superposition.
    double overlap = std::norm(inner_product(adversary_state(), state));
    int guess = rng.uniform() < overlap ? 0 : 1;
    return guess == c;
}

double CollapsingGame::exact_win_probability() const {
    // c = 0: the state is untouched and the projection always succeeds.
    // c = 1: the collapsed preimage overlaps the superposition with weight ½.
    StateVector psi = adversary_state();
    int m = keys_.pk.m;
    double win_if_untouched = std::norm(inner_product(psi, psi));
    double win_if_collapsed = 0;
    for (int b = 0; b < 2; b++) {
        StateVector branch = StateVector::basis(m + 1, invert(keys_.td, m, y_, b));
        double p_branch = std::norm(inner_product(branch, psi));
        win_if_collapsed += p_branch * (1 - std::norm(inner_product(psi, branch)));
    }
    return 0.5 * win_if_untouched + 0.5 * win_if_collapsed;
}

void to_json(nlohmann::json &j, const KeyPair &k) {
    std::ostringstream hex;
    hex << std::hex << k.td.s;
    j = nlohmann::json{{"m", k.pk.m}, {"s", hex.str()}, {"id", k.pk.id}, {"insecure_toy", true}};
}

KeyPair keypair_from_json(const nlohmann::json &j) {
    if (!j.contains("insecure_toy") || !j.at("insecure_toy").get<bool>()) {
        throw std::invalid_argument("key file must carry \"insecure_toy\": true");
    }
    int m = j.at("m").get<int>();
    std::uint64_t s = std::stoull(j.at("s").get<std::string>(), nullptr, 16);
    std::uint64_t id = j.at("id").get<std::uint64_t>();
    require_tail(m, s);
    if (s == 0) {
        throw std::invalid_argument("key shift must be nonzero");
    }
    return KeyPair{PublicKey{m, id, s}, Trapdoor{s, id}};
}

}  // namespace certsamp
