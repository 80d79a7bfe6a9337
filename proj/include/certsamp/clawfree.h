#pragma once

// INSECURE TOY CLAW-FREE FAMILY. NOT A CRYPTOGRAPHIC PRIMITIVE.
//
// f_s(b, x) = x XOR (b·s) for a secret nonzero m-bit shift s. It has the
// structure the classical protocol consumes (2-to-1, preimages labelled by
// their first bit, a claw sum that does not depend on the image, trapdoor
// inversion) and nothing else. Anyone holding two evaluations recovers s, so
// the adaptive hardcore bit property and the collapsing property both fail;
// `recover_shift` and `CollapsingGame` demonstrate this.

#include <cstdint>

#include <json.hpp>

#include "certsamp/rng.h"
#include "certsamp/statevec.h"

namespace certsamp {

inline constexpr int kMaxTailBits = 20;

/// Evaluation key. Because the family is a toy, it carries the shift in the
/// clear; the separate Trapdoor type only mirrors the protocol's message flow.
struct PublicKey {
    int m;
    std::uint64_t id;
    std::uint64_t shift;

    bool operator==(const PublicKey &) const = default;
};

struct Trapdoor {
    std::uint64_t s;
    std::uint64_t pk_id;

    bool operator==(const Trapdoor &) const = default;
};

struct KeyPair {
    PublicKey pk;
    Trapdoor td;
};

/// Uniform nonzero s in {1, ..., 2^m − 1}. The key id is drawn from the same stream.
KeyPair gen(int m, RngStream &rng);

/// y = x XOR (b·s). Throws when x does not fit in m bits or b is not a bit.
std::uint64_t eval(const PublicKey &pk, int b, std::uint64_t x);

/// Preimage encoded as an (m+1)-bit string: the label b is the top bit.
inline std::uint64_t encode_preimage(int m, int b, std::uint64_t x) {
    return (static_cast<std::uint64_t>(b) << m) | x;
}
inline int preimage_label(int m, std::uint64_t preimage) {
    return static_cast<int>((preimage >> m) & 1U);
}

/// The b-labelled preimage of y, computed with the trapdoor.
std::uint64_t invert(const Trapdoor &td, int m, std::uint64_t y, int b);

/// (1, s) as an (m+1)-bit string; equals x_0 XOR x_1 for every image y.
std::uint64_t claw_sum(const Trapdoor &td, int m);

struct ResponseCheck {
    bool ok;
    /// Challenge 0: the preimage label b. Challenge 1: the parity d·(x_0 + x_1).
    int bit;
};

/// Challenge 0: `response` is a preimage; ok iff it evaluates to y.
/// Challenge 1: `response` is an equation d; always ok when well formed, and
/// the bit is d·claw_sum. Throws on out-of-range lengths or challenge.
ResponseCheck verify_response(
    const PublicKey &pk, const Trapdoor &td, std::uint64_t y, int challenge, std::uint64_t response);

/// Demonstration of insecurity: s = f(1, 0) XOR f(0, 0).
std::uint64_t recover_shift(const PublicKey &pk);

/// Collapsing game at amplitude level on m+1 qubits.
///
/// The adversary prepares (|0, y⟩ + |1, y⊕s⟩)/√2 (label qubit first, the m
/// tail qubits after it). The challenger flips a coin c; on c = 1 it measures
/// the preimage register, collapsing the superposition. The adversary measures
/// in the basis containing its original state and guesses c = 0 on the
/// matching outcome. Against this toy family the adversary wins with
/// probability 3/4, where a collapsing family would allow only ½ + ngl.
class CollapsingGame {
   public:
    CollapsingGame(const KeyPair &keys, std::uint64_t y);

    StateVector adversary_state() const;
    /// One play; returns true when the adversary guessed c correctly.
    bool play(RngStream &rng) const;
    /// Exact winning probability from Born weights.
    double exact_win_probability() const;

   private:
    KeyPair keys_;
    std::uint64_t y_;
};

void to_json(nlohmann::json &j, const KeyPair &k);
KeyPair keypair_from_json(const nlohmann::json &j);

}  // namespace certsamp
