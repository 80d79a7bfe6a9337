#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "certsamp/chamiltonian.h"
#include "certsamp/compare.h"
#include "certsamp/provers.h"

namespace certsamp {

/// Smallest k with 2·exp(−ε²k/2) ≤ δ, i.e. ceil(2 ln(2/δ) / ε²).
std::uint64_t rounds_needed(double epsilon, double delta);

struct ProtocolParams {
    double eta = 0.1;
    double delta = 0.1;
    std::uint64_t k = 1;
    /// Replaces the computed round count when set.
    std::optional<std::uint64_t> rounds_override;
    std::uint64_t seed = 0;
    /// Keep per-round records in the verdict.
    bool record_transcript = false;
    /// Estimator used by the constant-memory energy rounds.
    EnergyMeasurement energy_measurement = EnergyMeasurement::kEigenbasis;

    /// Throws std::invalid_argument unless η > 0 with 1 − 2η² > ½,
    /// 0 < δ < ⅓ and K ≥ 1.
    void validate() const;
};

struct Thresholds {
    double p_min;
    double energy_max;
};

/// p_min = 1 − 2η², energy_max = η² / (2T′³).
Thresholds thresholds(double eta, int t_prime);

/// Round counts, one function per protocol. See protocols.cc for how each
/// constant is composed from rounds_needed.
std::uint64_t quantum_rounds(const ProtocolParams &params);
std::uint64_t noniid_rounds(const ProtocolParams &params);
std::uint64_t constant_memory_rounds(const ProtocolParams &params, int t_prime, int num_terms);
/// `term_weight` is Σ|c| over the XZ Hamiltonian's non-identity strings.
std::uint64_t classical_rounds(const ProtocolParams &params, int t_prime, double term_weight);

enum class Outcome { kAccept, kReject, kError };
std::string outcome_name(Outcome o);

struct RoundRecord {
    std::uint64_t round;
    int type;
    /// Classical challenge bit, −1 elsewhere.
    int challenge = -1;
    /// Strategy component the prover used this round.
    int component = 0;
    /// Measured bits (full register, adv sample, or out bit).
    std::uint64_t outcome = 0;
    /// Sampled Hamiltonian term, −1 when none.
    int term = -1;
    /// Energy contribution of this round.
    double value = 0;
    /// True when this round appended to S.
    bool harvested = false;
};

void to_json(nlohmann::json &j, const RoundRecord &r);

struct Verdict {
    Outcome outcome = Outcome::kReject;
    std::string message;
    std::uint64_t rounds = 0;
    /// Samples in collection order, and the strategy component of each.
    std::vector<std::uint64_t> samples;
    std::vector<int> sample_components;
    /// The single returned sample of the non-i.i.d. protocol.
    std::optional<std::uint64_t> selected;
    /// Raw sums as accumulated by the verifier.
    double p_sum = 0;
    double gamma = 0;
    double gamma_sq = 0;
    std::uint64_t n1 = 0, n2 = 0, n3 = 0;
    /// Normalized estimates: p_sum over its counter, γ·L/n₁ (or γ/n₁ for the
    /// classical model).
    double p_estimate = 0;
    double energy_estimate = 0;
    /// Sample standard deviation of the per-round energy value.
    double energy_sigma = 0;
    std::vector<RoundRecord> transcript;

    bool accepted() const {
        return outcome == Outcome::kAccept;
    }
};

/// Quantum verifier. Type 0: measure the state in Z and append to S.
/// Type 1: run G and add the out bit to p. Accept iff p/n₁ ≥ 1 − 2η².
/// Counters: n₁ = type-1 rounds, n₂ = type-0 rounds.
Verdict run_quantum_verifier(const ComparisonCircuit &g, const ProtocolParams &params, const QuantumProver &prover);

/// Same round loop with the non-i.i.d. round count; on acceptance returns one
/// uniform element of S in `selected`.
Verdict run_noniid_verifier(const ComparisonCircuit &g, const ProtocolParams &params, const QuantumProver &prover);

/// Constant-memory verifier on the history system of `g` (which must be
/// two-qubit decomposed). Types: 1 energy (n₁), 2 sample (n₂ every round;
/// harvest when clock = 0, out = 0, aux = 0ⁿ), 3 output (n₃ and p only when
/// clock = T′). Accept iff γ·L/n₁ ≤ η²/(2T′³) and p/n₃ ≥ 1 − 2η².
Verdict run_constant_memory(
    const ComparisonCircuit &g, const LocalHamiltonian &h, const ProtocolParams &params, const HistoryProver &prover);

/// A Hamiltonian whose terms are all-Z or all-X Pauli strings (plus an
/// optional identity offset). When `layout` is set the sample and output
/// rounds gate on the history registers.
struct XZHamiltonian {
    int num_qubits;
    std::vector<PauliString> terms;
    std::optional<HistoryLayout> layout;

    /// Throws unless each string uses only Z or only X letters in range.
    void validate() const;
    double exact_energy(const StateVector &state) const;
};

/// The Z-diagonal part of H_G (input and clock terms), expanded into all-Z
/// strings, with the layout of g. It vanishes on every legal history state.
XZHamiltonian xz_part(const LocalHamiltonian &h, const HistoryLayout &layout);

/// Classical verifier with fresh toy keys per round. Types: 1 energy (both
/// challenges; every same-basis term evaluated with weight 2), 2 output (n₂
/// and p only when clock = T′), 3 sample (n₃ every challenge-0 round).
/// Preimage failure yields an error verdict. No threshold is applied: the
/// outcome is kAccept whenever the run completes, and callers apply
/// thresholds() to p_estimate and energy_estimate afterwards.
Verdict run_classical(const XZHamiltonian &h, const ProtocolParams &params, int key_bits, const ClassicalProver &prover);

/// D^A attributed to a quantum-protocol run: the strategy mixture for i.i.d.
/// kinds, the mean over sample rounds for schedules.
Distribution implied_distribution(const QuantumProver &prover, const Verdict &verdict);

}  // namespace certsamp
