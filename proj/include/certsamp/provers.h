#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "certsamp/chamiltonian.h"
#include "certsamp/clawfree.h"
#include "certsamp/compare.h"
#include "certsamp/dist.h"
#include "certsamp/statevec.h"

namespace certsamp {

using StatePtr = std::shared_ptr<const StateVector>;

/// What a prover hands the verifier in one round. `component` identifies which
/// of the strategy's fixed states was used (ensemble draw or schedule slot).
struct RoundState {
    StatePtr state;
    int component;
};

/// Mixed states are realized by sampling a pure component per round with its
/// ensemble weight. Round statistics match ρ = Σ qᵢ|ψᵢ⟩⟨ψᵢ| exactly because
/// the verifier only ever measures.
class MixtureStrategy {
   public:
    MixtureStrategy(std::vector<double> weights, std::vector<StatePtr> states, bool iid);

    bool iid() const {
        return iid_;
    }
    int num_qubits() const {
        return states_.front()->num_qubits();
    }
    const std::vector<double> &weights() const {
        return weights_;
    }
    const std::vector<StatePtr> &states() const {
        return states_;
    }

    /// i.i.d. strategies draw a component from `rng`; schedules return slot
    /// `round` and throw std::out_of_range once exhausted.
    RoundState round_state(std::uint64_t round, RngStream &rng) const;

   private:
    std::vector<double> weights_;
    std::vector<StatePtr> states_;
    std::vector<double> cdf_;
    bool iid_;
};

enum class QuantumKind { kHonest, kFixedState, kEnsemble, kSchedule };
std::string quantum_kind_name(QuantumKind k);

/// Strategies for the quantum-verifier protocols; states live on n qubits.
class QuantumProver : public MixtureStrategy {
   public:
    static QuantumProver honest(const Distribution &d);
    /// Sends from_distribution(d, phase_reference) every round.
    static QuantumProver honest(const Distribution &d, const StateVector &phase_reference);
    static QuantumProver fixed_state(const StateVector &psi);
    static QuantumProver ensemble(const std::vector<std::pair<double, StateVector>> &components);
    static QuantumProver schedule(const std::vector<StateVector> &states);

    QuantumKind kind() const {
        return kind_;
    }
    /// Born distribution of component i.
    Distribution component_distribution(int i) const;
    /// D^A of the strategy: the weighted mixture for i.i.d. kinds, the plain
    /// average over slots for schedules.
    Distribution implied_distribution() const;

   private:
    QuantumProver(QuantumKind kind, MixtureStrategy mix) : MixtureStrategy(std::move(mix)), kind_(kind) {
    }
    QuantumKind kind_;
};

enum class HistoryKind { kHonest, kCorrupted, kEnsemble };
enum class Corruption { kWrongInput, kClockSkew, kInputViolation };
std::string history_kind_name(HistoryKind k);
std::string corruption_name(Corruption c);
Corruption corruption_from_name(const std::string &name);

/// Strategies for the constant-memory protocol; states live on n′ qubits.
class HistoryProver : public MixtureStrategy {
   public:
    /// History state of G on ψ.
    static HistoryProver honest(const ComparisonCircuit &g, const StateVector &psi);
    /// wrong_input: history state of G on the supplied ψ, which the caller
    ///   picks different from ψ_D (ε unused).
    /// input_violation: slice 0 replaced by √(1−ε)|ξ₀⟩ + √ε X_{aux₀}|ξ₀⟩,
    ///   all other slices honest.
    /// clock_skew: slice j gets Born weight ∝ 1+ε for even j and 1−ε for odd j.
    static HistoryProver corrupted(const ComparisonCircuit &g, const StateVector &psi, double epsilon, Corruption mode);
    static HistoryProver ensemble(
        const ComparisonCircuit &g, const std::vector<std::pair<double, StateVector>> &components);

    HistoryKind kind() const {
        return kind_;
    }
    const HistoryLayout &layout() const {
        return layout_;
    }
    /// Adv distribution of the (mixed) state conditioned on clock = 0, out = 0
    /// and aux = 0ⁿ. Throws when the condition has zero probability.
    Distribution implied_distribution() const;

   private:
    HistoryProver(HistoryKind kind, HistoryLayout layout, MixtureStrategy mix)
        : MixtureStrategy(std::move(mix)), kind_(kind), layout_(layout) {
    }
    HistoryKind kind_;
    HistoryLayout layout_;
};

/// Adv distribution of `state` conditioned on clock = 0, out = 0, aux = 0ⁿ,
/// as unnormalized weights over adv strings plus the condition's probability.
std::pair<std::vector<double>, double> conditioned_adv_weights(const StateVector &state, const HistoryLayout &layout);

enum class ClassicalKind { kHonest, kDishonestPreimage, kBiasedSampler };
std::string classical_kind_name(ClassicalKind k);

/// Responses to one challenge. `bits` are the logical outcomes the honest
/// simulation drew (Z outcomes for challenge 0, X outcomes for challenge 1);
/// the verifier never reads them.
struct ClassicalResponses {
    std::vector<std::uint64_t> responses;
    std::uint64_t bits;
};

/// Strategies for the classical-verifier protocol.
///
/// The prover keeps the n′-qubit logical state instead of n′(m+1) physical
/// qubits. For the XOR-shift family, committing to a uniformly random image
/// y_i leaves block i in Σ_b α_b|b⟩|y_i ⊕ b·s_i⟩. A Z measurement of the block
/// reveals (b_i, y_i ⊕ b_i s_i) with b distributed as the logical Z outcome.
/// A Hadamard measurement of the block returns d with probability
/// |Σ_b α_b (−1)^{b·(d·(1,s))}|² / 2^{m+1} up to a phase common to all b, so d
/// is uniform on the coset {d : d·(1, s_i) = o_i} where o is the logical X
/// outcome. Both are sampled directly here.
class ClassicalProver {
   public:
    static ClassicalProver honest(const StateVector &logical);
    /// Like honest, but with probability `error_rate` per challenge-0 round
    /// flips the last tail bit of one uniformly chosen preimage.
    static ClassicalProver dishonest_preimage(const StateVector &logical, double error_rate);
    /// Honest behaviour on a logical state other than the one the verifier
    /// expects (for instance the history state of a wrong D^A).
    static ClassicalProver biased_sampler(const StateVector &logical);

    ClassicalKind kind() const {
        return kind_;
    }
    int num_qubits() const {
        return logical_->num_qubits();
    }
    const StateVector &logical_state() const {
        return *logical_;
    }
    bool iid() const {
        return true;
    }

    /// Images y_1..y_{n′}, uniform over {0,1}^m for each key.
    std::vector<std::uint64_t> commit(std::span<const PublicKey> keys, RngStream &rng) const;
    ClassicalResponses respond(
        std::span<const PublicKey> keys, std::span<const std::uint64_t> commitments, int challenge,
        RngStream &rng) const;

   private:
    ClassicalProver(ClassicalKind kind, const StateVector &logical, double error_rate);

    ClassicalKind kind_;
    std::shared_ptr<const StateVector> logical_;
    double error_rate_;
    std::shared_ptr<const CdfSampler> z_sampler_;
    std::shared_ptr<const CdfSampler> x_sampler_;
};

/// H^{⊗q}|ψ⟩ via the fast Walsh–Hadamard transform.
StateVector hadamard_all(const StateVector &state);

/// d uniform on {d ∈ {0,1}^{m+1} : d·claw = o}, where claw has its top bit set.
std::uint64_t sample_coset(int m, std::uint64_t claw, int o, RngStream &rng);

}  // namespace certsamp
