#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "certsamp/compare.h"
#include "certsamp/statevec.h"

namespace certsamp {

/// Qubit layout of the history-state system, n′ = 2n + T′ + 1 qubits:
///   out = 0, clock c_1..c_T′ = 1..T′, adv = T′+1..T′+n, aux = T′+n+1..T′+2n.
/// This is the order in which a prover sends (o, t, a, i) in the classical
/// protocol. Computation qubit g of G maps to 0 when g = 0 and to g + T′ otherwise.
struct HistoryLayout {
    int n;
    int t_prime;

    int num_qubits() const {
        return 2 * n + t_prime + 1;
    }
    static constexpr int out() {
        return 0;
    }
    /// Clock qubit k for k in 1..T′.
    int clock(int k) const {
        return k;
    }
    int adv(int i) const {
        return t_prime + 1 + i;
    }
    int aux(int i) const {
        return t_prime + n + 1 + i;
    }
    int comp(int g) const {
        return g == 0 ? 0 : g + t_prime;
    }
    /// Full register index of clock value j and computation-space index `comp`.
    std::uint64_t index(int j, std::uint64_t comp) const;
};

/// Clock value j if the clock bits of `full_index` read 1^j 0^{T′−j}, else nullopt.
std::optional<int> decode_clock(std::uint64_t full_index, const HistoryLayout &layout);

enum class TermTag { kIn, kProp, kClock, kOther };
std::string term_tag_name(TermTag tag);

struct LocalTerm {
    /// Qubits in matrix order (first listed is the most significant bit).
    std::vector<int> support;
    Eigen::MatrixXcd matrix;
    TermTag tag;
};

class LocalHamiltonian {
   public:
    LocalHamiltonian(int num_qubits, std::vector<LocalTerm> terms);

    int num_qubits() const {
        return num_qubits_;
    }
    int size() const {
        return static_cast<int>(terms_.size());
    }
    const std::vector<LocalTerm> &terms() const {
        return terms_;
    }
    const LocalTerm &operator[](int i) const {
        return terms_[static_cast<size_t>(i)];
    }
    int locality() const;

   private:
    int num_qubits_;
    std::vector<LocalTerm> terms_;
};

inline constexpr int kMaxLocality = 5;

/// H_G = H_in + H_prop + H_clock for the computation circuit `g` on 2n+1
/// qubits with a unary clock of T′ = g.size() qubits.
///   H_in: |0⟩⟨0|_{c1} ⊗ |1⟩⟨1|_q for q in out and aux (n+1 terms).
///   H_j: ½ P ⊗ I − ½ A ⊗ G_j − ½ A† ⊗ G_j†, where P projects c_{j−1} = 1,
///        c_{j+1} = 0 and A = |1⟩⟨0| on c_j under the same condition.
///        Missing neighbours at the ends are dropped (T′ terms).
///   H_clock: |01⟩⟨01| on each adjacent pair (c_k, c_{k+1}) (T′ − 1 terms).
/// L = (n+1) + 2T′ − 1. Throws when a gate touches more than two qubits, since
/// its propagation term would exceed locality 5.
LocalHamiltonian build_hamiltonian(const Circuit &g, int n);
LocalHamiltonian build_hamiltonian(const ComparisonCircuit &g);

HistoryLayout history_layout(const ComparisonCircuit &g);

/// (1/√(T′+1)) Σ_j |unary j⟩ ⊗ G_j⋯G_1 |0⟩_out |ψ⟩_adv |0ⁿ⟩_aux.
StateVector history_state(const Circuit &g, int n, const StateVector &psi);
StateVector history_state(const ComparisonCircuit &g, const StateVector &psi);

/// Σ_j √w_j |unary j⟩ ⊗ |slices[j]⟩ with w normalized to 1. Slices are
/// states on the 2n+1 computation qubits.
StateVector assemble_history(
    const HistoryLayout &layout, std::span<const StateVector> slices, std::span<const double> weights);

/// The computation-space states ξ_0..ξ_T′ of G on input ψ.
std::vector<StateVector> computation_slices(const Circuit &g, const StateVector &psi);

/// Σ_t ⟨ψ|H_t|ψ⟩ via reduced density matrices.
double energy_exact(const LocalHamiltonian &h, const StateVector &state);
double term_expectation(const LocalTerm &term, const StateVector &state);

enum class Pauli : char { kI = 'I', kX = 'X', kY = 'Y', kZ = 'Z' };

struct PauliString {
    double coefficient;
    /// Non-identity letters as (qubit, letter).
    std::vector<std::pair<int, Pauli>> letters;
};

/// Pauli expansion of a term. The identity component, when nonzero, is the
/// entry with no letters. Throws on non-Hermitian input or support above 5.
std::vector<PauliString> pauli_terms(const LocalTerm &term);
Eigen::MatrixXcd pauli_matrix(const PauliString &p, std::span<const int> support);

/// How the energy estimator measures the sampled term on a fresh copy.
enum class EnergyMeasurement {
    /// Joint projective measurement of the term's support in the term's own
    /// eigenbasis; records the eigenvalue. Zero variance on null states.
    kEigenbasis,
    /// Choose one Pauli string with probability ∝ |coefficient| and measure
    /// each support qubit in that string's basis; records the signed product.
    kPauliSampling,
};
std::string energy_measurement_name(EnergyMeasurement m);
EnergyMeasurement energy_measurement_from_name(const std::string &name);

/// Per-term measurement plans, precomputed once per Hamiltonian.
class TermSampler {
   public:
    TermSampler(const LocalHamiltonian &h, EnergyMeasurement mode);

    const LocalHamiltonian &hamiltonian() const {
        return *h_;
    }
    EnergyMeasurement mode() const {
        return mode_;
    }
    /// Measures term `t` on `state` and returns the single-shot value whose
    /// expectation is ⟨state|H_t|state⟩.
    double sample_term(int t, const StateVector &state, RngStream &rng) const;
    /// Outcome distribution of the measurement used for term `t`: pairs of
    /// (value, probability).
    std::vector<std::pair<double, double>> term_outcomes(int t, const StateVector &state) const;

   private:
    struct Plan {
        Eigen::VectorXd eigenvalues;
        Eigen::MatrixXcd eigenvectors;
        double identity = 0;
        double weight_total = 0;
        std::vector<PauliString> strings;
        std::vector<double> cumulative;
    };
    const LocalHamiltonian *h_;
    EnergyMeasurement mode_;
    std::vector<Plan> plans_;
};

struct EnergyEstimate {
    double mean;
    /// Sample standard deviation of the per-round value.
    double sigma;
    /// sigma / √rounds.
    double standard_error;
    std::uint64_t rounds;
};

using StateSource = std::function<std::shared_ptr<const StateVector>(std::uint64_t round)>;

/// Each round draws a term t uniformly from L, measures it on a fresh copy of
/// the state, and records L·value. The mean is an unbiased estimate of
/// ⟨H⟩. Round r uses substream (r, kVerifierMeasurement) of `rng`.
EnergyEstimate estimate_energy(
    const LocalHamiltonian &h, const StateSource &source, std::uint64_t rounds, const RngStream &rng,
    EnergyMeasurement mode = EnergyMeasurement::kEigenbasis);

void to_json(nlohmann::json &j, const LocalTerm &t);
void to_json(nlohmann::json &j, const LocalHamiltonian &h);

}  // namespace certsamp
