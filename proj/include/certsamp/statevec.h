#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "certsamp/dist.h"
#include "certsamp/rng.h"

namespace certsamp {

using Amplitude = std::complex<double>;
/// Row-major 2x2 complex matrix.
using Mat2 = std::array<Amplitude, 4>;

inline constexpr int kMaxSimulatedQubits = 24;
inline constexpr double kUnitaryTolerance = 1e-10;

enum class GateKind { kH, kX, kZ, kS, kT, kCNOT, kSWAP, kCSWAP, kU1, kCU1 };

std::string gate_name(GateKind kind);
GateKind gate_kind_from_name(const std::string &name);

/// One gate. `qubits` lists controls first, then targets:
/// CNOT {c, t}, CSWAP {c, a, b}, CU1 {c, t}, SWAP {a, b}, everything else {t}.
/// `matrix` is only meaningful for U1 and CU1.
struct Gate {
    GateKind kind;
    std::vector<int> qubits;
    Mat2 matrix{};

    static Gate h(int q);
    static Gate x(int q);
    static Gate z(int q);
    static Gate s(int q);
    static Gate t(int q);
    static Gate cnot(int control, int target);
    static Gate swap(int a, int b);
    static Gate cswap(int control, int a, int b);
    static Gate u1(int q, const Mat2 &m);
    static Gate cu1(int control, int target, const Mat2 &m);

    int arity() const {
        return static_cast<int>(qubits.size());
    }
    Gate adjoint() const;
    /// Dense unitary on `qubits` in the listed order (first listed qubit is the
    /// most significant index bit).
    Eigen::MatrixXcd unitary() const;

    bool operator==(const Gate &other) const = default;
};

bool is_unitary(const Mat2 &m, double tol = kUnitaryTolerance);
Mat2 mat2_adjoint(const Mat2 &m);

class Circuit {
   public:
    explicit Circuit(int num_qubits);

    /// Throws std::invalid_argument when indices repeat, fall out of range, or
    /// a U1/CU1 matrix is not unitary.
    void append(const Gate &gate);
    void append(const Circuit &other);

    int num_qubits() const {
        return num_qubits_;
    }
    int size() const {
        return static_cast<int>(gates_.size());
    }
    const std::vector<Gate> &gates() const {
        return gates_;
    }
    const Gate &operator[](int i) const {
        return gates_[static_cast<size_t>(i)];
    }

    /// Copy of this circuit with every qubit index q replaced by map[q].
    Circuit remapped(std::span<const int> map, int new_num_qubits) const;

    bool operator==(const Circuit &other) const = default;

   private:
    int num_qubits_;
    std::vector<Gate> gates_;
};

/// Uniformly random circuit over {H, S, T, X, CNOT, U1 (random SU(2))}.
Circuit random_circuit(int num_qubits, int num_gates, RngStream &rng);

class StateVector {
   public:
    static StateVector basis(int num_qubits, std::uint64_t index = 0);
    /// Validates size 2^q and norm 1 within kNormTolerance.
    static StateVector from_amplitudes(int num_qubits, std::vector<Amplitude> amps);
    /// Normalizes `amps` first. Throws when the norm is below 1e-12.
    static StateVector normalized(int num_qubits, std::vector<Amplitude> amps);
    /// Haar-like random state (normalized complex Gaussian vector).
    static StateVector random(int num_qubits, RngStream &rng);

    int num_qubits() const {
        return num_qubits_;
    }
    std::uint64_t dim() const {
        return std::uint64_t{1} << num_qubits_;
    }
    std::span<const Amplitude> amplitudes() const {
        return amps_;
    }
    Amplitude operator[](std::uint64_t index) const {
        return amps_[index];
    }
    double norm_squared() const;

    void apply(const Gate &gate);

    bool operator==(const StateVector &other) const = default;

   private:
    StateVector(int num_qubits, std::vector<Amplitude> amps) : num_qubits_(num_qubits), amps_(std::move(amps)) {
    }

    void apply_controlled_1q(std::uint64_t control_mask, int target, const Mat2 &m);
    void apply_controlled_swap(std::uint64_t control_mask, int a, int b);

    int num_qubits_;
    std::vector<Amplitude> amps_;
};

StateVector apply_circuit(StateVector state, const Circuit &circuit);

enum class Basis { kZ, kX, kY };

struct Measurement {
    /// Outcomes packed in the order of the requested qubit list (first qubit is
    /// the most significant bit). 0 means the +1 eigenvector of the basis.
    std::uint64_t bits;
    StateVector post_state;
};

/// Projective measurement of `qubits`, each in its own basis.
/// Throws on an empty or repeated index list, a basis list of the wrong
/// length, or when the selected branch has norm below 1e-12.
Measurement measure(
    const StateVector &state, std::span<const int> qubits, std::span<const Basis> bases, RngStream &rng);
Measurement measure(const StateVector &state, std::span<const int> qubits, Basis basis, RngStream &rng);

Distribution born_distribution(const StateVector &state);
/// Marginal Born distribution of `qubits` (first listed is most significant).
Distribution born_marginal(const StateVector &state, std::span<const int> qubits);
StateVector from_distribution(const Distribution &d);
/// Σ_x √D(x)·e^{i·arg ref(x)} |x⟩ (phase 1 where ref vanishes). Aligning with
/// ψ_C = C|0ⁿ⟩ makes |⟨ψ|ψ_C⟩|² = (1 − d_H(D, D_C)²)² for circuits whose
/// output amplitudes are not all non-negative.
StateVector from_distribution(const Distribution &d, const StateVector &phase_reference);

Amplitude inner_product(const StateVector &a, const StateVector &b);
/// |a⟩ ⊗ |b⟩ with a's qubits first.
StateVector tensor(const StateVector &a, const StateVector &b);

/// Reduced density matrix ρ_S = Tr_{rest} |ψ⟩⟨ψ| on `support` (first listed
/// qubit is the most significant row/column bit).
Eigen::MatrixXcd reduced_density(const StateVector &state, std::span<const int> support);

/// Inverse-CDF sampler over a fixed probability vector.
class CdfSampler {
   public:
    explicit CdfSampler(std::span<const double> probs);
    std::uint64_t sample(RngStream &rng) const;
    std::uint64_t size() const {
        return cdf_.size();
    }

   private:
    std::vector<double> cdf_;
};

void to_json(nlohmann::json &j, const Gate &g);
Gate gate_from_json(const nlohmann::json &j);
void to_json(nlohmann::json &j, const Circuit &c);
Circuit circuit_from_json(const nlohmann::json &j);

}  // namespace certsamp
