#pragma once

// Reference computations that share no code path with the library internals
// beyond the basic types. Everything here is dense and exponential; callers
// keep sizes small.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "certsamp/chamiltonian.h"
#include "certsamp/statevec.h"

namespace certsamp::oracle {

/// An operator with the qubits it acts on (first listed is the most
/// significant bit of the matrix index).
struct Operator {
    Eigen::MatrixXcd matrix;
    std::vector<int> support;
};

/// 2^nq × 2^nq matrix of `op` acting on `support` and identity elsewhere.
Eigen::MatrixXcd embed(const Operator &op, int nq);

/// Product of the embedded gate unitaries (last gate leftmost).
Eigen::MatrixXcd circuit_unitary(const Circuit &c);

/// Probability that the first qubit reads 1 after running `c` on `input`.
double out_one_probability(const Circuit &c, const StateVector &input);

/// Circuit-to-Hamiltonian terms written out from the definitions with
/// Kronecker products, in the history layout of `g` (2n+1 computation qubits).
std::vector<Operator> kitaev_terms(const Circuit &g, int n);

/// Σ of embedded operators on nq qubits.
Eigen::MatrixXcd dense_sum(std::span<const Operator> ops, int nq);
/// The same sum restricted to rows and columns in `basis` (full-register
/// indices). Matrix elements are read off each operator directly, so no
/// 2^nq matrix is formed.
Eigen::MatrixXcd block(std::span<const Operator> ops, int nq, std::span<const std::uint64_t> basis);
/// Library terms as oracle operators.
std::vector<Operator> operators(const LocalHamiltonian &h);

/// Full-register indices whose clock reads a legal unary value.
std::vector<std::uint64_t> legal_clock_indices(int n, int t_prime);

/// History state assembled from dense prefix unitaries.
StateVector history_state_dense(const Circuit &g, int n, const StateVector &psi);

/// ⟨ψ|P|ψ⟩ for a Pauli string, by acting with each letter on basis indices.
double pauli_expectation(const PauliString &p, const StateVector &state);

/// Commitment blocks simulated at the amplitude level for the XOR-shift
/// family. For each logical qubit i the physical register is (b_i, x_i) with
/// m tail bits; the prover holds Σ_b α_b |b⟩|x⟩|x ⊕ b·s_i⟩ over uniform x.
/// Every image y is enumerated with its probability, the register is
/// Hadamard-transformed, and the resulting outcome distribution is averaged.
/// Keys are the responses packed block 0 first, each m+1 bits wide with the
/// label bit on top.
struct BlockOracle {
    std::map<std::uint64_t, double> d_distribution;
    /// Largest deviation of P(y) from uniform over all image tuples.
    double max_image_bias;
};
BlockOracle hadamard_block_oracle(const StateVector &logical, std::span<const std::uint64_t> shifts, int m);

/// P[X ≤ k] for X ~ Binomial(n, p).
double binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

}  // namespace certsamp::oracle
