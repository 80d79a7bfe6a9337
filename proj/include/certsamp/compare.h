#pragma once

#include <array>

#include "certsamp/statevec.h"

namespace certsamp {

/// The comparison circuit G for a payload circuit C on n qubits.
///
/// Registers on the 2n+1 qubit computation space: out is qubit 0, adv_i is
/// qubit 1+i and aux_i is qubit n+1+i. The gate list runs C on aux, then
/// H(out), one controlled swap of (adv_i, aux_i) per i in ascending order,
/// H(out) and finally X(out), so that out = 1 means "the states matched".
struct ComparisonCircuit {
    Circuit gates;
    int n;
    /// Gate count of the payload circuit C inside `gates` (after any
    /// decomposition).
    int payload_gates;
    /// Gate-list positions {0, end of C, after first H, after the swaps, end}.
    std::array<int, 5> slices;
    /// True when every gate touches at most two qubits.
    bool two_qubit;

    int t_prime() const {
        return gates.size();
    }
    int num_qubits() const {
        return 2 * n + 1;
    }
    static constexpr int out() {
        return 0;
    }
    int adv(int i) const {
        return 1 + i;
    }
    int aux(int i) const {
        return n + 1 + i;
    }
};

/// Builds G around C. With `two_qubit` set, each controlled swap (in C as well
/// as in the swap-test stage) is expanded into seven gates of at most two
/// qubits: CNOT(b→a), a five-gate Toffoli(c, a→b) over controlled-√X, CNOT(b→a).
/// The resulting T′ is then T + 7n + 3 when C itself has no controlled swaps.
ComparisonCircuit build_comparison(const Circuit &payload, bool two_qubit = false);

/// Replaces every CSWAP by its seven-gate two-qubit expansion.
Circuit expand_controlled_swaps(const Circuit &circuit);

/// U_C |0ⁿ⟩.
StateVector payload_state(const Circuit &payload);

/// Simulates G on |0⟩_out ⊗ ψ_A ⊗ |0ⁿ⟩_aux and returns P[out = 1].
double accept_probability_exact(const ComparisonCircuit &g, const StateVector &psi_a);

/// ½(1 + |⟨ψ_A|ψ_C⟩|²).
double accept_probability_analytic(const StateVector &psi_a, const StateVector &psi_c);

/// Computation-space input |0⟩_out ⊗ ψ ⊗ |0ⁿ⟩_aux of G.
StateVector comparison_input(const StateVector &psi);

}  // namespace certsamp
