#include "certsamp/compare.h"

#include <stdexcept>

namespace certsamp {

namespace {

// Controlled-√X and its adjoint, with √X = ½[[1+i, 1−i], [1−i, 1+i]].
const Mat2 kSqrtX{Amplitude{0.5, 0.5}, Amplitude{0.5, -0.5}, Amplitude{0.5, -0.5}, Amplitude{0.5, 0.5}};

void append_toffoli(Circuit &c, int a, int b, int target) {
    c.append(Gate::cu1(b, target, kSqrtX));
    c.append(Gate::cnot(a, b));
    c.append(Gate::cu1(b, target, mat2_adjoint(kSqrtX)));
    c.append(Gate::cnot(a, b));
    c.append(Gate::cu1(a, target, kSqrtX));
}

void append_cswap(Circuit &c, int control, int a, int b, bool two_qubit) {
    if (!two_qubit) {
        c.append(Gate::cswap(control, a, b));
        return;
    }
    c.append(Gate::cnot(b, a));
    append_toffoli(c, control, a, b);
    c.append(Gate::cnot(b, a));
}

}  // namespace

Circuit expand_controlled_swaps(const Circuit &circuit) {
    Circuit out(circuit.num_qubits());
    for (const auto &g : circuit.gates()) {
        if (g.kind == GateKind::kCSWAP) {
            append_cswap(out, g.qubits[0], g.qubits[1], g.qubits[2], true);
        } else {
            out.append(g);
        }
    }
    return out;
}

ComparisonCircuit build_comparison(const Circuit &payload, bool two_qubit) {
    int n = payload.num_qubits();
    if (n < 1) {
        throw std::invalid_argument("comparison circuit needs a payload of at least one qubit");
    }
    Circuit c = two_qubit ? expand_controlled_swaps(payload) : payload;
    std::vector<int> to_aux(static_cast<size_t>(n));
    for (int i = 0; i < n; i++) {
        to_aux[static_cast<size_t>(i)] = n + 1 + i;
    }
    Circuit g(2 * n + 1);
    g.append(c.remapped(to_aux, 2 * n + 1));
    std::array<int, 5> slices{};
    slices[0] = 0;
    slices[1] = g.size();
    g.append(Gate::h(0));
    slices[2] = g.size();
    for (int i = 0; i < n; i++) {
        append_cswap(g, 0, 1 + i, n + 1 + i, two_qubit);
    }
    slices[3] = g.size();
    g.append(Gate::h(0));
    g.append(Gate::x(0));
    slices[4] = g.size();
    return ComparisonCircuit{std::move(g), n, c.size(), slices, two_qubit};
}

StateVector payload_state(const Circuit &payload) {
    return apply_circuit(StateVector::basis(payload.num_qubits()), payload);
}

StateVector comparison_input(const StateVector &psi) {
    return tensor(tensor(StateVector::basis(1), psi), StateVector::basis(psi.num_qubits()));
}

double accept_probability_exact(const ComparisonCircuit &g, const StateVector &psi_a) {
    if (psi_a.num_qubits() != g.n) {
        throw std::invalid_argument(
            "adversary state has " + std::to_string(psi_a.num_qubits()) + " qubits, comparison expects " +
            std::to_string(g.n));
    }
    StateVector out = apply_circuit(comparison_input(psi_a), g.gates);
    double p = 0;
    std::uint64_t half = out.dim() / 2;
    for (std::uint64_t i = half; i < out.dim(); i++) {
        p += std::norm(out[i]);
    }
    return p;
}

double accept_probability_analytic(const StateVector &psi_a, const StateVector &psi_c) {
    return 0.5 * (1 + std::norm(inner_product(psi_a, psi_c)));
}

}  // namespace certsamp
