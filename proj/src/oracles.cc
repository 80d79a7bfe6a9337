#include "certsamp/oracles.h"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace certsamp::oracle {

namespace {

using Eigen::MatrixXcd;

MatrixXcd m2(std::complex<double> a, std::complex<double> b, std::complex<double> c, std::complex<double> d) {
    MatrixXcd m(2, 2);
    m << a, b, c, d;
    return m;
}

const MatrixXcd &proj0() {
    static const MatrixXcd m = m2(1, 0, 0, 0);
    return m;
}
const MatrixXcd &proj1() {
    static const MatrixXcd m = m2(0, 0, 0, 1);
    return m;
}
const MatrixXcd &raise() {
    static const MatrixXcd m = m2(0, 0, 1, 0);
    return m;
}

MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// Matrix index of `full` restricted to `support`, first support qubit on top.
std::uint64_t sub_index(std::uint64_t full, std::span<const int> support, int nq) {
    std::uint64_t r = 0;
    for (int q : support) {
        r = (r << 1) | ((full >> (nq - 1 - q)) & 1);
    }
    return r;
}

std::uint64_t support_mask(std::span<const int> support, int nq) {
    std::uint64_t m = 0;
    for (int q : support) {
        m |= std::uint64_t{1} << (nq - 1 - q);
    }
    return m;
}

std::complex<double> element(const Operator &op, int nq, std::uint64_t row, std::uint64_t col) {
    std::uint64_t mask = support_mask(op.support, nq);
    if ((row & ~mask) != (col & ~mask)) {
        return 0;
    }
    return op.matrix(
        static_cast<Eigen::Index>(sub_index(row, op.support, nq)),
        static_cast<Eigen::Index>(sub_index(col, op.support, nq)));
}

}  // namespace

MatrixXcd embed(const Operator &op, int nq) {
    if (nq > 12) {
        throw std::invalid_argument("dense embedding limited to 12 qubits");
    }
    Eigen::Index dim = Eigen::Index{1} << nq;
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; r++) {
        for (Eigen::Index c = 0; c < dim; c++) {
            out(r, c) = element(op, nq, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
        }
    }
    return out;
}

MatrixXcd circuit_unitary(const Circuit &c) {
    int nq = c.num_qubits();
    MatrixXcd u = MatrixXcd::Identity(Eigen::Index{1} << nq, Eigen::Index{1} << nq);
    for (const Gate &g : c.gates()) {
        u = embed(Operator{g.unitary(), g.qubits}, nq) * u;
    }
    return u;
}

double out_one_probability(const Circuit &c, const StateVector &input) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(input.dim()));
    for (std::uint64_t i = 0; i < input.dim(); i++) {
        v(static_cast<Eigen::Index>(i)) = input[i];
    }
    Eigen::VectorXcd w = circuit_unitary(c) * v;
    double p = 0;
    Eigen::Index half = w.size() / 2;
    for (Eigen::Index i = half; i < w.size(); i++) {
        p += std::norm(w(i));
    }
    return p;
}

std::vector<Operator> kitaev_terms(const Circuit &g, int n) {
    int tp = g.size();
    auto clock = [](int k) { return k; };
    auto comp = [tp](int q) { return q == 0 ? 0 : q + tp; };
    std::vector<Operator> ops;
    // Input constraints: out and aux start at 0 while the clock reads 0.
    std::vector<int> checked{0};
    for (int i = 0; i < n; i++) {
        checked.push_back(n + 1 + i);
    }
    for (int q : checked) {
        ops.push_back({kron(proj0(), proj1()), {clock(1), comp(q)}});
    }
    // Propagation.
    for (int j = 1; j <= tp; j++) {
        MatrixXcd stay = MatrixXcd::Identity(2, 2);
        MatrixXcd step = raise();
        std::vector<int> support;
        if (j > 1) {
            stay = kron(proj1(), stay);
            step = kron(proj1(), step);
            support.push_back(clock(j - 1));
        }
        support.push_back(clock(j));
        if (j < tp) {
            stay = kron(stay, proj0());
            step = kron(step, proj0());
            support.push_back(clock(j + 1));
        }
        const Gate &gate = g[j - 1];
        MatrixXcd u = gate.unitary();
        for (int q : gate.qubits) {
            support.push_back(comp(q));
        }
        MatrixXcd id = MatrixXcd::Identity(u.rows(), u.cols());
        MatrixXcd term = 0.5 * kron(stay, id) - 0.5 * kron(step, u) - 0.5 * kron(step.adjoint(), u.adjoint());
        ops.push_back({term, support});
    }
    // Clock legality: no 0 followed by 1.
    for (int k = 1; k < tp; k++) {
        ops.push_back({kron(proj0(), proj1()), {clock(k), clock(k + 1)}});
    }
    return ops;
}

MatrixXcd dense_sum(std::span<const Operator> ops, int nq) {
    Eigen::Index dim = Eigen::Index{1} << nq;
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (const auto &op : ops) {
        out += embed(op, nq);
    }
    return out;
}

MatrixXcd block(std::span<const Operator> ops, int nq, std::span<const std::uint64_t> basis) {
    auto dim = static_cast<Eigen::Index>(basis.size());
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (const auto &op : ops) {
        for (Eigen::Index r = 0; r < dim; r++) {
            for (Eigen::Index c = 0; c < dim; c++) {
                out(r, c) += element(op, nq, basis[static_cast<size_t>(r)], basis[static_cast<size_t>(c)]);
            }
        }
    }
    return out;
}

std::vector<Operator> operators(const LocalHamiltonian &h) {
    std::vector<Operator> ops;
    for (const auto &t : h.terms()) {
        ops.push_back({t.matrix, t.support});
    }
    return ops;
}

std::vector<std::uint64_t> legal_clock_indices(int n, int t_prime) {
    int nq = 2 * n + t_prime + 1;
    std::vector<std::uint64_t> out;
    for (int j = 0; j <= t_prime; j++) {
        for (std::uint64_t o = 0; o < 2; o++) {
            for (std::uint64_t rest = 0; rest < (std::uint64_t{1} << (2 * n)); rest++) {
                std::uint64_t idx = o << (nq - 1);
                for (int k = 1; k <= j; k++) {
                    idx |= std::uint64_t{1} << (nq - 1 - k);
                }
                out.push_back(idx | rest);
            }
        }
    }
    return out;
}

StateVector history_state_dense(const Circuit &g, int n, const StateVector &psi) {
    int cq = 2 * n + 1;
    int tp = g.size();
    int nq = cq + tp;
    Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(Eigen::Index{1} << cq);
    // |0⟩_out |ψ⟩_adv |0ⁿ⟩_aux: adv index a lands at a·2ⁿ.
    for (std::uint64_t a = 0; a < psi.dim(); a++) {
        xi(static_cast<Eigen::Index>(a << n)) = psi[a];
    }
    std::vector<Amplitude> full(std::uint64_t{1} << nq);
    double w = 1 / std::sqrt(static_cast<double>(tp + 1));
    for (int j = 0; j <= tp; j++) {
        if (j > 0) {
            xi = embed(Operator{g[j - 1].unitary(), g[j - 1].qubits}, cq) * xi;
        }
        for (Eigen::Index c = 0; c < xi.size(); c++) {
            std::uint64_t cu = static_cast<std::uint64_t>(c);
            std::uint64_t out_bit = cu >> (2 * n);
            std::uint64_t idx = (out_bit << (nq - 1)) | (cu & ((std::uint64_t{1} << (2 * n)) - 1));
            for (int k = 1; k <= j; k++) {
                idx |= std::uint64_t{1} << (nq - 1 - k);
            }
            full[idx] += w * xi(c);
        }
    }
    return StateVector::from_amplitudes(nq, std::move(full));
}

double pauli_expectation(const PauliString &p, const StateVector &state) {
    int nq = state.num_qubits();
    std::complex<double> acc = 0;
    for (std::uint64_t i = 0; i < state.dim(); i++) {
        // P|i⟩ = phase·|j⟩, so ⟨ψ|P|ψ⟩ = Σ_i conj(ψ_j) phase ψ_i.
        std::uint64_t j = i;
        std::complex<double> phase = 1;
        for (const auto &[q, letter] : p.letters) {
            std::uint64_t bit = (i >> (nq - 1 - q)) & 1;
            switch (letter) {
                case Pauli::kX:
                    j ^= std::uint64_t{1} << (nq - 1 - q);
                    break;
                case Pauli::kY:
                    j ^= std::uint64_t{1} << (nq - 1 - q);
                    phase *= bit ? std::complex<double>(0, -1) : std::complex<double>(0, 1);
                    break;
                case Pauli::kZ:
                    phase *= bit ? -1.0 : 1.0;
                    break;
                case Pauli::kI:
                    break;
            }
        }
        acc += std::conj(state[j]) * phase * state[i];
    }
    return p.coefficient * acc.real();
}

BlockOracle hadamard_block_oracle(const StateVector &logical, std::span<const std::uint64_t> shifts, int m) {
    int k = logical.num_qubits();
    if (static_cast<int>(shifts.size()) != k || k * (m + 1) > 16) {
        throw std::invalid_argument("block oracle: one shift per logical qubit and at most 16 physical qubits");
    }
    int width = m + 1;
    int phys = k * width;
    std::uint64_t tails = std::uint64_t{1} << m;
    std::uint64_t image_tuples = std::uint64_t{1} << (k * m);
    BlockOracle out{{}, 0};
    for (std::uint64_t ys = 0; ys < image_tuples; ys++) {
        // Pre-measurement: Σ_b α_b 2^{−km/2} Σ_x |b, x⟩|x ⊕ b·s⟩. Project the
        // image registers on y: the surviving branch of block i for label b_i
        // has x_i = y_i ⊕ b_i s_i, amplitude α_b 2^{−km/2}.
        std::vector<std::complex<double>> amp(std::uint64_t{1} << phys);
        double prob_y = 0;
        for (std::uint64_t b = 0; b < logical.dim(); b++) {
            std::uint64_t idx = 0;
            for (int i = 0; i < k; i++) {
                std::uint64_t bi = (b >> (k - 1 - i)) & 1;
                std::uint64_t yi = (ys >> ((k - 1 - i) * m)) & (tails - 1);
                std::uint64_t xi = yi ^ (bi ? shifts[static_cast<size_t>(i)] : 0);
                idx = (idx << width) | (bi << m) | xi;
            }
            std::complex<double> a = logical[b] / std::sqrt(static_cast<double>(image_tuples));
            amp[idx] += a;
            prob_y += std::norm(a);
        }
        out.max_image_bias = std::max(out.max_image_bias, std::abs(prob_y - 1.0 / static_cast<double>(image_tuples)));
        if (prob_y <= 0) {
            continue;
        }
        // Hadamard on every physical qubit, written as the explicit sum.
        double scale = 1 / std::sqrt(static_cast<double>(amp.size()));
        std::vector<std::pair<std::uint64_t, std::complex<double>>> support;
        for (std::uint64_t v = 0; v < amp.size(); v++) {
            if (amp[v] != std::complex<double>(0)) {
                support.emplace_back(v, amp[v]);
            }
        }
        for (std::uint64_t d = 0; d < amp.size(); d++) {
            std::complex<double> s = 0;
            for (const auto &[v, a] : support) {
                s += (std::popcount(d & v) & 1 ? -1.0 : 1.0) * a;
            }
            double p = std::norm(s * scale);
            if (p > 0) {
                out.d_distribution[d] += p;
            }
        }
    }
    return out;
}

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
    if (k >= n) {
        return 1;
    }
    if (p <= 0) {
        return 1;
    }
    if (p >= 1) {
        return 0;
    }
    double ln_p = std::log(p), ln_q = std::log1p(-p);
    double nn = static_cast<double>(n);
    double total = 0;
    for (std::uint64_t i = 0; i <= k; i++) {
        double ii = static_cast<double>(i);
        double ln_term = std::lgamma(nn + 1) - std::lgamma(ii + 1) - std::lgamma(nn - ii + 1) + ii * ln_p + (nn - ii) * ln_q;
        total += std::exp(ln_term);
    }
    return std::min(1.0, total);
}

}  // namespace certsamp::oracle
