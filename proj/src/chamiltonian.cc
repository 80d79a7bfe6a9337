#include "certsamp/chamiltonian.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace certsamp {

namespace {

using Eigen::MatrixXcd;

MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

MatrixXcd ket_bra(int row, int col) {
    MatrixXcd m = MatrixXcd::Zero(2, 2);
    m(row, col) = 1;
    return m;
}

MatrixXcd single_pauli(Pauli p) {
    MatrixXcd m = MatrixXcd::Zero(2, 2);
    switch (p) {
        case Pauli::kI:
            m(0, 0) = m(1, 1) = 1;
            break;
        case Pauli::kX:
            m(0, 1) = m(1, 0) = 1;
            break;
        case Pauli::kY:
            m(0, 1) = Amplitude{0, -1};
            m(1, 0) = Amplitude{0, 1};
            break;
        case Pauli::kZ:
            m(0, 0) = 1;
            m(1, 1) = -1;
            break;
    }
    return m;
}

constexpr Pauli kPauliOrder[4] = {Pauli::kI, Pauli::kX, Pauli::kY, Pauli::kZ};

void require_hermitian(const MatrixXcd &m) {
    if (m.rows() != m.cols() || (m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("local term matrix is not Hermitian");
    }
}

}  // namespace

std::uint64_t HistoryLayout::index(int j, std::uint64_t comp) const {
    int comp_rest_bits = 2 * n;
    std::uint64_t rest_mask = (std::uint64_t{1} << comp_rest_bits) - 1;
    std::uint64_t out_bit = comp >> comp_rest_bits;
    std::uint64_t unary = ((std::uint64_t{1} << j) - 1) << (t_prime - j);
    return (out_bit << (num_qubits() - 1)) | (unary << comp_rest_bits) | (comp & rest_mask);
}

std::optional<int> decode_clock(std::uint64_t full_index, const HistoryLayout &layout) {
    std::uint64_t field = (full_index >> (2 * layout.n)) & ((std::uint64_t{1} << layout.t_prime) - 1);
    int j = __builtin_popcountll(field);
    std::uint64_t expected = ((std::uint64_t{1} << j) - 1) << (layout.t_prime - j);
    if (field != expected) {
        return std::nullopt;
    }
    return j;
}

std::string term_tag_name(TermTag tag) {
    switch (tag) {
        case TermTag::kIn:
            return "in";
        case TermTag::kProp:
            return "prop";
        case TermTag::kClock:
            return "clock";
        case TermTag::kOther:
            return "other";
    }
    return "other";
}

LocalHamiltonian::LocalHamiltonian(int num_qubits, std::vector<LocalTerm> terms)
    : num_qubits_(num_qubits), terms_(std::move(terms)) {
    for (const auto &t : terms_) {
        if (t.support.empty() || t.support.size() > static_cast<size_t>(kMaxLocality)) {
            throw std::invalid_argument("local term support must have 1..5 qubits");
        }
        for (size_t i = 0; i < t.support.size(); i++) {
            if (t.support[i] < 0 || t.support[i] >= num_qubits) {
                throw std::invalid_argument("local term support out of range");
            }
            for (size_t k = 0; k < i; k++) {
                if (t.support[k] == t.support[i]) {
                    throw std::invalid_argument("local term support repeats a qubit");
                }
            }
        }
        Eigen::Index dim = Eigen::Index{1} << t.support.size();
        if (t.matrix.rows() != dim || t.matrix.cols() != dim) {
            throw std::invalid_argument("local term matrix does not match its support");
        }
        require_hermitian(t.matrix);
    }
}

int LocalHamiltonian::locality() const {
    size_t k = 0;
    for (const auto &t : terms_) {
        k = std::max(k, t.support.size());
    }
    return static_cast<int>(k);
}

LocalHamiltonian build_hamiltonian(const Circuit &g, int n) {
    if (g.num_qubits() != 2 * n + 1) {
        throw std::invalid_argument("computation circuit must act on 2n+1 qubits");
    }
    int tp = g.size();
    if (tp < 1) {
        throw std::invalid_argument("history construction needs at least one gate");
    }
    HistoryLayout layout{n, tp};
    std::vector<LocalTerm> terms;

    MatrixXcd p0 = ket_bra(0, 0);
    MatrixXcd p1 = ket_bra(1, 1);
    MatrixXcd id2 = MatrixXcd::Identity(2, 2);

    // H_in: the computation must start with out and aux at zero.
    std::vector<int> zero_qubits{HistoryLayout::out()};
    for (int i = 0; i < n; i++) {
        zero_qubits.push_back(layout.aux(i));
    }
    for (int q : zero_qubits) {
        terms.push_back({{layout.clock(1), q}, kron(p0, p1), TermTag::kIn});
    }

    // H_prop: one term per gate, coupling clock values j−1 and j.
    for (int j = 1; j <= tp; j++) {
        const Gate &gate = g[j - 1];
        if (gate.arity() > 2) {
            throw std::invalid_argument(
                "gate " + std::to_string(j) + " (" + gate_name(gate.kind) +
                ") touches more than two qubits; expand controlled swaps before building the Hamiltonian");
        }
        std::vector<int> support;
        MatrixXcd proj = MatrixXcd::Identity(1, 1);
        MatrixXcd step = MatrixXcd::Identity(1, 1);
        if (j > 1) {
            support.push_back(layout.clock(j - 1));
            proj = kron(proj, p1);
            step = kron(step, p1);
        }
        support.push_back(layout.clock(j));
        proj = kron(proj, id2);
        step = kron(step, ket_bra(1, 0));
        if (j < tp) {
            support.push_back(layout.clock(j + 1));
            proj = kron(proj, p0);
            step = kron(step, p0);
        }
        for (int q : gate.qubits) {
            support.push_back(layout.comp(q));
        }
        MatrixXcd u = gate.unitary();
        MatrixXcd id_u = MatrixXcd::Identity(u.rows(), u.cols());
        MatrixXcd forward = kron(step, u);
        MatrixXcd m = 0.5 * kron(proj, id_u) - 0.5 * forward - 0.5 * forward.adjoint();
        terms.push_back({std::move(support), std::move(m), TermTag::kProp});
    }

    // H_clock: forbid a zero followed by a one.
    for (int k = 1; k < tp; k++) {
        terms.push_back({{layout.clock(k), layout.clock(k + 1)}, kron(p0, p1), TermTag::kClock});
    }
    return LocalHamiltonian(layout.num_qubits(), std::move(terms));
}

LocalHamiltonian build_hamiltonian(const ComparisonCircuit &g) {
    return build_hamiltonian(g.gates, g.n);
}

HistoryLayout history_layout(const ComparisonCircuit &g) {
    return HistoryLayout{g.n, g.t_prime()};
}

std::vector<StateVector> computation_slices(const Circuit &g, const StateVector &psi) {
    std::vector<StateVector> slices;
    slices.reserve(static_cast<size_t>(g.size()) + 1);
    StateVector cur = comparison_input(psi);
    if (cur.num_qubits() != g.num_qubits()) {
        throw std::invalid_argument("input state does not match the computation circuit");
    }
    slices.push_back(cur);
    for (const auto &gate : g.gates()) {
        cur.apply(gate);
        slices.push_back(cur);
    }
    return slices;
}

StateVector assemble_history(
    const HistoryLayout &layout, std::span<const StateVector> slices, std::span<const double> weights) {
    if (slices.size() != static_cast<size_t>(layout.t_prime) + 1 || weights.size() != slices.size()) {
        throw std::invalid_argument("history assembly needs T′+1 slices and weights");
    }
    if (layout.num_qubits() > kMaxSimulatedQubits) {
        throw std::invalid_argument(
            "history system needs " + std::to_string(layout.num_qubits()) + " qubits, above the simulation cap of " +
            std::to_string(kMaxSimulatedQubits));
    }
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0)) {
            throw std::invalid_argument("history slice weights must be non-negative");
        }
        total += w;
    }
    std::vector<Amplitude> amps(std::uint64_t{1} << layout.num_qubits());
    for (size_t j = 0; j < slices.size(); j++) {
        if (slices[j].num_qubits() != 2 * layout.n + 1) {
            throw std::invalid_argument("history slice has the wrong width");
        }
        double scale = std::sqrt(weights[j] / total);
        auto a = slices[j].amplitudes();
        for (std::uint64_t c = 0; c < a.size(); c++) {
            amps[layout.index(static_cast<int>(j), c)] = scale * a[c];
        }
    }
    return StateVector::normalized(layout.num_qubits(), std::move(amps));
}

StateVector history_state(const Circuit &g, int n, const StateVector &psi) {
    if (psi.num_qubits() != n) {
        throw std::invalid_argument("history input must have n qubits");
    }
    auto slices = computation_slices(g, psi);
    std::vector<double> weights(slices.size(), 1.0);
    return assemble_history(HistoryLayout{n, g.size()}, slices, weights);
}

StateVector history_state(const ComparisonCircuit &g, const StateVector &psi) {
    return history_state(g.gates, g.n, psi);
}

double term_expectation(const LocalTerm &term, const StateVector &state) {
    MatrixXcd rho = reduced_density(state, term.support);
    return (rho * term.matrix).trace().real();
}

double energy_exact(const LocalHamiltonian &h, const StateVector &state) {
    if (state.num_qubits() != h.num_qubits()) {
        throw std::invalid_argument("state width does not match the Hamiltonian");
    }
    double e = 0;
    for (const auto &t : h.terms()) {
        e += term_expectation(t, state);
    }
    return e;
}

Eigen::MatrixXcd pauli_matrix(const PauliString &p, std::span<const int> support) {
    MatrixXcd m = MatrixXcd::Identity(1, 1);
    for (int q : support) {
        Pauli letter = Pauli::kI;
        for (const auto &[qq, l] : p.letters) {
            if (qq == q) {
                letter = l;
            }
        }
        m = kron(m, single_pauli(letter));
    }
    return p.coefficient * m;
}

std::vector<PauliString> pauli_terms(const LocalTerm &term) {
    size_t k = term.support.size();
    if (k > static_cast<size_t>(kMaxLocality)) {
        throw std::invalid_argument("Pauli expansion limited to 5 qubits");
    }
    require_hermitian(term.matrix);
    double dim = std::ldexp(1.0, static_cast<int>(k));
    std::vector<PauliString> out;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << (2 * k)); code++) {
        MatrixXcd p = MatrixXcd::Identity(1, 1);
        std::vector<std::pair<int, Pauli>> letters;
        for (size_t i = 0; i < k; i++) {
            Pauli l = kPauliOrder[(code >> (2 * (k - 1 - i))) & 3];
            p = kron(p, single_pauli(l));
            if (l != Pauli::kI) {
                letters.emplace_back(term.support[i], l);
            }
        }
        double c = (p * term.matrix).trace().real() / dim;
        if (std::abs(c) > 1e-14) {
            out.push_back({c, std::move(letters)});
        }
    }
    return out;
}

std::string energy_measurement_name(EnergyMeasurement m) {
    return m == EnergyMeasurement::kEigenbasis ? "eigenbasis" : "pauli";
}

EnergyMeasurement energy_measurement_from_name(const std::string &name) {
    if (name == "eigenbasis") {
        return EnergyMeasurement::kEigenbasis;
    }
    if (name == "pauli") {
        return EnergyMeasurement::kPauliSampling;
    }
    throw std::invalid_argument("unknown energy measurement '" + name + "' (expected eigenbasis or pauli)");
}

TermSampler::TermSampler(const LocalHamiltonian &h, EnergyMeasurement mode) : h_(&h), mode_(mode) {
    if (h.size() == 0) {
        throw std::invalid_argument("Hamiltonian has no terms");
    }
    for (const auto &t : h.terms()) {
        Plan plan;
        if (mode == EnergyMeasurement::kEigenbasis) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(t.matrix);
            // Round solver noise on exact eigenvalues (0 and 1 for the H_G
            // terms) so null states contribute exactly zero.
            plan.eigenvalues = solver.eigenvalues().unaryExpr([](double v) {
                double r = std::round(v);
                return std::abs(v - r) < 1e-12 ? r : v;
            });
            plan.eigenvectors = solver.eigenvectors();
        } else {
            for (auto &p : pauli_terms(t)) {
                if (p.letters.empty()) {
                    plan.identity = p.coefficient;
                    continue;
                }
                plan.weight_total += std::abs(p.coefficient);
                plan.cumulative.push_back(plan.weight_total);
                plan.strings.push_back(std::move(p));
            }
        }
        plans_.push_back(std::move(plan));
    }
}

std::vector<std::pair<double, double>> TermSampler::term_outcomes(int t, const StateVector &state) const {
    const Plan &plan = plans_.at(static_cast<size_t>(t));
    const LocalTerm &term = (*h_)[t];
    MatrixXcd rho = reduced_density(state, term.support);
    std::vector<std::pair<double, double>> out;
    if (mode_ == EnergyMeasurement::kEigenbasis) {
        for (Eigen::Index k = 0; k < plan.eigenvalues.size(); k++) {
            auto v = plan.eigenvectors.col(k);
            double p = (v.adjoint() * rho * v)(0, 0).real();
            out.emplace_back(plan.eigenvalues(k), std::max(0.0, p));
        }
        return out;
    }
    if (plan.strings.empty()) {
        out.emplace_back(plan.identity, 1.0);
        return out;
    }
    // The recorded value only depends on the sign of the measured product,
    // so each string contributes two outcomes.
    double plus = 0, minus = 0;
    for (const auto &s : plan.strings) {
        MatrixXcd unit = pauli_matrix({1.0, s.letters}, term.support);
        double expectation = (rho * unit).trace().real();
        double w = std::abs(s.coefficient) / plan.weight_total;
        double p_even = std::clamp(0.5 * (1 + expectation), 0.0, 1.0);
        bool positive = s.coefficient > 0;
        (positive ? plus : minus) += w * p_even;
        (positive ? minus : plus) += w * (1 - p_even);
    }
    out.emplace_back(plan.identity + plan.weight_total, plus);
    out.emplace_back(plan.identity - plan.weight_total, minus);
    return out;
}

double TermSampler::sample_term(int t, const StateVector &state, RngStream &rng) const {
    auto outcomes = term_outcomes(t, state);
    std::vector<double> probs;
    probs.reserve(outcomes.size());
    for (const auto &o : outcomes) {
        probs.push_back(o.second);
    }
    return outcomes[CdfSampler(probs).sample(rng)].first;
}

EnergyEstimate estimate_energy(
    const LocalHamiltonian &h, const StateSource &source, std::uint64_t rounds, const RngStream &rng,
    EnergyMeasurement mode) {
    if (rounds == 0) {
        throw std::invalid_argument("estimate_energy needs at least one round");
    }
    TermSampler sampler(h, mode);
    double l = static_cast<double>(h.size());

    // Outcome tables are cached per distinct state object; strategies reuse
    // the same immutable state across rounds.
    struct Cached {
        std::shared_ptr<const StateVector> keep_alive;
        std::vector<std::optional<std::pair<std::vector<double>, CdfSampler>>> per_term;
    };
    std::map<const StateVector *, Cached> cache;

    double sum = 0, sum_sq = 0;
    for (std::uint64_t r = 0; r < rounds; r++) {
        auto state = source(r);
        if (!state || state->num_qubits() != h.num_qubits()) {
            throw std::invalid_argument("state source produced a state of the wrong width");
        }
        RngStream round_rng = substream(rng, r, Purpose::kVerifierMeasurement);
        int t = static_cast<int>(round_rng.below(static_cast<std::uint64_t>(h.size())));
        auto &entry = cache[state.get()];
        if (!entry.keep_alive) {
            entry.keep_alive = state;
            entry.per_term.resize(static_cast<size_t>(h.size()));
        }
        auto &slot = entry.per_term[static_cast<size_t>(t)];
        if (!slot) {
            auto outcomes = sampler.term_outcomes(t, *state);
            std::vector<double> values, probs;
            for (const auto &[v, p] : outcomes) {
                values.push_back(v);
                probs.push_back(p);
            }
            slot.emplace(std::move(values), CdfSampler(probs));
        }
        double value = l * slot->first[slot->second.sample(round_rng)];
        sum += value;
        sum_sq += value * value;
    }
    double n = static_cast<double>(rounds);
    double mean = sum / n;
    double var = rounds > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    double sigma = std::sqrt(var);
    return {mean, sigma, sigma / std::sqrt(n), rounds};
}

void to_json(nlohmann::json &j, const LocalTerm &t) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < t.matrix.rows(); r++) {
        for (Eigen::Index c = 0; c < t.matrix.cols(); c++) {
            m.push_back({t.matrix(r, c).real(), t.matrix(r, c).imag()});
        }
    }
    j = nlohmann::json{{"support", t.support}, {"matrix", m}, {"tag", term_tag_name(t.tag)}};
}

void to_json(nlohmann::json &j, const LocalHamiltonian &h) {
    j = nlohmann::json::array();
    for (const auto &t : h.terms()) {
        j.push_back(t);
    }
}

}  // namespace certsamp
