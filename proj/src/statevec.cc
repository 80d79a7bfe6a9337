#include "certsamp/statevec.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace certsamp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const Amplitude kI{0, 1};

Mat2 matrix_of(GateKind kind) {
    switch (kind) {
        case GateKind::kH:
            return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
        case GateKind::kX:
        case GateKind::kCNOT:
            return {0, 1, 1, 0};
        case GateKind::kZ:
            return {1, 0, 0, -1};
        case GateKind::kS:
            return {1, 0, 0, kI};
        case GateKind::kT:
            return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
        default:
            throw std::logic_error("gate kind has no fixed 2x2 matrix");
    }
}

int expected_arity(GateKind kind) {
    switch (kind) {
        case GateKind::kCNOT:
        case GateKind::kSWAP:
        case GateKind::kCU1:
            return 2;
        case GateKind::kCSWAP:
            return 3;
        default:
            return 1;
    }
}

void require_qubit_count(int q) {
    if (q < 1 || q > kMaxSimulatedQubits) {
        throw std::invalid_argument(
            "qubit count " + std::to_string(q) + " outside the simulation range 1.." +
            std::to_string(kMaxSimulatedQubits));
    }
}

double gaussian(RngStream &rng) {
    double u1 = 1.0 - rng.uniform();
    double u2 = rng.uniform();
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

}  // namespace

std::string gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::kH:
            return "H";
        case GateKind::kX:
            return "X";
        case GateKind::kZ:
            return "Z";
        case GateKind::kS:
            return "S";
        case GateKind::kT:
            return "T";
        case GateKind::kCNOT:
            return "CNOT";
        case GateKind::kSWAP:
            return "SWAP";
        case GateKind::kCSWAP:
            return "CSWAP";
        case GateKind::kU1:
            return "U1";
        case GateKind::kCU1:
            return "CU1";
    }
    throw std::logic_error("unknown gate kind");
}

GateKind gate_kind_from_name(const std::string &name) {
    for (auto k : {GateKind::kH, GateKind::kX, GateKind::kZ, GateKind::kS, GateKind::kT, GateKind::kCNOT,
                   GateKind::kSWAP, GateKind::kCSWAP, GateKind::kU1, GateKind::kCU1}) {
        if (gate_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown gate name '" + name + "'");
}

Gate Gate::h(int q) {
    return {GateKind::kH, {q}, matrix_of(GateKind::kH)};
}
Gate Gate::x(int q) {
    return {GateKind::kX, {q}, matrix_of(GateKind::kX)};
}
Gate Gate::z(int q) {
    return {GateKind::kZ, {q}, matrix_of(GateKind::kZ)};
}
Gate Gate::s(int q) {
    return {GateKind::kS, {q}, matrix_of(GateKind::kS)};
}
Gate Gate::t(int q) {
    return {GateKind::kT, {q}, matrix_of(GateKind::kT)};
}
Gate Gate::cnot(int control, int target) {
    return {GateKind::kCNOT, {control, target}, matrix_of(GateKind::kX)};
}
Gate Gate::swap(int a, int b) {
    return {GateKind::kSWAP, {a, b}, {}};
}
Gate Gate::cswap(int control, int a, int b) {
    return {GateKind::kCSWAP, {control, a, b}, {}};
}
Gate Gate::u1(int q, const Mat2 &m) {
    return {GateKind::kU1, {q}, m};
}
Gate Gate::cu1(int control, int target, const Mat2 &m) {
    return {GateKind::kCU1, {control, target}, m};
}

Gate Gate::adjoint() const {
    switch (kind) {
        case GateKind::kS:
        case GateKind::kT:
            return u1(qubits[0], mat2_adjoint(matrix));
        case GateKind::kU1:
        case GateKind::kCU1: {
            Gate g = *this;
            g.matrix = mat2_adjoint(matrix);
            return g;
        }
        default:
            return *this;
    }
}

Eigen::MatrixXcd Gate::unitary() const {
    auto m2 = [](const Mat2 &m) {
        Eigen::Matrix2cd u;
        u << m[0], m[1], m[2], m[3];
        return u;
    };
    switch (kind) {
        case GateKind::kSWAP: {
            Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
            u(0, 0) = u(1, 2) = u(2, 1) = u(3, 3) = 1;
            return u;
        }
        case GateKind::kCSWAP: {
            Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(8, 8);
            u(5, 5) = u(6, 6) = 0;
            u(5, 6) = u(6, 5) = 1;
            return u;
        }
        case GateKind::kCNOT:
        case GateKind::kCU1: {
            Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(4, 4);
            u.block(2, 2, 2, 2) = m2(matrix);
            return u;
        }
        default:
            return m2(matrix);
    }
}

Mat2 mat2_adjoint(const Mat2 &m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

bool is_unitary(const Mat2 &m, double tol) {
    for (double v : {m[0].real(), m[0].imag(), m[1].real(), m[1].imag(), m[2].real(), m[2].imag(), m[3].real(),
                     m[3].imag()}) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    Mat2 a = mat2_adjoint(m);
    Amplitude p00 = a[0] * m[0] + a[1] * m[2];
    Amplitude p01 = a[0] * m[1] + a[1] * m[3];
    Amplitude p10 = a[2] * m[0] + a[3] * m[2];
    Amplitude p11 = a[2] * m[1] + a[3] * m[3];
    return std::abs(p00 - 1.0) <= tol && std::abs(p11 - 1.0) <= tol && std::abs(p01) <= tol && std::abs(p10) <= tol;
}

Circuit::Circuit(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1) {
        throw std::invalid_argument("circuit needs at least one qubit");
    }
}

void Circuit::append(const Gate &gate) {
    if (gate.arity() != expected_arity(gate.kind)) {
        throw std::invalid_argument(gate_name(gate.kind) + " expects " + std::to_string(expected_arity(gate.kind)) +
                                    " qubits, got " + std::to_string(gate.arity()));
    }
    for (size_t i = 0; i < gate.qubits.size(); i++) {
        int q = gate.qubits[i];
        if (q < 0 || q >= num_qubits_) {
            throw std::invalid_argument(
                gate_name(gate.kind) + " qubit " + std::to_string(q) + " out of range for " +
                std::to_string(num_qubits_) + " qubits");
        }
        for (size_t k = 0; k < i; k++) {
            if (gate.qubits[k] == q) {
                throw std::invalid_argument(gate_name(gate.kind) + " repeats qubit " + std::to_string(q));
            }
        }
    }
    if ((gate.kind == GateKind::kU1 || gate.kind == GateKind::kCU1) && !is_unitary(gate.matrix)) {
        throw std::invalid_argument(gate_name(gate.kind) + " matrix is not unitary");
    }
    gates_.push_back(gate);
}

void Circuit::append(const Circuit &other) {
    if (other.num_qubits_ != num_qubits_) {
        throw std::invalid_argument("cannot append circuits of different widths");
    }
    for (const auto &g : other.gates_) {
        append(g);
    }
}

Circuit Circuit::remapped(std::span<const int> map, int new_num_qubits) const {
    if (map.size() != static_cast<size_t>(num_qubits_)) {
        throw std::invalid_argument("qubit map has the wrong length");
    }
    Circuit out(new_num_qubits);
    for (const auto &g : gates_) {
        Gate copy = g;
        for (int &q : copy.qubits) {
            q = map[static_cast<size_t>(q)];
        }
        out.append(copy);
    }
    return out;
}

Circuit random_circuit(int num_qubits, int num_gates, RngStream &rng) {
    Circuit c(num_qubits);
    int kinds = num_qubits >= 2 ? 6 : 5;
    for (int i = 0; i < num_gates; i++) {
        int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_qubits)));
        switch (rng.below(static_cast<std::uint64_t>(kinds))) {
            case 0:
                c.append(Gate::h(q));
                break;
            case 1:
                c.append(Gate::s(q));
                break;
            case 2:
                c.append(Gate::t(q));
                break;
            case 3:
                c.append(Gate::x(q));
                break;
            case 4: {
                // Random SU(2) from a normalized quaternion.
                double a = gaussian(rng), b = gaussian(rng), cc = gaussian(rng), d = gaussian(rng);
                double norm = std::sqrt(a * a + b * b + cc * cc + d * d);
                Amplitude alpha{a / norm, b / norm}, beta{cc / norm, d / norm};
                c.append(Gate::u1(q, {alpha, -std::conj(beta), beta, std::conj(alpha)}));
                break;
            }
            default: {
                int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_qubits - 1)));
                if (t >= q) {
                    t++;
                }
                c.append(Gate::cnot(q, t));
                break;
            }
        }
    }
    return c;
}

StateVector StateVector::basis(int num_qubits, std::uint64_t index) {
    require_qubit_count(num_qubits);
    std::uint64_t dim = std::uint64_t{1} << num_qubits;
    if (index >= dim) {
        throw std::invalid_argument("basis index out of range");
    }
    std::vector<Amplitude> amps(dim);
    amps[index] = 1;
    return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(int num_qubits, std::vector<Amplitude> amps) {
    require_qubit_count(num_qubits);
    if (amps.size() != (size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude vector must have length 2^q");
    }
    double total = 0;
    for (const auto &a : amps) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw std::invalid_argument("amplitude is not finite");
        }
        total += std::norm(a);
    }
    if (std::abs(total - 1) > kNormTolerance) {
        throw std::invalid_argument("state norm^2 is " + std::to_string(total) + ", expected 1");
    }
    return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::normalized(int num_qubits, std::vector<Amplitude> amps) {
    double total = 0;
    for (const auto &a : amps) {
        total += std::norm(a);
    }
    if (!(total >= 1e-24) || !std::isfinite(total)) {
        throw std::invalid_argument("cannot normalize a state of norm below 1e-12");
    }
    double scale = 1 / std::sqrt(total);
    for (auto &a : amps) {
        a *= scale;
    }
    return from_amplitudes(num_qubits, std::move(amps));
}

StateVector StateVector::random(int num_qubits, RngStream &rng) {
    require_qubit_count(num_qubits);
    std::vector<Amplitude> amps(size_t{1} << num_qubits);
    for (auto &a : amps) {
        double re = gaussian(rng);
        a = {re, gaussian(rng)};
    }
    return normalized(num_qubits, std::move(amps));
}

double StateVector::norm_squared() const {
    double total = 0;
    for (const auto &a : amps_) {
        total += std::norm(a);
    }
    return total;
}

void StateVector::apply_controlled_1q(std::uint64_t control_mask, int target, const Mat2 &m) {
    std::uint64_t t = qubit_mask(num_qubits_, target);
    for (std::uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & t) || (i & control_mask) != control_mask) {
            continue;
        }
        Amplitude a0 = amps_[i];
        Amplitude a1 = amps_[i | t];
        amps_[i] = m[0] * a0 + m[1] * a1;
        amps_[i | t] = m[2] * a0 + m[3] * a1;
    }
}

void StateVector::apply_controlled_swap(std::uint64_t control_mask, int a, int b) {
    std::uint64_t ma = qubit_mask(num_qubits_, a);
    std::uint64_t mb = qubit_mask(num_qubits_, b);
    for (std::uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & ma) && !(i & mb) && (i & control_mask) == control_mask) {
            std::swap(amps_[i], amps_[(i & ~ma) | mb]);
        }
    }
}

void StateVector::apply(const Gate &gate) {
    for (int q : gate.qubits) {
        if (q < 0 || q >= num_qubits_) {
            throw std::invalid_argument("gate qubit out of range");
        }
    }
    const auto &q = gate.qubits;
    switch (gate.kind) {
        case GateKind::kSWAP:
            apply_controlled_swap(0, q[0], q[1]);
            break;
        case GateKind::kCSWAP:
            apply_controlled_swap(qubit_mask(num_qubits_, q[0]), q[1], q[2]);
            break;
        case GateKind::kCNOT:
        case GateKind::kCU1:
            apply_controlled_1q(qubit_mask(num_qubits_, q[0]), q[1], gate.matrix);
            break;
        default:
            apply_controlled_1q(0, q[0], gate.matrix);
            break;
    }
}

StateVector apply_circuit(StateVector state, const Circuit &circuit) {
    if (circuit.num_qubits() != state.num_qubits()) {
        throw std::invalid_argument(
            "circuit acts on " + std::to_string(circuit.num_qubits()) + " qubits but the state has " +
            std::to_string(state.num_qubits()));
    }
    for (const auto &g : circuit.gates()) {
        if ((g.kind == GateKind::kU1 || g.kind == GateKind::kCU1) && !is_unitary(g.matrix)) {
            throw std::invalid_argument("non-unitary gate matrix");
        }
        state.apply(g);
    }
    return state;
}

Measurement measure(
    const StateVector &state, std::span<const int> qubits, std::span<const Basis> bases, RngStream &rng) {
    if (qubits.empty()) {
        throw std::invalid_argument("measure: empty qubit list");
    }
    if (bases.size() != qubits.size()) {
        throw std::invalid_argument("measure: one basis per measured qubit required");
    }
    int q = state.num_qubits();
    for (size_t i = 0; i < qubits.size(); i++) {
        if (qubits[i] < 0 || qubits[i] >= q) {
            throw std::invalid_argument("measure: qubit out of range");
        }
        for (size_t k = 0; k < i; k++) {
            if (qubits[k] == qubits[i]) {
                throw std::invalid_argument("measure: repeated qubit");
            }
        }
    }

    // Rotate each measured qubit so that its basis becomes Z.
    // X: H.  Y: H S†, which maps (|0⟩ + i|1⟩)/√2 to |0⟩.
    const Mat2 s_dag{1, 0, 0, -kI};
    const Mat2 s{1, 0, 0, kI};
    StateVector work = state;
    for (size_t i = 0; i < qubits.size(); i++) {
        if (bases[i] == Basis::kY) {
            work.apply(Gate::u1(qubits[i], s_dag));
        }
        if (bases[i] != Basis::kZ) {
            work.apply(Gate::h(qubits[i]));
        }
    }

    size_t k = qubits.size();
    auto outcome_of = [&](std::uint64_t index) {
        std::uint64_t out = 0;
        for (size_t i = 0; i < k; i++) {
            out = (out << 1) | static_cast<std::uint64_t>(bit_at(index, q, qubits[i]));
        }
        return out;
    };
    std::vector<double> probs(size_t{1} << k, 0.0);
    auto amps = work.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); i++) {
        probs[outcome_of(i)] += std::norm(amps[i]);
    }
    std::uint64_t bits = CdfSampler(probs).sample(rng);
    if (probs[bits] < 1e-24) {
        throw std::runtime_error("measure: selected branch has norm below 1e-12");
    }

    std::vector<Amplitude> projected(amps.begin(), amps.end());
    for (std::uint64_t i = 0; i < projected.size(); i++) {
        if (outcome_of(i) != bits) {
            projected[i] = 0;
        }
    }
    StateVector post = StateVector::normalized(q, std::move(projected));
    for (size_t i = 0; i < qubits.size(); i++) {
        if (bases[i] != Basis::kZ) {
            post.apply(Gate::h(qubits[i]));
        }
        if (bases[i] == Basis::kY) {
            post.apply(Gate::u1(qubits[i], s));
        }
    }
    return {bits, std::move(post)};
}

Measurement measure(const StateVector &state, std::span<const int> qubits, Basis basis, RngStream &rng) {
    std::vector<Basis> bases(qubits.size(), basis);
    return measure(state, qubits, bases, rng);
}

Distribution born_distribution(const StateVector &state) {
    std::map<std::uint64_t, double> mass;
    auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); i++) {
        double p = std::norm(amps[i]);
        if (p > 0) {
            mass.emplace_hint(mass.end(), i, p);
        }
    }
    return Distribution(state.num_qubits(), std::move(mass));
}

Distribution born_marginal(const StateVector &state, std::span<const int> qubits) {
    if (qubits.empty()) {
        throw std::invalid_argument("born_marginal: empty qubit list");
    }
    int q = state.num_qubits();
    std::map<std::uint64_t, double> mass;
    auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); i++) {
        double p = std::norm(amps[i]);
        if (p == 0) {
            continue;
        }
        std::uint64_t key = 0;
        for (int qb : qubits) {
            key = (key << 1) | static_cast<std::uint64_t>(bit_at(i, q, qb));
        }
        mass[key] += p;
    }
    return Distribution(static_cast<int>(qubits.size()), std::move(mass));
}

StateVector from_distribution(const Distribution &d) {
    require_qubit_count(d.num_bits());
    std::vector<Amplitude> amps(size_t{1} << d.num_bits());
    for (const auto &[x, p] : d.mass()) {
        amps[x] = std::sqrt(p);
    }
    return StateVector::normalized(d.num_bits(), std::move(amps));
}

StateVector from_distribution(const Distribution &d, const StateVector &phase_reference) {
    if (phase_reference.num_qubits() != d.num_bits()) {
        throw std::invalid_argument("from_distribution: phase reference has the wrong width");
    }
    require_qubit_count(d.num_bits());
    std::vector<Amplitude> amps(size_t{1} << d.num_bits());
    for (const auto &[x, p] : d.mass()) {
        Amplitude r = phase_reference[x];
        amps[x] = std::abs(r) > 0 ? std::sqrt(p) * r / std::abs(r) : Amplitude(std::sqrt(p));
    }
    return StateVector::normalized(d.num_bits(), std::move(amps));
}

Amplitude inner_product(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("inner_product: qubit count mismatch");
    }
    Amplitude sum = 0;
    auto x = a.amplitudes();
    auto y = b.amplitudes();
    for (size_t i = 0; i < x.size(); i++) {
        sum += std::conj(x[i]) * y[i];
    }
    return sum;
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    int q = a.num_qubits() + b.num_qubits();
    require_qubit_count(q);
    std::vector<Amplitude> amps;
    amps.reserve(size_t{1} << q);
    for (auto x : a.amplitudes()) {
        for (auto y : b.amplitudes()) {
            amps.push_back(x * y);
        }
    }
    return StateVector::normalized(q, std::move(amps));
}

Eigen::MatrixXcd reduced_density(const StateVector &state, std::span<const int> support) {
    int q = state.num_qubits();
    size_t k = support.size();
    std::uint64_t support_mask = 0;
    std::vector<std::uint64_t> offsets(size_t{1} << k, 0);
    for (size_t i = 0; i < k; i++) {
        std::uint64_t m = qubit_mask(q, support[i]);
        if (support_mask & m) {
            throw std::invalid_argument("reduced_density: repeated qubit");
        }
        support_mask |= m;
    }
    for (std::uint64_t s = 0; s < offsets.size(); s++) {
        for (size_t i = 0; i < k; i++) {
            if ((s >> (k - 1 - i)) & 1) {
                offsets[s] |= qubit_mask(q, support[i]);
            }
        }
    }
    auto amps = state.amplitudes();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(offsets.size()),
                                                  static_cast<Eigen::Index>(offsets.size()));
    Eigen::VectorXcd v(static_cast<Eigen::Index>(offsets.size()));
    for (std::uint64_t r = 0; r < amps.size(); r++) {
        if (r & support_mask) {
            continue;
        }
        bool any = false;
        for (size_t s = 0; s < offsets.size(); s++) {
            v(static_cast<Eigen::Index>(s)) = amps[r | offsets[s]];
            any = any || amps[r | offsets[s]] != Amplitude{0};
        }
        if (any) {
            rho.noalias() += v * v.adjoint();
        }
    }
    return rho;
}

CdfSampler::CdfSampler(std::span<const double> probs) {
    if (probs.empty()) {
        throw std::invalid_argument("CdfSampler: empty probability vector");
    }
    cdf_.reserve(probs.size());
    double acc = 0;
    for (double p : probs) {
        acc += std::max(0.0, p);
        cdf_.push_back(acc);
    }
    if (!(acc > 0)) {
        throw std::invalid_argument("CdfSampler: zero total mass");
    }
}

std::uint64_t CdfSampler::sample(RngStream &rng) const {
    double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it != cdf_.end()) {
        return static_cast<std::uint64_t>(it - cdf_.begin());
    }
    // Rounding put u on the total; return the last bin with positive width.
    std::uint64_t index = cdf_.size() - 1;
    while (index > 0 && cdf_[index] == cdf_[index - 1]) {
        index--;
    }
    return index;
}

void to_json(nlohmann::json &j, const Gate &g) {
    j = nlohmann::json{{"g", gate_name(g.kind)}};
    bool controlled = g.kind == GateKind::kCNOT || g.kind == GateKind::kCSWAP || g.kind == GateKind::kCU1;
    std::vector<int> targets(g.qubits.begin() + (controlled ? 1 : 0), g.qubits.end());
    if (controlled) {
        j["c"] = g.qubits[0];
    }
    j["q"] = targets;
    if (g.kind == GateKind::kU1 || g.kind == GateKind::kCU1) {
        nlohmann::json m = nlohmann::json::array();
        for (const auto &a : g.matrix) {
            m.push_back({a.real(), a.imag()});
        }
        j["m"] = m;
    }
}

Gate gate_from_json(const nlohmann::json &j) {
    GateKind kind = gate_kind_from_name(j.at("g").get<std::string>());
    Gate g{kind, {}, {}};
    if (j.contains("c")) {
        g.qubits.push_back(j.at("c").get<int>());
    }
    for (const auto &q : j.at("q")) {
        g.qubits.push_back(q.get<int>());
    }
    if (kind == GateKind::kU1 || kind == GateKind::kCU1) {
        const auto &m = j.at("m");
        if (!m.is_array() || m.size() != 4) {
            throw std::invalid_argument("gate matrix must list 4 [re, im] entries");
        }
        for (size_t i = 0; i < 4; i++) {
            g.matrix[i] = {m[i].at(0).get<double>(), m[i].at(1).get<double>()};
        }
    } else if (kind != GateKind::kSWAP && kind != GateKind::kCSWAP) {
        g.matrix = matrix_of(kind);
    }
    return g;
}

void to_json(nlohmann::json &j, const Circuit &c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto &g : c.gates()) {
        gates.push_back(g);
    }
    j = nlohmann::json{{"qubits", c.num_qubits()}, {"gates", gates}};
}

Circuit circuit_from_json(const nlohmann::json &j) {
    Circuit c(j.at("qubits").get<int>());
    for (const auto &g : j.at("gates")) {
        c.append(gate_from_json(g));
    }
    return c;
}

}  // namespace certsamp
