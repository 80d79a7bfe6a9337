#include "certsamp/suites.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "certsamp/bits.h"
#include "certsamp/chamiltonian.h"
#include "certsamp/clawfree.h"
#include "certsamp/compare.h"
#include "certsamp/oracles.h"
#include "certsamp/protocols.h"
#include "certsamp/provers.h"

namespace certsamp::suites {

namespace {

std::uint64_t scaled(std::uint64_t base, const SuiteOptions &o) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(base) * o.scale)));
}

Check at_most(std::string name, double measured, double bound) {
    return {std::move(name), measured <= bound, measured, bound, "<="};
}

Check at_least(std::string name, double measured, double bound) {
    return {std::move(name), measured >= bound, measured, bound, ">="};
}

Check equal(std::string name, double measured, double expected) {
    return {std::move(name), measured == expected, measured, expected, "=="};
}

// ⟨a|b⟩ written out here so the law check does not reuse the library's.
std::complex<double> overlap(const StateVector &a, const StateVector &b) {
    std::complex<double> s = 0;
    for (std::uint64_t i = 0; i < a.dim(); i++) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

Mat2 ry(double theta) {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return Mat2{Amplitude(c), Amplitude(-s), Amplitude(s), Amplitude(c)};
}

double split_angle(double p_first, double total) {
    if (total <= 0) {
        return 0;
    }
    return 2 * std::acos(std::sqrt(std::clamp(p_first / total, 0.0, 1.0)));
}

Circuit random_payload(int n, int t, RngStream &rng) {
    return random_circuit(n, t, rng);
}

}  // namespace

Distribution random_distribution(int n, RngStream &rng) {
    std::uint64_t dim = std::uint64_t{1} << n;
    std::vector<double> w(dim);
    bool sparse = rng.below(3) == 0;
    double total = 0;
    for (auto &x : w) {
        x = (sparse && rng.bit()) ? 0.0 : -std::log(1 - rng.uniform());
        total += x;
    }
    if (total <= 0) {
        w[rng.below(dim)] = 1;
        total = 1;
    }
    for (auto &x : w) {
        x /= total;
    }
    return Distribution::from_dense(n, w);
}

Distribution at_distance(const Distribution &base, const Distribution &other, double d) {
    if (d <= 0) {
        return base;
    }
    std::vector<double> b = base.dense(), o = other.dense();
    auto along = [&](double t) {
        std::vector<double> m(b.size());
        for (size_t i = 0; i < m.size(); i++) {
            m[i] = (1 - t) * b[i] + t * o[i];
        }
        double s = 0;
        for (double x : m) {
            s += x;
        }
        for (double &x : m) {
            x /= s;
        }
        return Distribution::from_dense(base.num_bits(), m);
    };
    if (hellinger(base, other) < d) {
        size_t least = static_cast<size_t>(std::min_element(b.begin(), b.end()) - b.begin());
        double reach = hellinger(base, Distribution::point(base.num_bits(), least));
        if (d < reach) {
            return toward_distance(base, d);
        }
        // Unreachable on either segment: return the farthest point available.
        return hellinger(base, other) >= reach ? other : toward_distance(base, reach * (1 - 1e-12));
    }
    double lo = 0, hi = 1;
    for (int it = 0; it < 200; it++) {
        double mid = (lo + hi) / 2;
        (hellinger(base, along(mid)) < d ? lo : hi) = mid;
    }
    return along((lo + hi) / 2);
}

Circuit preparation_circuit(const Distribution &d) {
    int n = d.num_bits();
    if (n < 1 || n > 2) {
        throw std::invalid_argument("preparation_circuit supports one or two qubits");
    }
    std::vector<double> p = d.dense();
    Circuit c(n);
    if (n == 1) {
        c.append(Gate::u1(0, ry(split_angle(p[0], 1))));
        return c;
    }
    double a0 = p[0] + p[1], a1 = p[2] + p[3];
    c.append(Gate::u1(0, ry(split_angle(a0, 1))));
    c.append(Gate::x(0));
    c.append(Gate::cu1(0, 1, ry(split_angle(p[0], a0))));
    c.append(Gate::x(0));
    c.append(Gate::cu1(0, 1, ry(split_angle(p[2], a1))));
    return c;
}

std::string format_check(const Check &c) {
    char buf[256];
    std::snprintf(
        buf, sizeof buf, "%s %s measured=%.6g bound%s%.6g", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured,
        c.relation.c_str(), c.bound);
    return buf;
}

std::vector<Check> swap_suite(const SuiteOptions &o) {
    RngStream rng(o.seed);
    std::vector<Check> out;
    double law = 0, dense = 0, decomposed = 0;
    std::uint64_t instances = scaled(200, o);
    for (std::uint64_t i = 0; i < instances; i++) {
        RngStream r = rng.substream(i, 1);
        int n = 1 + static_cast<int>(r.below(3));
        int t = static_cast<int>(r.below(5));
        Circuit c = random_payload(n, t, r);
        StateVector psi_a = StateVector::random(n, r);
        StateVector psi_c = payload_state(c);
        ComparisonCircuit g = build_comparison(c);
        double exact = accept_probability_exact(g, psi_a);
        double expected = 0.5 * (1 + std::norm(overlap(psi_a, psi_c)));
        law = std::max(law, std::abs(exact - expected));
        if (i % 4 == 0) {
            StateVector input = comparison_input(psi_a);
            dense = std::max(dense, std::abs(oracle::out_one_probability(g.gates, input) - expected));
            ComparisonCircuit g2 = build_comparison(c, true);
            decomposed = std::max(decomposed, std::abs(oracle::out_one_probability(g2.gates, input) - expected));
        }
    }
    out.push_back(at_most("swap.random_circuit_law", law, 1e-9));
    out.push_back(at_most("swap.dense_unitary_oracle", dense, 1e-9));
    out.push_back(at_most("swap.decomposed_unitary_oracle", decomposed, 1e-9));

    double dist_law = 0, prep = 0;
    for (std::uint64_t i = 0; i < instances; i++) {
        RngStream r = rng.substream(i, 2);
        int n = 1 + static_cast<int>(r.below(2));
        Distribution dc = random_distribution(n, r);
        Distribution da = random_distribution(n, r);
        Circuit c = preparation_circuit(dc);
        StateVector psi_c = payload_state(c);
        prep = std::max(prep, std::abs(1 - std::abs(overlap(psi_c, from_distribution(dc)))));
        double exact = accept_probability_exact(build_comparison(c), from_distribution(da));
        dist_law = std::max(dist_law, std::abs(exact - swap_accept_from_hellinger(hellinger(da, dc))));
    }
    out.push_back(at_most("swap.preparation_circuit_fidelity", prep, 1e-9));
    out.push_back(at_most("swap.distribution_state_law", dist_law, 1e-9));

    double roundtrip = 0;
    for (int k = 1; k <= 1000; k++) {
        double x = k / 1000.0;
        roundtrip = std::max(roundtrip, std::abs(hellinger_from_swap_accept(swap_accept_from_hellinger(x)) - x));
    }
    out.push_back(at_most("swap.f_inverse_roundtrip", roundtrip, 1e-7));
    return out;
}

std::vector<Check> metric_checks(const SuiteOptions &o) {
    RngStream rng(o.seed ^ 0x5eed);
    double identity = 0, lower = -1, upper = -1;
    std::uint64_t pairs = scaled(1000, o);
    for (std::uint64_t i = 0; i < pairs; i++) {
        RngStream r = rng.substream(i);
        int n = 1 + static_cast<int>(r.below(4));
        Distribution p = random_distribution(n, r), q = random_distribution(n, r);
        double dh = hellinger(p, q), tv = total_variation(p, q);
        double bc = 0;
        for (const auto &[x, px] : p.mass()) {
            bc += std::sqrt(px * q(x));
        }
        identity = std::max(identity, std::abs(1 - dh * dh - bc));
        lower = std::max(lower, dh * dh - tv);
        upper = std::max(upper, tv - std::sqrt(2.0) * dh);
    }
    return {at_most("metric.hellinger_bhattacharyya_identity", identity, 1e-10),
            at_most("metric.squared_hellinger_below_tv", lower, 1e-10),
            at_most("metric.tv_below_sqrt2_hellinger", upper, 1e-10)};
}

std::vector<Check> reduction_suite(const SuiteOptions &o) {
    RngStream rng(o.seed ^ 0x4ed);
    std::vector<Check> out;

    // Comparison system, n = 1, T = 1, two-qubit decomposed.
    double energy = 0, clock = 0, adv = 0, swap_law = 0, dense = 0;
    int tp_seen = 0;
    std::uint64_t instances = scaled(50, o);
    for (std::uint64_t i = 0; i < instances; i++) {
        RngStream r = rng.substream(i, 1);
        Circuit c = random_payload(1, 1, r);
        ComparisonCircuit g = build_comparison(c, true);
        LocalHamiltonian h = build_hamiltonian(g);
        HistoryLayout lay = history_layout(g);
        Distribution da = random_distribution(1, r);
        StateVector psi = i % 2 == 0 ? from_distribution(da) : StateVector::random(1, r);
        StateVector hist = history_state(g, psi);
        energy = std::max(energy, std::abs(energy_exact(h, hist)));
        tp_seen = lay.t_prime;
        int nq = lay.num_qubits();

        std::vector<double> clock_mass(static_cast<size_t>(lay.t_prime + 1));
        std::vector<double> adv0(2);
        double at_end = 0, out_one_end = 0;
        for (std::uint64_t idx = 0; idx < hist.dim(); idx++) {
            double pr = std::norm(hist[idx]);
            if (pr == 0) {
                continue;
            }
            int ones = 0;
            bool unary = true;
            for (int k = 1; k <= lay.t_prime; k++) {
                int b = static_cast<int>((idx >> (nq - 1 - k)) & 1);
                if (b && ones != k - 1) {
                    unary = false;
                }
                ones += b;
            }
            if (!unary) {
                clock = std::max(clock, 1.0);
                continue;
            }
            clock_mass[static_cast<size_t>(ones)] += pr;
            std::uint64_t out_bit = idx >> (nq - 1);
            std::uint64_t aux_bit = idx & 1;
            std::uint64_t adv_bit = (idx >> 1) & 1;
            if (ones == 0 && out_bit == 0 && aux_bit == 0) {
                adv0[adv_bit] += pr;
            }
            if (ones == lay.t_prime) {
                at_end += pr;
                out_one_end += static_cast<double>(out_bit) * pr;
            }
        }
        for (double m : clock_mass) {
            clock = std::max(clock, std::abs(m - 1.0 / (lay.t_prime + 1)));
        }
        double z = adv0[0] + adv0[1];
        for (int a = 0; a < 2; a++) {
            adv = std::max(adv, std::abs(adv0[static_cast<size_t>(a)] / z - std::norm(psi[static_cast<std::uint64_t>(a)])));
        }
        double expected = 0.5 * (1 + std::norm(overlap(psi, payload_state(c))));
        swap_law = std::max(swap_law, std::abs(out_one_end / at_end - expected));
        if (i < 10) {
            StateVector ref = oracle::history_state_dense(g.gates, 1, psi);
            for (std::uint64_t idx = 0; idx < hist.dim(); idx++) {
                dense = std::max(dense, std::abs(hist[idx] - ref[idx]));
            }
        }
    }
    out.push_back(at_most("reduction.history_energy_zero", energy, 1e-9));
    out.push_back(at_most("reduction.clock_uniform_1/(T'+1)", clock, 1e-10));
    out.push_back(at_most("reduction.conditional_adv_equals_input", adv, 1e-10));
    out.push_back(at_most("reduction.conditional_out_swap_law", swap_law, 1e-10));
    out.push_back(at_most("reduction.history_state_dense_oracle", dense, 1e-12));

    // Real H_G: clock-legal block, from library terms and from the definition.
    {
        RngStream r = rng.substream(0, 2);
        Circuit c = random_payload(1, 1, r);
        ComparisonCircuit g = build_comparison(c, true);
        LocalHamiltonian h = build_hamiltonian(g);
        HistoryLayout lay = history_layout(g);
        out.push_back(equal("reduction.comparison_t_prime", g.t_prime(), 11));
        out.push_back(equal("reduction.term_count_L", h.size(), lay.n + 1 + 2 * lay.t_prime - 1));
        out.push_back(at_most("reduction.locality", h.locality(), 5));
        double psd = 0;
        for (const auto &t : h.terms()) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t.matrix);
            psd = std::max(psd, -es.eigenvalues().minCoeff());
        }
        out.push_back(at_most("reduction.terms_psd", psd, 1e-12));
        std::vector<std::uint64_t> legal = oracle::legal_clock_indices(lay.n, lay.t_prime);
        auto lib_ops = oracle::operators(h);
        auto def_ops = oracle::kitaev_terms(g.gates, lay.n);
        Eigen::MatrixXcd lib = oracle::block(lib_ops, lay.num_qubits(), legal);
        Eigen::MatrixXcd def = oracle::block(def_ops, lay.num_qubits(), legal);
        out.push_back(at_most("reduction.block_matches_definition", (lib - def).cwiseAbs().maxCoeff(), 1e-12));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lib);
        const auto &ev = es.eigenvalues();
        int null_dim = 0;
        for (Eigen::Index k = 0; k < ev.size(); k++) {
            null_dim += ev(k) < 1e-9 ? 1 : 0;
        }
        out.push_back(at_most("reduction.block_min_eigenvalue_abs", std::abs(ev.minCoeff()), 1e-9));
        out.push_back(equal("reduction.block_null_dimension", null_dim, 1 << lay.n));
    }
    (void)tp_seen;

    // Generic circuit on 2n+1 = 3 qubits with T' = 7: full dense spectrum.
    {
        RngStream r = rng.substream(0, 3);
        int n = 1, tp = 7;
        Circuit g(2 * n + 1);
        while (g.size() < tp) {
            Circuit step = random_circuit(2 * n + 1, 1, r);
            g.append(step);
        }
        LocalHamiltonian h = build_hamiltonian(g, n);
        int nq = 2 * n + 1 + tp;
        auto lib_ops = oracle::operators(h);
        auto def_ops = oracle::kitaev_terms(g, n);
        Eigen::MatrixXcd lib = oracle::dense_sum(lib_ops, nq);
        Eigen::MatrixXcd def = oracle::dense_sum(def_ops, nq);
        out.push_back(at_most("reduction.dense_matches_definition", (lib - def).cwiseAbs().maxCoeff(), 1e-12));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lib, Eigen::EigenvaluesOnly);
        const auto &ev = es.eigenvalues();
        int null_dim = 0;
        for (Eigen::Index k = 0; k < ev.size(); k++) {
            null_dim += ev(k) < 1e-9 ? 1 : 0;
        }
        out.push_back(at_most("reduction.dense_min_eigenvalue_abs", std::abs(ev.minCoeff()), 1e-9));
        out.push_back(equal("reduction.dense_null_dimension", null_dim, 1 << n));
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < ev.size(); k++) {
            if (ev(k) >= 1e-9) {
                gap = std::min(gap, ev(k));
            }
        }
        out.push_back(at_least("reduction.dense_spectral_gap", gap, 1e-6));
    }
    return out;
}

std::vector<Check> mixture_suite(const SuiteOptions &o) {
    std::vector<Check> out = metric_checks(o);
    RngStream rng(o.seed ^ 0x313);
    std::uint64_t instances = scaled(100000, o);
    double worst_excess = -1, worst_ratio = 0, hypothesis_gap = 0;
    std::uint64_t non_vacuous = 0;
    for (std::uint64_t i = 0; i < instances; i++) {
        RngStream r = rng.substream(i);
        int n = 1 + static_cast<int>(r.below(3));
        double eta = std::exp(std::log(1e-12) + r.uniform() * (std::log(1e-4) - std::log(1e-12)));
        double budget = 50 * eta * eta;
        Distribution dc = random_distribution(n, r);
        int k = 1 + static_cast<int>(r.below(5));
        std::vector<double> q(static_cast<size_t>(k)), e(static_cast<size_t>(k));
        double qs = 0;
        for (auto &x : q) {
            x = -std::log(1 - r.uniform());
            qs += x;
        }
        for (auto &x : q) {
            x /= qs;
        }
        if (r.bit()) {
            // Spend the whole budget on one far component with a tiny weight.
            size_t bad = static_cast<size_t>(r.below(static_cast<std::uint64_t>(k)));
            double wbad = std::min(0.5, budget / 0.5);
            double rest = 1 - q[bad];
            for (size_t j = 0; j < q.size(); j++) {
                q[j] = j == bad ? wbad : q[j] * (1 - wbad) / rest;
                e[j] = j == bad ? 0.5 : 0.0;
            }
            if (k == 1) {
                q[0] = 1;
                e[0] = std::min(0.5, budget);
            }
        } else {
            double weighted = 0;
            for (size_t j = 0; j < e.size(); j++) {
                e[j] = r.uniform();
                weighted += q[j] * e[j];
            }
            double v = r.uniform();
            for (auto &x : e) {
                x = std::min(0.5, x * budget * v / weighted);
            }
        }
        std::vector<std::pair<double, Distribution>> parts;
        double hyp = 0;
        for (size_t j = 0; j < q.size(); j++) {
            double d = hellinger_from_swap_accept(1 - e[j]);
            Distribution dj = at_distance(dc, random_distribution(n, r), d);
            hyp += q[j] * swap_accept_from_hellinger(hellinger(dj, dc));
            parts.emplace_back(q[j], dj);
        }
        double eta_eff = std::max(eta, std::sqrt(std::max(0.0, 1 - hyp) / 50));
        hypothesis_gap = std::max(hypothesis_gap, eta_eff / eta - 1);
        double dmix = hellinger(mix(parts), dc);
        double bound = 12 * std::pow(eta_eff, 0.25);
        non_vacuous += bound < 1 ? 1 : 0;
        worst_excess = std::max(worst_excess, dmix - bound);
        worst_ratio = std::max(worst_ratio, dmix / std::pow(eta_eff, 0.25));
    }
    out.push_back(at_most("mixture.max_excess_over_12eta^(1/4)", worst_excess, 0));
    out.push_back(at_most("mixture.max_ratio_dH/eta^(1/4)", worst_ratio, 12));
    out.push_back(at_least("mixture.non_vacuous_fraction", static_cast<double>(non_vacuous) / instances, 0.5));

    double grid = 0;
    for (int k = 1; k <= 10; k++) {
        double eta = 0.01 * k;
        grid = std::max(grid, hellinger_from_swap_accept(1 - 3 * eta * eta) / (10 * eta));
    }
    out.push_back(at_most("mixture.soundness_helper_ratio", grid, 1));
    return out;
}

std::vector<Check> estimator_suite(const SuiteOptions &o) {
    RngStream rng(o.seed ^ 0xe57);
    std::vector<Check> out;
    out.push_back(equal("estimator.rounds_needed(0.1,0.05)", static_cast<double>(rounds_needed(0.1, 0.05)), 738));
    {
        std::uint64_t trials = scaled(1000, o), covered = 0;
        for (std::uint64_t t = 0; t < trials; t++) {
            RngStream r = rng.substream(t, 1);
            std::uint64_t heads = 0;
            for (int i = 0; i < 738; i++) {
                heads += static_cast<std::uint64_t>(r.bit());
            }
            covered += std::abs(heads / 738.0 - 0.5) <= 0.1 ? 1 : 0;
        }
        out.push_back(at_least("estimator.coin_coverage", static_cast<double>(covered) / trials, 0.95));
    }
    Thresholds th = thresholds(0.1, 5);
    out.push_back(at_most("estimator.threshold_arithmetic", std::abs(th.p_min - 0.98) + std::abs(th.energy_max - 4e-5), 1e-15));

    // Sampled energy on the comparison history system.
    RngStream r = rng.substream(0, 2);
    Circuit c = random_payload(1, 1, r);
    ComparisonCircuit g = build_comparison(c, true);
    LocalHamiltonian h = build_hamiltonian(g);
    StateVector psi = StateVector::random(1, r);
    auto honest = std::make_shared<const StateVector>(history_state(g, psi));
    auto bad = HistoryProver::corrupted(g, psi, 0.5, Corruption::kInputViolation).states().front();
    std::uint64_t rounds = scaled(20000, o);
    for (EnergyMeasurement mode : {EnergyMeasurement::kEigenbasis, EnergyMeasurement::kPauliSampling}) {
        std::string tag = energy_measurement_name(mode);
        EnergyEstimate e0 = estimate_energy(h, [&](std::uint64_t) { return honest; }, rounds, r.substream(1), mode);
        out.push_back(at_most(
            "estimator.honest_energy_" + tag + "_sigmas", std::abs(e0.mean) / std::max(e0.standard_error, 1e-300), 5));
        if (mode == EnergyMeasurement::kEigenbasis) {
            out.push_back(at_most("estimator.honest_energy_eigenbasis_abs", std::abs(e0.mean), 1e-9));
        }
        EnergyEstimate e1 = estimate_energy(h, [&](std::uint64_t) { return bad; }, rounds, r.substream(2), mode);
        double exact = energy_exact(h, *bad);
        out.push_back(at_most(
            "estimator.corrupted_energy_" + tag + "_sigmas", std::abs(e1.mean - exact) / e1.standard_error, 5));
    }

    // Classical γ estimator against the dense Pauli oracle.
    double worst = 0;
    for (int inst = 0; inst < 10; inst++) {
        RngStream ri = rng.substream(static_cast<std::uint64_t>(inst), 3);
        int nq = 2 + static_cast<int>(ri.below(3));
        XZHamiltonian xz{nq, {}, std::nullopt};
        int terms = 1 + static_cast<int>(ri.below(5));
        for (int t = 0; t < terms; t++) {
            Pauli letter = ri.bit() ? Pauli::kZ : Pauli::kX;
            PauliString p{2 * ri.uniform() - 1, {}};
            for (int q = 0; q < nq; q++) {
                if (ri.bit()) {
                    p.letters.emplace_back(q, letter);
                }
            }
            if (p.letters.empty()) {
                p.letters.emplace_back(static_cast<int>(ri.below(static_cast<std::uint64_t>(nq))), letter);
            }
            xz.terms.push_back(p);
        }
        xz.terms.push_back(PauliString{0.25, {}});
        StateVector state = StateVector::random(nq, ri);
        double exact = 0;
        for (const auto &p : xz.terms) {
            exact += p.letters.empty() ? p.coefficient : oracle::pauli_expectation(p, state);
        }
        ProtocolParams params;
        params.rounds_override = scaled(30000, o);
        params.seed = ri.next_u64();
        Verdict v = run_classical(xz, params, 3, ClassicalProver::honest(state));
        double se = v.energy_sigma / std::sqrt(static_cast<double>(v.n1));
        worst = std::max(worst, std::abs(v.energy_estimate - exact) / se);
    }
    out.push_back(at_most("estimator.classical_gamma_random_xz_sigmas", worst, 5));
    {
        XZHamiltonian zz{2, {PauliString{-1, {{0, Pauli::kZ}, {1, Pauli::kZ}}}}, std::nullopt};
        ProtocolParams params;
        params.rounds_override = scaled(300000, o);
        params.seed = rng.substream(0, 4).next_u64();
        Verdict v = run_classical(zz, params, 3, ClassicalProver::honest(StateVector::basis(2, 0)));
        double se = v.energy_sigma / std::sqrt(static_cast<double>(v.n1));
        out.push_back(at_most("estimator.classical_gamma_minus_zz_sigmas", std::abs(v.energy_estimate + 1) / se, 4));
    }
    return out;
}

std::vector<Check> clawfree_suite(const SuiteOptions &o) {
    RngStream rng(o.seed ^ 0xc1a);
    std::vector<Check> out;
    {
        std::uint64_t bad = 0;
        for (int m = 1; m <= 6; m++) {
            for (int k = 0; k < 20; k++) {
                RngStream r = rng.substream(static_cast<std::uint64_t>(m * 100 + k), 1);
                KeyPair kp = gen(m, r);
                for (std::uint64_t x = 0; x < (std::uint64_t{1} << m); x++) {
                    std::uint64_t y = eval(kp.pk, 0, x);
                    bad += eval(kp.pk, 1, x ^ kp.td.s) != y;
                    bad += invert(kp.td, m, y, 0) != encode_preimage(m, 0, x);
                    bad += invert(kp.td, m, y, 1) != encode_preimage(m, 1, x ^ kp.td.s);
                }
                bad += claw_sum(kp.td, m) != ((std::uint64_t{1} << m) | kp.td.s);
                bad += recover_shift(kp.pk) != kp.td.s;
            }
        }
        out.push_back(equal("clawfree.claw_structure_failures", static_cast<double>(bad), 0));
    }
    {
        // Honest preimage responses on the comparison history state.
        RngStream r = rng.substream(0, 2);
        ComparisonCircuit g = build_comparison(random_payload(1, 1, r), true);
        StateVector logical = history_state(g, StateVector::random(1, r));
        ClassicalProver prover = ClassicalProver::honest(logical);
        std::uint64_t rounds = scaled(100000, o), checks = 0, failures = 0;
        std::vector<PublicKey> pks(static_cast<size_t>(logical.num_qubits()));
        std::vector<KeyPair> keys(pks.size());
        for (std::uint64_t t = 0; t < rounds; t++) {
            RngStream rt = r.substream(t, 3);
            for (size_t i = 0; i < pks.size(); i++) {
                keys[i] = gen(3, rt);
                pks[i] = keys[i].pk;
            }
            auto y = prover.commit(pks, rt);
            auto resp = prover.respond(pks, y, 0, rt);
            for (size_t i = 0; i < pks.size(); i++) {
                checks++;
                failures += verify_response(pks[i], keys[i].td, y[i], 0, resp.responses[i]).ok ? 0 : 1;
            }
        }
        out.push_back(equal("clawfree.honest_preimage_failures", static_cast<double>(failures), 0));
        out.push_back(at_least("clawfree.preimage_checks_performed", static_cast<double>(checks), 0.5 * rounds));
    }
    {
        double worst = 0, bias = 0, tv_worst = 0;
        for (int m = 1; m <= 4; m++) {
            for (int k = 1; k <= 2; k++) {
                RngStream r = rng.substream(static_cast<std::uint64_t>(m * 10 + k), 4);
                StateVector logical = StateVector::random(k, r);
                std::vector<std::uint64_t> shifts;
                std::vector<std::uint64_t> claws;
                for (int i = 0; i < k; i++) {
                    shifts.push_back(1 + r.below((std::uint64_t{1} << m) - 1));
                    claws.push_back((std::uint64_t{1} << m) | shifts.back());
                }
                oracle::BlockOracle ref = oracle::hadamard_block_oracle(logical, shifts, m);
                bias = std::max(bias, ref.max_image_bias);
                // The prover's model: logical X outcome o, then d uniform on
                // the coset d·claw_i = o_i in every block.
                StateVector hx = hadamard_all(logical);
                int width = m + 1;
                std::uint64_t total = std::uint64_t{1} << (k * width);
                std::vector<double> model(total);
                for (std::uint64_t d = 0; d < total; d++) {
                    std::uint64_t ox = 0;
                    for (int i = 0; i < k; i++) {
                        std::uint64_t di = (d >> ((k - 1 - i) * width)) & ((std::uint64_t{1} << width) - 1);
                        ox = (ox << 1) | static_cast<std::uint64_t>(parity(di & claws[static_cast<size_t>(i)]));
                    }
                    model[d] = std::norm(hx[ox]) / std::pow(2.0, k * m);
                }
                for (std::uint64_t d = 0; d < total; d++) {
                    auto it = ref.d_distribution.find(d);
                    worst = std::max(worst, std::abs(model[d] - (it == ref.d_distribution.end() ? 0.0 : it->second)));
                }
                // Empirical responses of the prover itself.
                ClassicalProver prover = ClassicalProver::honest(logical);
                std::vector<PublicKey> pks;
                for (int i = 0; i < k; i++) {
                    pks.push_back(PublicKey{m, 0, shifts[static_cast<size_t>(i)]});
                }
                std::uint64_t draws = scaled(20000, o);
                std::vector<double> counts(total);
                for (std::uint64_t t = 0; t < draws; t++) {
                    RngStream rt = r.substream(t, 5);
                    auto y = prover.commit(pks, rt);
                    auto resp = prover.respond(pks, y, 1, rt);
                    std::uint64_t d = 0;
                    for (auto v : resp.responses) {
                        d = (d << width) | v;
                    }
                    counts[d] += 1.0 / static_cast<double>(draws);
                }
                double tv = 0;
                for (std::uint64_t d = 0; d < total; d++) {
                    tv += 0.5 * std::abs(counts[d] - model[d]);
                }
                // Expected sampling TV is about √(support/draws)/2.
                tv_worst = std::max(tv_worst, tv / std::sqrt(static_cast<double>(total) / draws));
            }
        }
        out.push_back(at_most("clawfree.block_oracle_exact_match", worst, 1e-12));
        out.push_back(at_most("clawfree.block_oracle_image_bias", bias, 1e-12));
        out.push_back(at_most("clawfree.empirical_responses_tv_over_sqrt(support/draws)", tv_worst, 1.0));
    }
    {
        RngStream r = rng.substream(0, 6);
        KeyPair kp = gen(3, r);
        CollapsingGame game(kp, 5);
        out.push_back(at_most("clawfree.collapsing_exact_win_minus_0.75", std::abs(game.exact_win_probability() - 0.75), 1e-12));
        std::uint64_t plays = scaled(10000, o), wins = 0;
        for (std::uint64_t t = 0; t < plays; t++) {
            RngStream rt = r.substream(t, 7);
            wins += game.play(rt) ? 1 : 0;
        }
        double se = std::sqrt(0.75 * 0.25 / plays);
        out.push_back(at_most("clawfree.collapsing_empirical_sigmas", std::abs(wins / double(plays) - 0.75) / se, 4));
    }
    {
        RngStream r = rng.substream(0, 8);
        XZHamiltonian zz{2, {PauliString{1, {{0, Pauli::kZ}}}}, std::nullopt};
        ProtocolParams params;
        params.rounds_override = 2000;
        params.seed = r.next_u64();
        Verdict v = run_classical(zz, params, 3, ClassicalProver::dishonest_preimage(StateVector::random(2, r), 0.5));
        out.push_back(equal("clawfree.dishonest_preimage_is_error", v.outcome == Outcome::kError ? 1 : 0, 1));
    }
    return out;
}

const std::vector<std::string> &suite_names() {
    static const std::vector<std::string> names{"swap", "reduction", "mixture", "estimator", "clawfree"};
    return names;
}

std::vector<Check> run_suite(const std::string &name, const SuiteOptions &options) {
    if (name == "swap") {
        return swap_suite(options);
    }
    if (name == "reduction") {
        return reduction_suite(options);
    }
    if (name == "mixture") {
        return mixture_suite(options);
    }
    if (name == "estimator") {
        return estimator_suite(options);
    }
    if (name == "clawfree") {
        return clawfree_suite(options);
    }
    throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace certsamp::suites
