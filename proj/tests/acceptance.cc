// Acceptance checks. Prints one PASS/FAIL line per criterion (1 to 10),
// preceded by the measurements that decided it. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "certsamp/experiment.h"
#include "certsamp/oracles.h"
#include "certsamp/protocols.h"
#include "certsamp/suites.h"

namespace {

using namespace certsamp;
using suites::Check;

struct Result {
    bool passed;
    std::string summary;
};

Check check_at_most(std::string name, double measured, double bound) {
    return {std::move(name), measured <= bound, measured, bound, "<="};
}

Check check_at_least(std::string name, double measured, double bound) {
    return {std::move(name), measured >= bound, measured, bound, ">="};
}

Result report(const std::vector<Check> &checks) {
    bool all = true;
    for (const auto &c : checks) {
        std::printf("    %s\n", suites::format_check(c).c_str());
        all = all && c.passed;
    }
    return {all, std::to_string(checks.size()) + " checks"};
}

std::vector<Check> with_prefix(const std::vector<Check> &checks, const std::vector<std::string> &names) {
    std::vector<Check> out;
    for (const auto &c : checks) {
        for (const auto &n : names) {
            if (c.name.rfind(n, 0) == 0) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

ProtocolParams params(double eta, double delta, std::uint64_t k, std::uint64_t seed) {
    ProtocolParams p;
    p.eta = eta;
    p.delta = delta;
    p.k = k;
    p.seed = seed;
    return p;
}

std::uint64_t run_seed(std::uint64_t base, std::uint64_t i) {
    return substream(RngStream(base), i, Purpose::kMetaRun).next_u64();
}

struct QuantumInstance {
    ComparisonCircuit g;
    StateVector psi_c;
    Distribution dc;
};

QuantumInstance quantum_instance(int n, int t, std::uint64_t seed) {
    RngStream rng(seed);
    Circuit c = random_circuit(n, t, rng);
    StateVector psi = payload_state(c);
    return {build_comparison(c), psi, born_distribution(psi)};
}

Result criterion_swap() {
    return report(suites::swap_suite({}));
}

Result criterion_metrics() {
    return report(suites::metric_checks({}));
}

const std::vector<Check> &reduction_checks() {
    static const std::vector<Check> checks = suites::reduction_suite({});
    return checks;
}

Result criterion_history_statistics() {
    return report(with_prefix(
        reduction_checks(), {"reduction.clock_uniform", "reduction.conditional_adv", "reduction.conditional_out",
                    "reduction.history_state_dense_oracle"}));
}

Result criterion_ground_energy() {
    return report(with_prefix(
        reduction_checks(), {"reduction.history_energy_zero", "reduction.dense_", "reduction.block_", "reduction.terms_psd"}));
}

Result criterion_quantum_completeness() {
    const double eta = 0.15, delta = 0.1;
    const std::uint64_t k = 20;
    const int runs = 300;
    std::vector<Check> checks;
    int accepted = 0, short_s = 0;
    for (int r = 0; r < runs; r++) {
        // Three payloads with T = 1, 2, 3, cycled over the meta-runs.
        int t = 1 + r % 3;
        QuantumInstance inst = quantum_instance(2, t, 500 + static_cast<std::uint64_t>(t));
        Distribution d = suites::at_distance(inst.dc, Distribution::uniform(2), eta);
        QuantumProver honest = QuantumProver::honest(d, inst.psi_c);
        Verdict v = run_quantum_verifier(inst.g, params(eta, delta, k, run_seed(5, static_cast<std::uint64_t>(r))), honest);
        if (v.accepted()) {
            accepted++;
            short_s += v.samples.size() < k ? 1 : 0;
        }
    }
    checks.push_back(check_at_least("accept_rate", accepted / static_cast<double>(runs), 1 - delta - 0.03));
    checks.push_back(check_at_most("accepted_runs_with_|S|<K", short_s, 0));
    return report(checks);
}

Result criterion_quantum_soundness() {
    const double eta = 0.1, delta = 0.1;
    const int runs = 300;
    QuantumInstance inst = quantum_instance(2, 3, 601);
    std::vector<Check> checks;
    std::uint64_t n = quantum_rounds(params(eta, delta, 1, 0));
    double p_min = thresholds(eta, inst.g.t_prime()).p_min;

    for (double d : {0.3, 0.45, 0.6}) {
        Distribution far = toward_distance(inst.dc, d);
        QuantumProver adv = QuantumProver::fixed_state(from_distribution(far, inst.psi_c));
        int rejected = 0;
        for (int r = 0; r < runs; r++) {
            Verdict v = run_quantum_verifier(
                inst.g, params(eta, delta, 1, run_seed(6, static_cast<std::uint64_t>(r) + 1000 * static_cast<std::uint64_t>(d * 100))),
                adv);
            rejected += v.accepted() ? 0 : 1;
        }
        std::uint64_t n1 = n / 2;
        auto need = static_cast<std::uint64_t>(std::ceil(p_min * static_cast<double>(n1)));
        double predicted = oracle::binomial_cdf(need - 1, n1, swap_accept_from_hellinger(d));
        char name[96];
        std::snprintf(name, sizeof name, "reject_rate(dH=%.2f) predicted=%.6f", d, predicted);
        checks.push_back(check_at_least(name, rejected / static_cast<double>(runs), 0.99));
    }

    // Catalog sweep: every accepted run must come from a strategy whose D^A is
    // within 10η of D_C.
    struct Entry {
        std::string name;
        QuantumProver prover;
    };
    auto state_at = [&](double d) { return from_distribution(toward_distance(inst.dc, d), inst.psi_c); };
    std::vector<Entry> catalog;
    for (double d : {0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.6}) {
        catalog.push_back({"fixed_state", QuantumProver::fixed_state(state_at(d))});
    }
    catalog.push_back({"ensemble_spike", QuantumProver::ensemble({{0.97, state_at(0.0)}, {0.03, state_at(0.6)}})});
    catalog.push_back({"ensemble_even", QuantumProver::ensemble({{0.5, state_at(0.1)}, {0.5, state_at(0.2)}})});
    catalog.push_back(
        {"ensemble_orthogonal", QuantumProver::ensemble({{0.5, state_at(0.0)}, {0.5, StateVector::basis(2, 3)}})});
    double worst = 0;
    int accepted_total = 0;
    std::uint64_t seed_index = 0;
    for (const auto &e : catalog) {
        for (int r = 0; r < 30; r++) {
            Verdict v = run_quantum_verifier(inst.g, params(eta, delta, 1, run_seed(66, seed_index++)), e.prover);
            if (v.accepted()) {
                accepted_total++;
                worst = std::max(worst, hellinger(implied_distribution(e.prover, v), inst.dc));
            }
        }
    }
    std::printf("    catalog: %d accepted runs over %zu strategies\n", accepted_total, catalog.size());
    checks.push_back(check_at_most("max_dH(D^A,D_C)_over_accepted_runs", worst, 10 * eta));
    return report(checks);
}

Result criterion_mixture() {
    std::vector<Check> all = suites::mixture_suite({});
    return report(with_prefix(all, {"mixture."}));
}

Result criterion_constant_memory() {
    const double eta = 0.15, delta = 0.1;
    const int runs = 100;
    RngStream rng(801);
    Circuit c = random_circuit(1, 1, rng);
    ComparisonCircuit g = build_comparison(c, true);
    LocalHamiltonian h = build_hamiltonian(g);
    StateVector psi_c = payload_state(c);
    HistoryProver honest = HistoryProver::honest(g, from_distribution(born_distribution(psi_c), psi_c));
    std::printf("    T'=%d n'=%d L=%d N=20000 (override)\n", g.t_prime(), 2 * g.n + g.t_prime() + 1, h.size());

    int accepted = 0;
    double harvested = 0, type2 = 0;
    double energy_sum = 0, energy_sq = 0, energy_rounds = 0;
    for (int r = 0; r < runs; r++) {
        ProtocolParams p = params(eta, delta, 1, run_seed(8, static_cast<std::uint64_t>(r)));
        p.rounds_override = 20000;
        Verdict v = run_constant_memory(g, h, p, honest);
        accepted += v.accepted() ? 1 : 0;
        harvested += static_cast<double>(v.samples.size());
        type2 += static_cast<double>(v.n2);
        double n1 = static_cast<double>(v.n1);
        energy_sum += v.energy_estimate * n1;
        energy_sq += v.energy_sigma * v.energy_sigma * n1;
        energy_rounds += n1;
    }
    std::vector<Check> checks;
    checks.push_back(check_at_least("accept_rate", accepted / static_cast<double>(runs), 1 - delta - 0.03));
    double rate = 1.0 / (g.t_prime() + 1);
    double sigma = std::sqrt(rate * (1 - rate) / type2);
    checks.push_back(check_at_most("harvest_rate_sigmas", std::abs(harvested / type2 - rate) / sigma, 4));
    double mean = energy_sum / energy_rounds;
    double se = std::sqrt(energy_sq) / energy_rounds;
    std::printf("    eigenbasis energy: mean=%.3g sigma_hat=%.3g over %.0f rounds\n", mean, se, energy_rounds);
    checks.push_back(check_at_most("energy_mean_minus_5sigma_hat", std::abs(mean) - 5 * se, 0));

    // The Pauli-sampling estimator has nonzero per-round spread; check it too.
    auto hist = std::make_shared<const StateVector>(*honest.states()[0]);
    EnergyEstimate pauli = estimate_energy(
        h, [&](std::uint64_t) { return hist; }, 200000, RngStream(802), EnergyMeasurement::kPauliSampling);
    checks.push_back(check_at_most("pauli_energy_sigmas", std::abs(pauli.mean) / pauli.standard_error, 5));
    return report(checks);
}

Result criterion_classical() {
    std::vector<Check> checks = with_prefix(
        suites::clawfree_suite({}), {"clawfree.honest_preimage", "clawfree.preimage_checks", "clawfree.block_oracle"});
    for (const auto &c : with_prefix(suites::estimator_suite({}), {"estimator.classical_gamma"})) {
        checks.push_back(c);
    }

    // Harvested samples against D, committed to the history state of G (n = 2).
    RngStream rng(901);
    Circuit c = random_circuit(2, 2, rng);
    ComparisonCircuit g = build_comparison(c);
    StateVector psi_c = payload_state(c);
    Distribution d = born_distribution(psi_c);
    StateVector hist = history_state(g, from_distribution(d, psi_c));
    XZHamiltonian h{hist.num_qubits(), {}, HistoryLayout{g.n, g.t_prime()}};
    ProtocolParams p = params(0.1, 0.1, 1, 902);
    const std::uint64_t want = 10000;
    p.rounds_override = 6 * static_cast<std::uint64_t>(g.t_prime() + 1) * (want + want / 20);
    Verdict v = run_classical(h, p, 3, ClassicalProver::honest(hist));
    checks.push_back(check_at_least("classical_run_completed", v.outcome == Outcome::kAccept ? 1 : 0, 1));
    checks.push_back(check_at_least("harvested_samples", static_cast<double>(v.samples.size()), static_cast<double>(want)));
    if (v.samples.size() >= want) {
        std::vector<std::uint64_t> s(v.samples.begin(), v.samples.begin() + static_cast<std::ptrdiff_t>(want));
        checks.push_back(check_at_most("TV(S,D)_at_1e4", total_variation(Distribution::empirical(2, s), d), 0.05));
    }
    return report(checks);
}

Result criterion_determinism() {
    std::vector<Check> checks;
    const char *models[] = {"quantum", "noniid", "history", "classical"};
    for (const char *model : models) {
        nlohmann::json j = {
            {"model", model},
            {"circuit", {{"random", {{"n", 1}, {"T", 2}, {"seed", 11}}}}},
            {"target", {{"kind", "distance"}, {"value", 0.05}}},
            {"strategy", {{"kind", "honest"}}},
            {"params", {{"eta", 0.2}, {"delta", 0.1}, {"K", 3}, {"N", 4000}}},
            {"meta_runs", 6},
            {"seed", 1234},
            {"record_transcript", true}};
        ExperimentConfig c = config_from_json(j);
        ExperimentResult a = run_experiment(c, 1);
        ExperimentResult b = run_experiment(c, 1);
        ExperimentResult t = run_experiment(c, 3);
        std::string csv = csv_rows(a), jsonl = jsonl_records(a);
        bool same = csv == csv_rows(b) && jsonl == jsonl_records(b) && csv == csv_rows(t) && jsonl == jsonl_records(t);
        checks.push_back(check_at_least(std::string("identical_outputs_") + model, same ? 1 : 0, 1));
    }
    return report(checks);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char *title;
        std::function<Result()> run;
    };
    std::vector<Criterion> criteria{
        {1, "comparison acceptance law", criterion_swap},
        {2, "metric sandwich", criterion_metrics},
        {3, "history-state statistics", criterion_history_statistics},
        {4, "ground energy and spectrum", criterion_ground_energy},
        {5, "quantum verifier completeness", criterion_quantum_completeness},
        {6, "quantum verifier soundness envelope", criterion_quantum_soundness},
        {7, "mixture bound", criterion_mixture},
        {8, "constant-memory protocol", criterion_constant_memory},
        {9, "classical protocol mechanics", criterion_classical},
        {10, "determinism", criterion_determinism},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Result o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %d %s (%s, %.1fs)\n", o.passed ? "PASS" : "FAIL", c.id, c.title, o.summary.c_str(), secs);
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
