#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "certsamp/oracles.h"
#include "certsamp/protocols.h"
#include "certsamp/suites.h"

namespace certsamp {
namespace {

ProtocolParams params(double eta, double delta, std::uint64_t k, std::uint64_t seed) {
    ProtocolParams p;
    p.eta = eta;
    p.delta = delta;
    p.k = k;
    p.seed = seed;
    return p;
}

TEST(RoundsNeeded, Examples) {
    EXPECT_EQ(rounds_needed(0.1, 0.05), 738U);
    for (double eps : {0.2, 0.1, 0.05}) {
        double exact = 2 * std::log(2 / 0.05) / (eps * eps);
        double halved = 2 * std::log(2 / 0.05) / (eps * eps / 4);
        EXPECT_DOUBLE_EQ(halved, 4 * exact);
        EXPECT_EQ(rounds_needed(eps, 0.05), static_cast<std::uint64_t>(std::ceil(exact)));
    }
}

TEST(RoundsNeeded, FairCoinEstimate) {
    RngStream root(91);
    const std::uint64_t k = rounds_needed(0.1, 0.05);
    int good = 0;
    for (int trial = 0; trial < 1000; trial++) {
        RngStream rng = root.substream(static_cast<std::uint64_t>(trial));
        int heads = 0;
        for (std::uint64_t i = 0; i < k; i++) {
            heads += rng.bit();
        }
        good += std::abs(static_cast<double>(heads) / static_cast<double>(k) - 0.5) <= 0.1 ? 1 : 0;
    }
    EXPECT_GE(good, 950);
}

TEST(Thresholds, Examples) {
    EXPECT_DOUBLE_EQ(thresholds(0.1, 5).p_min, 0.98);
    EXPECT_NEAR(thresholds(0.1, 5).energy_max, 4e-5, 1e-18);
}

TEST(Params, Validation) {
    EXPECT_THROW(params(0.0, 0.1, 1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(0.6, 0.1, 1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(0.1, 0.4, 1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(0.1, 0.1, 0, 0).validate(), std::invalid_argument);
    EXPECT_NO_THROW(params(0.1, 0.1, 1, 0).validate());
}

TEST(RoundCounts, QuantumAndNonIid) {
    EXPECT_EQ(quantum_rounds(params(0.15, 0.1, 20, 0)), 4 * rounds_needed(0.15 * 0.15, 0.05));
    EXPECT_EQ(quantum_rounds(params(0.45, 0.1, 5000, 0)), 20000U);
    EXPECT_EQ(noniid_rounds(params(0.3, 0.1, 1, 0)), 3644U);
}

struct Instance {
    Circuit c;
    ComparisonCircuit g;
    StateVector psi_c;
    Distribution dc;
};

Instance random_instance(int n, int t, std::uint64_t seed) {
    RngStream rng(seed);
    Circuit c = random_circuit(n, t, rng);
    StateVector psi = payload_state(c);
    return {c, build_comparison(c), psi, born_distribution(psi)};
}

TEST(QuantumVerifier, HonestAccepts) {
    Instance inst = random_instance(2, 3, 92);
    Distribution d = suites::at_distance(inst.dc, Distribution::uniform(2), 0.1);
    QuantumProver honest = QuantumProver::honest(d, inst.psi_c);
    int accepted = 0;
    const int runs = 200;
    for (int r = 0; r < runs; r++) {
        Verdict v = run_quantum_verifier(inst.g, params(0.15, 0.1, 20, 1000 + r), honest);
        if (v.accepted()) {
            accepted++;
            EXPECT_GE(v.samples.size(), 20U);
            EXPECT_EQ(v.samples.size(), v.n2);
        }
        EXPECT_EQ(v.n1 + v.n2, v.rounds);
        EXPECT_GE(v.n1, v.rounds / 4);
        EXPECT_GE(v.n2, v.rounds / 4);
    }
    EXPECT_GE(accepted, static_cast<int>(0.9 * runs));
}

TEST(QuantumVerifier, FarFixedStateRejects) {
    Instance inst = random_instance(2, 3, 93);
    Distribution far = toward_distance(inst.dc, 0.6);
    QuantumProver adv = QuantumProver::fixed_state(from_distribution(far, inst.psi_c));
    int rejected = 0;
    const int runs = 100;
    for (int r = 0; r < runs; r++) {
        rejected += run_quantum_verifier(inst.g, params(0.1, 0.1, 1, 2000 + r), adv).accepted() ? 0 : 1;
    }
    EXPECT_GE(rejected, 99);
}

TEST(QuantumVerifier, AcceptedSamplesAreClose) {
    Instance inst = random_instance(2, 2, 94);
    QuantumProver honest = QuantumProver::honest(inst.dc, inst.psi_c);
    for (int r = 0; r < 20; r++) {
        Verdict v = run_quantum_verifier(inst.g, params(0.1, 0.1, 1, 3000 + r), honest);
        if (v.accepted()) {
            Distribution emp = Distribution::empirical(2, v.samples);
            double slack = std::sqrt(4.0 / static_cast<double>(v.samples.size()));
            EXPECT_LE(hellinger(emp, inst.dc), 10 * 0.1 + slack);
        }
    }
}

TEST(QuantumVerifier, TranscriptProvenance) {
    Instance inst = random_instance(1, 1, 95);
    ProtocolParams p = params(0.3, 0.1, 1, 4000);
    p.record_transcript = true;
    Verdict v = run_quantum_verifier(inst.g, p, QuantumProver::honest(inst.dc, inst.psi_c));
    ASSERT_EQ(v.transcript.size(), v.rounds);
    std::vector<std::uint64_t> from_transcript;
    for (const auto &rec : v.transcript) {
        if (rec.harvested) {
            EXPECT_EQ(rec.type, 0);
            from_transcript.push_back(rec.outcome);
        }
    }
    EXPECT_EQ(from_transcript, v.samples);
}

TEST(QuantumVerifier, ErrorOnSizeMismatch) {
    Instance inst = random_instance(2, 1, 96);
    Verdict v = run_quantum_verifier(inst.g, params(0.3, 0.1, 1, 1), QuantumProver::fixed_state(StateVector::basis(1)));
    EXPECT_EQ(v.outcome, Outcome::kError);
}

TEST(QuantumVerifier, Deterministic) {
    Instance inst = random_instance(2, 2, 97);
    QuantumProver honest = QuantumProver::honest(inst.dc, inst.psi_c);
    Verdict a = run_quantum_verifier(inst.g, params(0.3, 0.1, 1, 55), honest);
    Verdict b = run_quantum_verifier(inst.g, params(0.3, 0.1, 1, 55), honest);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.p_sum, b.p_sum);
}

TEST(NonIidVerifier, SelectedSampleFollowsD) {
    Instance inst = random_instance(1, 2, 98);
    Distribution d = inst.dc;
    QuantumProver honest = QuantumProver::honest(d, inst.psi_c);
    const int runs = 10000;
    std::vector<double> counts(2, 0);
    int accepted = 0;
    for (int r = 0; r < runs; r++) {
        Verdict v = run_noniid_verifier(inst.g, params(0.3, 0.1, 1, 5000 + static_cast<std::uint64_t>(r)), honest);
        ASSERT_EQ(v.rounds, 3644U);
        if (v.accepted()) {
            accepted++;
            ASSERT_TRUE(v.selected.has_value());
            counts[*v.selected] += 1;
        }
    }
    EXPECT_GE(accepted, static_cast<int>(0.9 * runs));
    double chi2 = 0;
    for (std::uint64_t x = 0; x < 2; x++) {
        double expected = d(x) * accepted;
        if (expected > 0) {
            chi2 += (counts[x] - expected) * (counts[x] - expected) / expected;
        } else {
            EXPECT_EQ(counts[x], 0.0);
        }
    }
    // one degree of freedom, 99.9% quantile
    EXPECT_LE(chi2, 10.83);
}

TEST(NonIidVerifier, AlternatingScheduleMixtureBound) {
    Instance inst = random_instance(1, 2, 99);
    const double eta = 0.3;
    StateVector good = from_distribution(inst.dc, inst.psi_c);
    StateVector bad = from_distribution(toward_distance(inst.dc, 0.2), inst.psi_c);
    std::vector<StateVector> slots;
    for (std::uint64_t i = 0; i < noniid_rounds(params(eta, 0.1, 1, 0)); i++) {
        slots.push_back(i % 2 == 0 ? good : bad);
    }
    QuantumProver adv = QuantumProver::schedule(slots);
    int accepted = 0;
    for (int r = 0; r < 50; r++) {
        Verdict v = run_noniid_verifier(inst.g, params(eta, 0.1, 1, 6000 + r), adv);
        if (v.accepted()) {
            accepted++;
            Distribution implied = implied_distribution(adv, v);
            EXPECT_LE(hellinger(implied, inst.dc), 12 * std::pow(eta, 0.25));
        }
    }
    EXPECT_GT(accepted, 40);
}

TEST(NonIidVerifier, AllBadScheduleRejects) {
    Instance inst = random_instance(1, 2, 100);
    StateVector bad = from_distribution(toward_distance(inst.dc, 0.5), inst.psi_c);
    std::vector<StateVector> slots(noniid_rounds(params(0.3, 0.1, 1, 0)), bad);
    QuantumProver adv = QuantumProver::schedule(slots);
    int rejected = 0;
    for (int r = 0; r < 100; r++) {
        rejected += run_noniid_verifier(inst.g, params(0.3, 0.1, 1, 7000 + r), adv).accepted() ? 0 : 1;
    }
    EXPECT_GE(rejected, 99);
}

struct HistoryInstance {
    ComparisonCircuit g;
    LocalHamiltonian h;
    StateVector psi;
};

HistoryInstance history_instance(std::uint64_t seed) {
    RngStream rng(seed);
    Circuit c = random_circuit(1, 1, rng);
    ComparisonCircuit g = build_comparison(c, true);
    StateVector psi_c = payload_state(c);
    return {g, build_hamiltonian(g), from_distribution(born_distribution(psi_c), psi_c)};
}

TEST(ConstantMemory, HonestHarvestAndOutputStatistics) {
    HistoryInstance inst = history_instance(101);
    HistoryProver honest = HistoryProver::honest(inst.g, inst.psi);
    ProtocolParams p = params(0.15, 0.1, 1, 8000);
    p.rounds_override = 60000;
    Verdict v = run_constant_memory(inst.g, inst.h, p, honest);
    EXPECT_TRUE(v.accepted()) << v.message;
    EXPECT_EQ(v.energy_estimate, 0.0);

    double rate = 1.0 / (inst.g.t_prime() + 1);
    double n2 = static_cast<double>(v.n2);
    double harvest = static_cast<double>(v.samples.size()) / n2;
    EXPECT_NEAR(harvest, rate, 4 * std::sqrt(rate * (1 - rate) / n2));

    double p_exact = accept_probability_exact(inst.g, inst.psi);
    double n3 = static_cast<double>(v.n3);
    EXPECT_NEAR(v.p_estimate, p_exact, 4 * std::sqrt(std::max(p_exact * (1 - p_exact), 1e-4) / n3));
}

TEST(ConstantMemory, InputViolationRejects) {
    HistoryInstance inst = history_instance(102);
    HistoryProver bad = HistoryProver::corrupted(inst.g, inst.psi, 0.9, Corruption::kInputViolation);
    int rejected = 0;
    for (int r = 0; r < 100; r++) {
        ProtocolParams p = params(0.15, 0.1, 1, 9000 + r);
        p.rounds_override = 20000;
        rejected += run_constant_memory(inst.g, inst.h, p, bad).accepted() ? 0 : 1;
    }
    EXPECT_GE(rejected, 99);
}

TEST(ConstantMemory, ErrorOnMismatchedHamiltonian) {
    RngStream rng(103);
    Circuit c = random_circuit(1, 1, rng);
    ComparisonCircuit decomposed = build_comparison(c, true);
    ComparisonCircuit raw = build_comparison(c, false);
    LocalHamiltonian h = build_hamiltonian(decomposed);
    HistoryProver honest = HistoryProver::honest(decomposed, payload_state(c));
    EXPECT_EQ(run_constant_memory(raw, h, params(0.15, 0.1, 1, 1), honest).outcome, Outcome::kError);
}

XZHamiltonian zz_hamiltonian() {
    PauliString zz{-1.0, {{0, Pauli::kZ}, {1, Pauli::kZ}}};
    return XZHamiltonian{2, {zz}, std::nullopt};
}

TEST(Classical, ZzEnergyOnZeroState) {
    ProtocolParams p = params(0.1, 0.1, 1, 10000);
    p.rounds_override = 100000;
    Verdict v = run_classical(zz_hamiltonian(), p, 3, ClassicalProver::honest(StateVector::basis(2)));
    ASSERT_EQ(v.outcome, Outcome::kAccept) << v.message;
    double se = v.energy_sigma / std::sqrt(static_cast<double>(v.n1));
    EXPECT_NEAR(v.energy_estimate, -1.0, 4 * se + 1e-12);
}

TEST(Classical, RandomXzHamiltoniansUnbiased) {
    RngStream rng(104);
    for (int trial = 0; trial < 5; trial++) {
        const int nq = 3;
        std::vector<PauliString> terms;
        for (int t = 0; t < 4; t++) {
            Pauli letter = rng.bit() != 0 ? Pauli::kZ : Pauli::kX;
            PauliString s{rng.uniform() * 2 - 1, {}};
            for (int q = 0; q < nq; q++) {
                if (rng.bit() != 0 || (q == nq - 1 && s.letters.empty())) {
                    s.letters.emplace_back(q, letter);
                }
            }
            terms.push_back(s);
        }
        XZHamiltonian h{nq, terms, std::nullopt};
        StateVector state = StateVector::random(nq, rng);
        double exact = 0;
        for (const auto &s : terms) {
            exact += oracle::pauli_expectation(s, state);
        }
        EXPECT_NEAR(h.exact_energy(state), exact, 1e-12);
        ProtocolParams p = params(0.1, 0.1, 1, 11000 + static_cast<std::uint64_t>(trial));
        p.rounds_override = 60000;
        Verdict v = run_classical(h, p, 2, ClassicalProver::honest(state));
        double se = v.energy_sigma / std::sqrt(static_cast<double>(v.n1));
        EXPECT_NEAR(v.energy_estimate, exact, 5 * se);
    }
}

TEST(Classical, DishonestPreimageGivesErrorVerdict) {
    ProtocolParams p = params(0.1, 0.1, 1, 12000);
    p.rounds_override = 2000;
    Verdict v = run_classical(zz_hamiltonian(), p, 3, ClassicalProver::dishonest_preimage(StateVector::basis(2), 0.1));
    EXPECT_EQ(v.outcome, Outcome::kError);
}

TEST(Classical, HonestHistorySamplesMatchTarget) {
    RngStream rng(105);
    Circuit c = random_circuit(2, 1, rng);
    ComparisonCircuit g = build_comparison(c);
    HistoryLayout layout{g.n, g.t_prime()};
    StateVector psi_c = payload_state(c);
    Distribution d = born_distribution(psi_c);
    StateVector hist = history_state(g, from_distribution(d, psi_c));
    XZHamiltonian h{hist.num_qubits(), {}, layout};
    ProtocolParams p = params(0.1, 0.1, 1, 13000);
    p.rounds_override = 6 * (g.t_prime() + 1) * 10500;
    Verdict v = run_classical(h, p, 2, ClassicalProver::honest(hist));
    ASSERT_EQ(v.outcome, Outcome::kAccept) << v.message;
    ASSERT_GE(v.samples.size(), 10000U);
    std::vector<std::uint64_t> first(v.samples.begin(), v.samples.begin() + 10000);
    EXPECT_LE(total_variation(Distribution::empirical(2, first), d), 0.05);
}

TEST(Classical, ValidatesHamiltonian) {
    PauliString mixed{1.0, {{0, Pauli::kZ}, {1, Pauli::kX}}};
    XZHamiltonian h{2, {mixed}, std::nullopt};
    EXPECT_THROW(h.validate(), std::invalid_argument);
}

TEST(XzPart, VanishesOnHistoryState) {
    HistoryInstance inst = history_instance(106);
    XZHamiltonian h = xz_part(inst.h, history_layout(inst.g));
    EXPECT_NO_THROW(h.validate());
    EXPECT_FALSE(h.terms.empty());
    EXPECT_NEAR(h.exact_energy(history_state(inst.g, inst.psi)), 0.0, 1e-12);
}

}  // namespace
}  // namespace certsamp
