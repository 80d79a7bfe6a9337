#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "certsamp/chamiltonian.h"
#include "certsamp/oracles.h"
#include "certsamp/provers.h"

namespace certsamp {
namespace {

ComparisonCircuit small_g(RngStream &rng, int n = 1, int t = 1) {
    return build_comparison(random_circuit(n, t, rng), true);
}

TEST(HistoryLayout, Registers) {
    HistoryLayout l{2, 5};
    EXPECT_EQ(l.num_qubits(), 10);
    EXPECT_EQ(l.clock(1), 1);
    EXPECT_EQ(l.adv(0), 6);
    EXPECT_EQ(l.aux(1), 9);
    EXPECT_EQ(l.comp(0), 0);
    EXPECT_EQ(l.comp(3), 8);
}

TEST(DecodeClock, Examples) {
    HistoryLayout l{1, 5};
    auto idx = [&](const std::vector<int> &clock) {
        std::uint64_t full = 0;
        for (int k = 1; k <= 5; k++) {
            if (clock[static_cast<size_t>(k - 1)] != 0) {
                full |= std::uint64_t{1} << (l.num_qubits() - 1 - l.clock(k));
            }
        }
        return full;
    };
    EXPECT_EQ(decode_clock(idx({1, 1, 1, 0, 0}), l), 3);
    EXPECT_EQ(decode_clock(idx({0, 0, 0, 0, 0}), l), 0);
    EXPECT_EQ(decode_clock(idx({1, 1, 1, 1, 1}), l), 5);
    EXPECT_FALSE(decode_clock(idx({0, 1, 0, 1, 0}), l).has_value());
    for (int j = 0; j <= 5; j++) {
        EXPECT_EQ(decode_clock(l.index(j, 0), l), j);
    }
}

TEST(BuildHamiltonian, TermCountAndLocality) {
    RngStream rng(41);
    for (int n = 1; n <= 2; n++) {
        ComparisonCircuit g = small_g(rng, n, 2);
        LocalHamiltonian h = build_hamiltonian(g);
        EXPECT_EQ(h.size(), (n + 1) + 2 * g.t_prime() - 1);
        EXPECT_LE(h.locality(), kMaxLocality);
        EXPECT_EQ(h.num_qubits(), 2 * n + g.t_prime() + 1);
    }
}

TEST(BuildHamiltonian, RejectsThreeQubitGates) {
    RngStream rng(42);
    EXPECT_THROW(build_hamiltonian(build_comparison(random_circuit(1, 1, rng), false)), std::invalid_argument);
}

TEST(BuildHamiltonian, TermsMatchDefinitions) {
    Circuit g(3);
    g.append(Gate::h(0));
    g.append(Gate::cnot(1, 2));
    g.append(Gate::t(1));
    LocalHamiltonian h = build_hamiltonian(g, 1);
    std::vector<oracle::Operator> want = oracle::kitaev_terms(g, 1);
    std::vector<oracle::Operator> got = oracle::operators(h);
    int nq = h.num_qubits();
    EXPECT_LT((oracle::dense_sum(want, nq) - oracle::dense_sum(got, nq)).norm(), 1e-10);
}

TEST(HistoryState, MatchesDenseOracleAndEnergyIsZero) {
    RngStream rng(44);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    for (int trial = 0; trial < 5; trial++) {
        StateVector psi = StateVector::random(1, rng);
        StateVector hist = history_state(g, psi);
        EXPECT_NEAR(std::abs(inner_product(hist, oracle::history_state_dense(g.gates, 1, psi))), 1.0, 1e-10);
        EXPECT_LE(std::abs(energy_exact(h, hist)), 1e-9);
    }
}

TEST(HistoryState, Statistics) {
    RngStream rng(45);
    ComparisonCircuit g = small_g(rng);
    HistoryLayout l = history_layout(g);
    StateVector psi = StateVector::random(1, rng);
    StateVector hist = history_state(g, psi);
    double tp1 = g.t_prime() + 1;

    std::vector<int> gate_qubits{l.clock(1), l.out(), l.aux(0)};
    Distribution m = born_marginal(hist, gate_qubits);
    EXPECT_NEAR(m(0), 1 / tp1, 1e-10);

    auto [weights, prob] = conditioned_adv_weights(hist, l);
    EXPECT_NEAR(prob, 1 / tp1, 1e-10);
    Distribution born = born_distribution(psi);
    EXPECT_NEAR(weights[0] / prob, born(0), 1e-10);
    EXPECT_NEAR(weights[1] / prob, born(1), 1e-10);

    double p_out = 0, p_last = 0;
    for (std::uint64_t i = 0; i < hist.dim(); i++) {
        if (decode_clock(i, l) == g.t_prime()) {
            double w = std::norm(hist[i]);
            p_last += w;
            if ((i >> (l.num_qubits() - 1)) & 1U) {
                p_out += w;
            }
        }
    }
    EXPECT_NEAR(p_last, 1 / tp1, 1e-10);
    EXPECT_NEAR(p_out / p_last, accept_probability_exact(g, psi), 1e-10);
}

TEST(EnergyExact, PenaltyStates) {
    RngStream rng(46);
    ComparisonCircuit g = small_g(rng);
    HistoryLayout l = history_layout(g);
    LocalHamiltonian h = build_hamiltonian(g);
    // clock 0, out = 1
    StateVector out_one = StateVector::basis(l.num_qubits(), l.index(0, 0b100));
    double h_in = 0;
    for (const auto &t : h.terms()) {
        if (t.tag == TermTag::kIn) {
            h_in += term_expectation(t, out_one);
        }
    }
    EXPECT_NEAR(h_in, 1.0, 1e-12);
    // clock reads 0 1 0 ... : illegal
    std::uint64_t bad = std::uint64_t{1} << (l.num_qubits() - 1 - l.clock(2));
    EXPECT_GE(energy_exact(h, StateVector::basis(l.num_qubits(), bad)), 1.0 - 1e-12);
}

TEST(EnergyExact, MatchesDenseOracle) {
    RngStream rng(47);
    Circuit g(3);
    g.append(Gate::h(0));
    g.append(Gate::cnot(0, 2));
    g.append(Gate::s(1));
    g.append(Gate::x(0));
    LocalHamiltonian h = build_hamiltonian(g, 1);
    int nq = h.num_qubits();
    ASSERT_LE(nq, 12);
    Eigen::MatrixXcd dense = oracle::dense_sum(oracle::kitaev_terms(g, 1), nq);
    for (int trial = 0; trial < 5; trial++) {
        StateVector s = StateVector::random(nq, rng);
        Eigen::Map<const Eigen::VectorXcd> v(s.amplitudes().data(), static_cast<Eigen::Index>(s.dim()));
        EXPECT_NEAR(energy_exact(h, s), (v.adjoint() * dense * v)(0, 0).real(), 1e-9);
    }
}

TEST(Spectrum, DenseGroundSpace) {
    RngStream rng(48);
    LocalHamiltonian h = build_hamiltonian(random_circuit(3, 4, rng), 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oracle::dense_sum(oracle::operators(h), h.num_qubits()));
    EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-9);
    int null = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); i++) {
        null += std::abs(es.eigenvalues()[i]) < 1e-8 ? 1 : 0;
    }
    EXPECT_EQ(null, 2);
}

TEST(Spectrum, PropagationPartIsPositive) {
    RngStream rng(49);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    std::vector<oracle::Operator> prop;
    for (const auto &t : h.terms()) {
        if (t.tag == TermTag::kProp) {
            prop.push_back({t.matrix, t.support});
        }
    }
    std::vector<std::uint64_t> basis = oracle::legal_clock_indices(g.n, g.t_prime());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oracle::block(prop, h.num_qubits(), basis));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(PauliTerms, Examples) {
    Eigen::MatrixXcd one(2, 2);
    one << 0, 0, 0, 1;
    auto strings = pauli_terms(LocalTerm{{3}, one, TermTag::kOther});
    ASSERT_EQ(strings.size(), 2U);
    for (const auto &p : strings) {
        if (p.letters.empty()) {
            EXPECT_NEAR(p.coefficient, 0.5, 1e-15);
        } else {
            EXPECT_EQ(p.letters[0].first, 3);
            EXPECT_EQ(p.letters[0].second, Pauli::kZ);
            EXPECT_NEAR(p.coefficient, -0.5, 1e-15);
        }
    }

    Eigen::MatrixXcd zz = Eigen::MatrixXcd::Zero(4, 4);
    zz.diagonal() << 2, -2, -2, 2;
    auto zz_strings = pauli_terms(LocalTerm{{0, 1}, zz, TermTag::kOther});
    ASSERT_EQ(zz_strings.size(), 1U);
    EXPECT_NEAR(zz_strings[0].coefficient, 2.0, 1e-15);
    EXPECT_EQ(zz_strings[0].letters.size(), 2U);
}

TEST(PauliTerms, ReconstructRandomHermitian) {
    RngStream rng(50);
    for (int trial = 0; trial < 20; trial++) {
        Eigen::MatrixXcd a(4, 4);
        for (int i = 0; i < 4; i++) {
            for (int j = 0; j < 4; j++) {
                a(i, j) = Amplitude(rng.uniform() - 0.5, rng.uniform() - 0.5);
            }
        }
        Eigen::MatrixXcd herm = a + a.adjoint();
        std::vector<int> support{2, 0};
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(4, 4);
        for (const auto &p : pauli_terms(LocalTerm{support, herm, TermTag::kOther})) {
            sum += pauli_matrix(p, support);
        }
        EXPECT_LT((sum - herm).norm(), 1e-10);
    }
}

TEST(PauliTerms, RejectsNonHermitian) {
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 0, 0;
    EXPECT_THROW(pauli_terms(LocalTerm{{0}, m, TermTag::kOther}), std::invalid_argument);
}

TEST(EstimateEnergy, HistoryStateBothEstimators) {
    RngStream rng(51);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    auto hist = std::make_shared<const StateVector>(history_state(g, StateVector::random(1, rng)));
    StateSource src = [&](std::uint64_t) { return hist; };
    EnergyEstimate eig = estimate_energy(h, src, 100000, rng, EnergyMeasurement::kEigenbasis);
    EXPECT_EQ(eig.mean, 0.0);
    EnergyEstimate pauli = estimate_energy(h, src, 100000, rng, EnergyMeasurement::kPauliSampling);
    EXPECT_LE(std::abs(pauli.mean), 5 * pauli.standard_error);
}

TEST(EstimateEnergy, DiagonalEigenstate) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    d.diagonal() << 0.3, 1.1, -0.7, 2.0;
    LocalHamiltonian h(2, {LocalTerm{{0, 1}, d, TermTag::kOther}});
    auto s = std::make_shared<const StateVector>(StateVector::basis(2, 2));
    StateSource src = [&](std::uint64_t) { return s; };
    for (auto mode : {EnergyMeasurement::kEigenbasis, EnergyMeasurement::kPauliSampling}) {
        EnergyEstimate e = estimate_energy(h, src, 20000, RngStream(52), mode);
        EXPECT_NEAR(e.mean, -0.7, 5 * e.standard_error + 1e-12);
    }
}

TEST(EstimateEnergy, UnbiasedOnRandomState) {
    RngStream rng(53);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    auto s = std::make_shared<const StateVector>(StateVector::random(h.num_qubits(), rng));
    StateSource src = [&](std::uint64_t) { return s; };
    double exact = energy_exact(h, *s);
    for (auto mode : {EnergyMeasurement::kEigenbasis, EnergyMeasurement::kPauliSampling}) {
        EnergyEstimate e = estimate_energy(h, src, 50000, RngStream(54), mode);
        EXPECT_NEAR(e.mean, exact, 5 * e.standard_error);
    }
}

TEST(EstimateEnergy, SingleRoundIsFinite) {
    RngStream rng(55);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    auto s = std::make_shared<const StateVector>(StateVector::random(h.num_qubits(), rng));
    StateSource src = [&](std::uint64_t) { return s; };
    EnergyEstimate e = estimate_energy(h, src, 1, rng, EnergyMeasurement::kPauliSampling);
    EXPECT_TRUE(std::isfinite(e.mean));
}

TEST(TermSampler, OutcomeDistributionMatchesExpectation) {
    RngStream rng(56);
    ComparisonCircuit g = small_g(rng);
    LocalHamiltonian h = build_hamiltonian(g);
    StateVector s = StateVector::random(h.num_qubits(), rng);
    for (auto mode : {EnergyMeasurement::kEigenbasis, EnergyMeasurement::kPauliSampling}) {
        TermSampler sampler(h, mode);
        for (int t = 0; t < h.size(); t++) {
            double mean = 0, total = 0;
            for (auto [v, p] : sampler.term_outcomes(t, s)) {
                mean += v * p;
                total += p;
            }
            EXPECT_NEAR(total, 1.0, 1e-10);
            EXPECT_NEAR(mean, term_expectation(h[t], s), 1e-10);
        }
    }
}

}  // namespace
}  // namespace certsamp
