#include "certsamp/protocols.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace certsamp {

std::uint64_t rounds_needed(double epsilon, double delta) {
    if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 1)) {
        throw std::invalid_argument("rounds_needed: need 0 < ε < 1 and 0 < δ < 1");
    }
    double k = 2 * std::log(2 / delta) / (epsilon * epsilon);
    if (k > 1e18) {
        throw std::overflow_error("rounds_needed: round count does not fit in 64 bits");
    }
    auto r = static_cast<std::uint64_t>(std::ceil(k));
    // Guard against ceil landing one short through rounding in the log.
    while (2 * std::exp(-epsilon * epsilon * static_cast<double>(r) / 2) > delta) {
        r++;
    }
    return r;
}

void ProtocolParams::validate() const {
    if (!(eta > 0) || !(1 - 2 * eta * eta > 0.5)) {
        throw std::invalid_argument("η must be positive with 1 − 2η² > 1/2");
    }
    if (!(delta > 0 && delta < 1.0 / 3)) {
        throw std::invalid_argument("δ must lie in (0, 1/3)");
    }
    if (k < 1) {
        throw std::invalid_argument("K must be at least 1");
    }
    if (rounds_override && *rounds_override == 0) {
        throw std::invalid_argument("round override must be positive");
    }
}

Thresholds thresholds(double eta, int t_prime) {
    double tp = static_cast<double>(t_prime);
    return {1 - 2 * eta * eta, eta * eta / (2 * tp * tp * tp)};
}

// Round-count table. Each protocol needs a few counters to reach a target
// size; a counter that collects a uniformly random type out of `types` reaches
// N/(2·types) except with probability exp(−N/(8·types)), which is below δ for
// every N produced here. Estimator accuracies come from rounds_needed with the
// failure budget split evenly between the estimators.
//
//   quantum:          N = 4·max(K, rounds_needed(η², δ/2))
//   non-i.i.d.:       N = 4·rounds_needed(η², δ/2)
//   constant memory:  N = 6·max(k_E, k_p, k_S) with
//                       k_E = rounds_needed(η²/(4T′³)/L, δ/3)   energy within
//                             a quarter of the threshold scale, values in [0, L]
//                       k_p = 2(T′+1)·rounds_needed(η², δ/3)    clock = T′ hits
//                       k_S = 2(T′+1)·K                          clock = 0 hits
//   classical:        as constant memory with L replaced by the value range
//                     2·Σ|c| and an extra factor 2 for the challenge bit.

std::uint64_t quantum_rounds(const ProtocolParams &params) {
    if (params.rounds_override) {
        return *params.rounds_override;
    }
    return 4 * std::max(params.k, rounds_needed(params.eta * params.eta, params.delta / 2));
}

std::uint64_t noniid_rounds(const ProtocolParams &params) {
    if (params.rounds_override) {
        return *params.rounds_override;
    }
    return 4 * rounds_needed(params.eta * params.eta, params.delta / 2);
}

namespace {

std::uint64_t history_rounds(const ProtocolParams &params, int t_prime, double value_range) {
    double tp = static_cast<double>(t_prime);
    double energy_accuracy = params.eta * params.eta / (4 * tp * tp * tp) / value_range;
    std::uint64_t k_e = rounds_needed(std::min(energy_accuracy, 0.5), params.delta / 3);
    std::uint64_t hits = 2 * static_cast<std::uint64_t>(t_prime + 1);
    std::uint64_t k_p = hits * rounds_needed(params.eta * params.eta, params.delta / 3);
    std::uint64_t k_s = hits * params.k;
    return 6 * std::max({k_e, k_p, k_s});
}

}  // namespace

std::uint64_t constant_memory_rounds(const ProtocolParams &params, int t_prime, int num_terms) {
    if (params.rounds_override) {
        return *params.rounds_override;
    }
    return history_rounds(params, t_prime, static_cast<double>(num_terms));
}

std::uint64_t classical_rounds(const ProtocolParams &params, int t_prime, double term_weight) {
    if (params.rounds_override) {
        return *params.rounds_override;
    }
    return 2 * history_rounds(params, t_prime, std::max(1.0, 2 * term_weight));
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::kAccept:
            return "accept";
        case Outcome::kReject:
            return "reject";
        case Outcome::kError:
            return "error";
    }
    return "unknown";
}

void to_json(nlohmann::json &j, const RoundRecord &r) {
    j = nlohmann::json{{"round", r.round}, {"type", r.type}, {"component", r.component}, {"outcome", r.outcome}};
    if (r.challenge >= 0) {
        j["challenge"] = r.challenge;
    }
    if (r.term >= 0) {
        j["term"] = r.term;
    }
    if (r.value != 0) {
        j["value"] = r.value;
    }
    if (r.harvested) {
        j["harvested"] = true;
    }
}

namespace {

Verdict error_verdict(Verdict v, const std::string &message) {
    v.outcome = Outcome::kError;
    v.message = message;
    return v;
}

std::vector<double> born_weights(const StateVector &s) {
    std::vector<double> p(s.dim());
    for (std::uint64_t i = 0; i < p.size(); i++) {
        p[i] = std::norm(s[i]);
    }
    return p;
}

// Per-state quantities for the quantum verifier, computed once per distinct
// prover state.
struct QuantumStats {
    CdfSampler born;
    double accept;
};

Verdict run_quantum_loop(
    const ComparisonCircuit &g, const ProtocolParams &params, const QuantumProver &prover, std::uint64_t rounds,
    bool select_one) {
    params.validate();
    Verdict v;
    v.rounds = rounds;
    if (prover.num_qubits() != g.n) {
        return error_verdict(
            v, "prover sends " + std::to_string(prover.num_qubits()) + "-qubit states, protocol expects " +
                   std::to_string(g.n));
    }
    RngStream run(params.seed);
    std::map<const StateVector *, QuantumStats> cache;
    for (std::uint64_t r = 0; r < rounds; r++) {
        int type = substream(run, r, Purpose::kRoundType).bit();
        RngStream prover_rng = substream(run, r, Purpose::kProver);
        RoundState rs;
        try {
            rs = prover.round_state(r, prover_rng);
        } catch (const std::out_of_range &e) {
            return error_verdict(std::move(v), e.what());
        }
        auto it = cache.find(rs.state.get());
        if (it == cache.end()) {
            it = cache.emplace(rs.state.get(), QuantumStats{CdfSampler(born_weights(*rs.state)),
                                                            accept_probability_exact(g, *rs.state)})
                     .first;
        }
        RngStream meas = substream(run, r, Purpose::kVerifierMeasurement);
        RoundRecord rec{r, type};
        rec.component = rs.component;
        if (type == 0) {
            std::uint64_t x = it->second.born.sample(meas);
            v.samples.push_back(x);
            v.sample_components.push_back(rs.component);
            v.n2++;
            rec.outcome = x;
            rec.harvested = true;
        } else {
            int bit = meas.uniform() < it->second.accept ? 1 : 0;
            v.p_sum += bit;
            v.n1++;
            rec.outcome = static_cast<std::uint64_t>(bit);
        }
        if (params.record_transcript) {
            v.transcript.push_back(rec);
        }
    }
    v.p_estimate = v.n1 > 0 ? v.p_sum / static_cast<double>(v.n1) : 0.0;
    double p_min = thresholds(params.eta, g.t_prime()).p_min;
    v.outcome = v.n1 > 0 && v.p_estimate >= p_min ? Outcome::kAccept : Outcome::kReject;
    if (v.outcome == Outcome::kReject) {
        v.message = "similarity estimate below threshold";
    }
    if (select_one && v.accepted()) {
        if (v.samples.empty()) {
            v.outcome = Outcome::kReject;
            v.message = "no sample rounds";
        } else {
            RngStream sel = substream(run, 0, Purpose::kSelection);
            v.selected = v.samples[sel.below(v.samples.size())];
        }
    }
    return v;
}

}  // namespace

Verdict run_quantum_verifier(const ComparisonCircuit &g, const ProtocolParams &params, const QuantumProver &prover) {
    return run_quantum_loop(g, params, prover, quantum_rounds(params), false);
}

Verdict run_noniid_verifier(const ComparisonCircuit &g, const ProtocolParams &params, const QuantumProver &prover) {
    return run_quantum_loop(g, params, prover, noniid_rounds(params), true);
}

namespace {

struct HistoryStats {
    CdfSampler born;
    std::vector<std::optional<std::pair<std::vector<double>, CdfSampler>>> terms;
};

}  // namespace

Verdict run_constant_memory(
    const ComparisonCircuit &g, const LocalHamiltonian &h, const ProtocolParams &params, const HistoryProver &prover) {
    params.validate();
    HistoryLayout layout = history_layout(g);
    int tp = layout.t_prime;
    int n = layout.n;
    std::uint64_t rounds = constant_memory_rounds(params, tp, h.size());
    Verdict v;
    v.rounds = rounds;
    if (h.num_qubits() != layout.num_qubits()) {
        return error_verdict(v, "Hamiltonian does not match the history layout of G");
    }
    if (prover.num_qubits() != layout.num_qubits()) {
        return error_verdict(
            v, "prover sends " + std::to_string(prover.num_qubits()) + "-qubit states, protocol expects " +
                   std::to_string(layout.num_qubits()));
    }
    TermSampler sampler(h, params.energy_measurement);
    RngStream run(params.seed);
    std::map<const StateVector *, HistoryStats> cache;
    const std::uint64_t aux_mask = (std::uint64_t{1} << n) - 1;
    const std::uint64_t out_mask = std::uint64_t{1} << (layout.num_qubits() - 1);
    const double l = static_cast<double>(h.size());

    for (std::uint64_t r = 0; r < rounds; r++) {
        int type = 1 + static_cast<int>(substream(run, r, Purpose::kRoundType).below(3));
        RngStream prover_rng = substream(run, r, Purpose::kProver);
        RoundState rs;
        try {
            rs = prover.round_state(r, prover_rng);
        } catch (const std::out_of_range &e) {
            return error_verdict(std::move(v), e.what());
        }
        auto it = cache.find(rs.state.get());
        if (it == cache.end()) {
            HistoryStats stats{CdfSampler(born_weights(*rs.state)), {}};
            stats.terms.resize(static_cast<size_t>(h.size()));
            it = cache.emplace(rs.state.get(), std::move(stats)).first;
        }
        HistoryStats &stats = it->second;
        RngStream meas = substream(run, r, Purpose::kVerifierMeasurement);
        RoundRecord rec{r, type};
        rec.component = rs.component;
        if (type == 1) {
            int t = static_cast<int>(meas.below(static_cast<std::uint64_t>(h.size())));
            auto &slot = stats.terms[static_cast<size_t>(t)];
            if (!slot) {
                std::vector<double> values, probs;
                for (const auto &[val, p] : sampler.term_outcomes(t, *rs.state)) {
                    values.push_back(val);
                    probs.push_back(p);
                }
                slot.emplace(std::move(values), CdfSampler(probs));
            }
            double value = slot->first[slot->second.sample(meas)];
            v.gamma += value;
            v.gamma_sq += value * value;
            v.n1++;
            rec.term = t;
            rec.value = value;
        } else {
            std::uint64_t idx = stats.born.sample(meas);
            rec.outcome = idx;
            auto clock = decode_clock(idx, layout);
            if (type == 2) {
                v.n2++;
                if (clock && *clock == 0 && !(idx & out_mask) && (idx & aux_mask) == 0) {
                    v.samples.push_back((idx >> n) & aux_mask);
                    v.sample_components.push_back(rs.component);
                    rec.harvested = true;
                }
            } else if (clock && *clock == tp) {
                v.n3++;
                v.p_sum += (idx & out_mask) ? 1 : 0;
            }
        }
        if (params.record_transcript) {
            v.transcript.push_back(rec);
        }
    }
    Thresholds th = thresholds(params.eta, tp);
    if (v.n1 > 0) {
        double n1 = static_cast<double>(v.n1);
        double mean = v.gamma / n1;
        v.energy_estimate = mean * l;
        double var = v.n1 > 1 ? std::max(0.0, (v.gamma_sq - n1 * mean * mean) / (n1 - 1)) : 0.0;
        v.energy_sigma = l * std::sqrt(var);
    }
    v.p_estimate = v.n3 > 0 ? v.p_sum / static_cast<double>(v.n3) : 0.0;
    bool energy_ok = v.n1 > 0 && v.energy_estimate <= th.energy_max;
    bool p_ok = v.n3 > 0 && v.p_estimate >= th.p_min;
    v.outcome = energy_ok && p_ok ? Outcome::kAccept : Outcome::kReject;
    if (!energy_ok) {
        v.message = "energy estimate above threshold";
    } else if (!p_ok) {
        v.message = "similarity estimate below threshold";
    }
    return v;
}

void XZHamiltonian::validate() const {
    if (num_qubits < 1 || num_qubits > kMaxSimulatedQubits) {
        throw std::invalid_argument("XZ Hamiltonian qubit count out of range");
    }
    for (const auto &t : terms) {
        if (t.letters.empty()) {
            continue;
        }
        Pauli first = t.letters.front().second;
        if (first != Pauli::kX && first != Pauli::kZ) {
            throw std::invalid_argument("XZ Hamiltonian strings may only use X or Z");
        }
        for (const auto &[q, l] : t.letters) {
            if (l != first) {
                throw std::invalid_argument("XZ Hamiltonian strings must be all-X or all-Z");
            }
            if (q < 0 || q >= num_qubits) {
                throw std::invalid_argument("XZ Hamiltonian string qubit out of range");
            }
        }
    }
    if (layout && layout->num_qubits() != num_qubits) {
        throw std::invalid_argument("XZ Hamiltonian layout does not match its qubit count");
    }
}

double XZHamiltonian::exact_energy(const StateVector &state) const {
    if (state.num_qubits() != num_qubits) {
        throw std::invalid_argument("state width does not match the Hamiltonian");
    }
    double e = 0;
    for (const auto &t : terms) {
        if (t.letters.empty()) {
            e += t.coefficient;
            continue;
        }
        std::vector<int> support;
        for (const auto &[q, l] : t.letters) {
            support.push_back(q);
        }
        Eigen::MatrixXcd rho = reduced_density(state, support);
        e += (rho * pauli_matrix(t, support)).trace().real();
    }
    return e;
}

XZHamiltonian xz_part(const LocalHamiltonian &h, const HistoryLayout &layout) {
    XZHamiltonian out{h.num_qubits(), {}, layout};
    for (const auto &term : h.terms()) {
        if (term.tag != TermTag::kIn && term.tag != TermTag::kClock) {
            continue;
        }
        for (auto &p : pauli_terms(term)) {
            out.terms.push_back(std::move(p));
        }
    }
    return out;
}

namespace {

struct MaskedTerm {
    double coefficient;
    std::uint64_t mask;
};

}  // namespace

Verdict run_classical(const XZHamiltonian &h, const ProtocolParams &params, int key_bits, const ClassicalProver &prover) {
    params.validate();
    h.validate();
    int q = h.num_qubits;
    double offset = 0, weight = 0;
    std::vector<MaskedTerm> z_terms, x_terms;
    for (const auto &t : h.terms) {
        if (t.letters.empty()) {
            offset += t.coefficient;
            continue;
        }
        std::uint64_t mask = 0;
        for (const auto &[qb, l] : t.letters) {
            mask |= qubit_mask(q, qb);
        }
        (t.letters.front().second == Pauli::kZ ? z_terms : x_terms).push_back({t.coefficient, mask});
        weight += std::abs(t.coefficient);
    }
    int tp = h.layout ? h.layout->t_prime : 1;
    std::uint64_t rounds = classical_rounds(params, tp, weight);
    Verdict v;
    v.rounds = rounds;
    if (prover.num_qubits() != q) {
        return error_verdict(
            v, "prover holds " + std::to_string(prover.num_qubits()) + " logical qubits, protocol expects " +
                   std::to_string(q));
    }
    auto energy_of = [&](const std::vector<MaskedTerm> &terms, std::uint64_t bits) {
        double e = offset;
        for (const auto &t : terms) {
            e += 2 * t.coefficient * (parity(bits & t.mask) ? -1.0 : 1.0);
        }
        return e;
    };

    RngStream run(params.seed);
    std::vector<KeyPair> keys(static_cast<size_t>(q));
    std::vector<PublicKey> pks(static_cast<size_t>(q));
    for (std::uint64_t r = 0; r < rounds; r++) {
        int type = 1 + static_cast<int>(substream(run, r, Purpose::kRoundType).below(3));
        RngStream key_rng = substream(run, r, Purpose::kKeyGeneration);
        for (int i = 0; i < q; i++) {
            keys[static_cast<size_t>(i)] = gen(key_bits, key_rng);
            pks[static_cast<size_t>(i)] = keys[static_cast<size_t>(i)].pk;
        }
        RngStream prover_rng = substream(run, r, Purpose::kProver);
        std::vector<std::uint64_t> y = prover.commit(pks, prover_rng);
        if (y.size() != pks.size()) {
            return error_verdict(std::move(v), "malformed commitment message");
        }
        int challenge = substream(run, r, Purpose::kChallenge).bit();
        ClassicalResponses resp = prover.respond(pks, y, challenge, prover_rng);
        if (resp.responses.size() != pks.size()) {
            return error_verdict(std::move(v), "malformed response message");
        }
        std::uint64_t bits = 0;
        for (int i = 0; i < q; i++) {
            auto idx = static_cast<size_t>(i);
            ResponseCheck check;
            try {
                check = verify_response(pks[idx], keys[idx].td, y[idx], challenge, resp.responses[idx]);
            } catch (const std::invalid_argument &e) {
                return error_verdict(std::move(v), std::string("malformed response: ") + e.what());
            }
            if (!check.ok) {
                return error_verdict(
                    std::move(v), "preimage check failed at round " + std::to_string(r) + ", qubit " + std::to_string(i));
            }
            bits = (bits << 1) | static_cast<std::uint64_t>(check.bit);
        }
        RoundRecord rec{r, type};
        rec.challenge = challenge;
        rec.outcome = bits;
        if (type == 1) {
            double value = energy_of(challenge == 0 ? z_terms : x_terms, bits);
            v.gamma += value;
            v.gamma_sq += value * value;
            v.n1++;
            rec.value = value;
        } else if (challenge == 0 && h.layout) {
            const HistoryLayout &lay = *h.layout;
            auto clock = decode_clock(bits, lay);
            std::uint64_t out_bit = bits >> (q - 1);
            std::uint64_t aux_mask = (std::uint64_t{1} << lay.n) - 1;
            if (type == 2 && clock && *clock == lay.t_prime) {
                v.n2++;
                v.p_sum += static_cast<double>(out_bit);
            } else if (type == 3) {
                v.n3++;
                if (clock && *clock == 0 && out_bit == 0 && (bits & aux_mask) == 0) {
                    v.samples.push_back((bits >> lay.n) & aux_mask);
                    v.sample_components.push_back(0);
                    rec.harvested = true;
                }
            }
        } else if (challenge == 0 && type == 3) {
            v.n3++;
        }
        if (params.record_transcript) {
            v.transcript.push_back(rec);
        }
    }
    if (v.n1 > 0) {
        double n1 = static_cast<double>(v.n1);
        v.energy_estimate = v.gamma / n1;
        double var = v.n1 > 1 ? std::max(0.0, (v.gamma_sq - n1 * v.energy_estimate * v.energy_estimate) / (n1 - 1)) : 0.0;
        v.energy_sigma = std::sqrt(var);
    }
    v.p_estimate = v.n2 > 0 ? v.p_sum / static_cast<double>(v.n2) : 0.0;
    v.outcome = Outcome::kAccept;
    v.message = "completed; thresholds are applied by the caller";
    return v;
}

Distribution implied_distribution(const QuantumProver &prover, const Verdict &verdict) {
    if (prover.iid() || verdict.sample_components.empty()) {
        return prover.implied_distribution();
    }
    std::map<int, double> counts;
    for (int c : verdict.sample_components) {
        counts[c] += 1;
    }
    std::vector<std::pair<double, Distribution>> parts;
    double total = static_cast<double>(verdict.sample_components.size());
    for (const auto &[c, k] : counts) {
        parts.emplace_back(k / total, prover.component_distribution(c));
    }
    return mix(parts);
}

}  // namespace certsamp
