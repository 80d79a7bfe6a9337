#include "certsamp/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "certsamp/bits.h"

namespace certsamp {

using nlohmann::json;

std::string model_name(Model m) {
    switch (m) {
        case Model::kQuantum:
            return "quantum";
        case Model::kNonIid:
            return "noniid";
        case Model::kHistory:
            return "history";
        case Model::kClassical:
            return "classical";
    }
    return "unknown";
}

Model model_from_name(const std::string &name) {
    for (Model m : {Model::kQuantum, Model::kNonIid, Model::kHistory, Model::kClassical}) {
        if (model_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown model '" + name + "' (expected quantum, noniid, history or classical)");
}

void to_json(json &j, const ExperimentConfig &c) {
    json params = {{"eta", c.eta}, {"delta", c.delta}, {"K", c.k}, {"energy_measurement", c.energy_measurement}};
    if (c.rounds) {
        params["N"] = *c.rounds;
    }
    j = json{{"model", model_name(c.model)},
             {"circuit", c.circuit},
             {"target", c.target},
             {"strategy", c.strategy},
             {"params", params},
             {"key_bits", c.key_bits},
             {"meta_runs", c.meta_runs},
             {"seed", c.seed},
             {"record_transcript", c.record_transcript},
             {"outputs", {{"jsonl", c.jsonl}, {"csv", c.csv}}}};
    if (!c.sweep.is_null()) {
        j["sweep"] = c.sweep;
    }
}

namespace {

void check_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[key, value] : j.items()) {
        if (!ok.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_field(const json &j, const char *key, const std::string &where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <typename T>
void read_optional(const json &j, const char *key, const std::string &where, T &out) {
    if (j.contains(key)) {
        out = get_field<T>(j, key, where);
    }
}

}  // namespace

ExperimentConfig config_from_json(const json &j) {
    check_keys(
        j, "config",
        {"model", "circuit", "target", "strategy", "params", "key_bits", "meta_runs", "seed", "record_transcript",
         "outputs", "sweep"});
    ExperimentConfig c;
    c.model = model_from_name(get_field<std::string>(j, "model", "config"));
    if (!j.contains("circuit")) {
        throw ConfigError("config.circuit is required");
    }
    c.circuit = j.at("circuit");
    if (j.contains("target")) {
        c.target = j.at("target");
    }
    if (j.contains("strategy")) {
        c.strategy = j.at("strategy");
    }
    if (j.contains("params")) {
        const json &p = j.at("params");
        check_keys(p, "params", {"eta", "delta", "K", "N", "energy_measurement"});
        read_optional(p, "eta", "params", c.eta);
        read_optional(p, "delta", "params", c.delta);
        read_optional(p, "K", "params", c.k);
        if (p.contains("N") && !p.at("N").is_null()) {
            c.rounds = get_field<std::uint64_t>(p, "N", "params");
        }
        read_optional(p, "energy_measurement", "params", c.energy_measurement);
    }
    read_optional(j, "key_bits", "config", c.key_bits);
    read_optional(j, "meta_runs", "config", c.meta_runs);
    read_optional(j, "seed", "config", c.seed);
    read_optional(j, "record_transcript", "config", c.record_transcript);
    if (j.contains("outputs")) {
        const json &o = j.at("outputs");
        check_keys(o, "outputs", {"jsonl", "csv"});
        read_optional(o, "jsonl", "outputs", c.jsonl);
        read_optional(o, "csv", "outputs", c.csv);
    }
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
        c.sweep = j.at("sweep");
        if (!c.sweep.is_object()) {
            throw ConfigError("sweep must map config paths to value lists");
        }
        for (const auto &[path, values] : c.sweep.items()) {
            if (!values.is_array() || values.empty()) {
                throw ConfigError("sweep." + path + " must be a non-empty list");
            }
        }
    }

    ProtocolParams params;
    params.eta = c.eta;
    params.delta = c.delta;
    params.k = c.k;
    params.rounds_override = c.rounds;
    try {
        params.validate();
        energy_measurement_from_name(c.energy_measurement);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    if (c.meta_runs < 1) {
        throw ConfigError("meta_runs must be at least 1");
    }
    if (c.key_bits < 1 || c.key_bits > kMaxTailBits) {
        throw ConfigError("key_bits must lie in [1, " + std::to_string(kMaxTailBits) + "]");
    }
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    ExperimentConfig c = config_from_json(j);
    c.base_dir = std::filesystem::path(path).parent_path().string();
    if (c.base_dir.empty()) {
        c.base_dir = ".";
    }
    return c;
}

namespace {

std::string resolve(const ExperimentConfig &c, const std::string &file) {
    std::filesystem::path p(file);
    if (p.is_relative()) {
        p = std::filesystem::path(c.base_dir) / p;
    }
    if (!std::filesystem::exists(p)) {
        throw ConfigError("referenced file '" + p.string() + "' does not exist");
    }
    return p.string();
}

json read_json_file(const std::string &path) {
    std::ifstream in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

Circuit load_circuit(const ExperimentConfig &c) {
    const json &source = c.circuit;
    try {
        if (source.is_object() && source.contains("file")) {
            check_keys(source, "circuit", {"file"});
            return circuit_from_json(read_json_file(resolve(c, source.at("file").get<std::string>())));
        }
        if (source.is_object() && source.contains("random")) {
            check_keys(source, "circuit", {"random"});
            const json &r = source.at("random");
            check_keys(r, "circuit.random", {"n", "T", "seed"});
            int n = get_field<int>(r, "n", "circuit.random");
            int t = get_field<int>(r, "T", "circuit.random");
            std::uint64_t seed = r.value("seed", std::uint64_t{0});
            if (n < 1 || t < 0) {
                throw ConfigError("circuit.random needs n ≥ 1 and T ≥ 0");
            }
            if (2 * n + 1 > kMaxSimulatedQubits) {
                throw ConfigError(
                    "comparison circuit would need " + std::to_string(2 * n + 1) + " qubits, above the simulation cap of " +
                    std::to_string(kMaxSimulatedQubits));
            }
            RngStream rng(seed);
            return random_circuit(n, t, rng);
        }
        return circuit_from_json(source);
    } catch (const ConfigError &) {
        throw;
    } catch (const std::exception &e) {
        throw ConfigError(std::string("circuit: ") + e.what());
    }
}

std::string fmt(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

// A distribution reference: the circuit's own, one at a fixed Hellinger
// distance from it, or an explicit mass table.
Distribution resolve_distribution(const json &ref, const Distribution &dc, const std::string &where) {
    if (ref.is_null()) {
        return dc;
    }
    check_keys(ref, where, {"kind", "value", "dist"});
    std::string kind = get_field<std::string>(ref, "kind", where);
    if (kind == "circuit") {
        return dc;
    }
    if (kind == "distance") {
        double d = get_field<double>(ref, "value", where);
        if (!(d >= 0 && d <= 1)) {
            throw ConfigError(where + ".value must lie in [0, 1]");
        }
        return toward_distance(dc, d);
    }
    if (kind == "explicit") {
        Distribution d = [&] {
            try {
                return distribution_from_json(ref.at("dist"));
            } catch (const std::exception &e) {
                throw ConfigError(where + ".dist: " + e.what());
            }
        }();
        if (d.num_bits() != dc.num_bits()) {
            throw ConfigError(where + ".dist has the wrong bit count");
        }
        return d;
    }
    throw ConfigError(where + ".kind must be circuit, distance or explicit");
}

std::string describe(const json &ref) {
    if (ref.is_null()) {
        return "D_C";
    }
    std::string kind = ref.value("kind", "circuit");
    if (kind == "distance") {
        return "d=" + fmt(ref.at("value").get<double>());
    }
    return kind == "circuit" ? "D_C" : "explicit";
}

std::vector<std::pair<double, StateVector>> weighted_states(
    const json &strategy, const Distribution &dc, const StateVector &psi_c, const std::string &where) {
    auto aligned = [&](const Distribution &d) { return from_distribution(d, psi_c); };
    if (!strategy.contains("components") || !strategy.at("components").is_array() ||
        strategy.at("components").empty()) {
        throw ConfigError(where + ".components must be a non-empty list");
    }
    std::vector<std::pair<double, StateVector>> out;
    for (const auto &comp : strategy.at("components")) {
        check_keys(comp, where + ".components[]", {"weight", "state"});
        double w = get_field<double>(comp, "weight", where + ".components[]");
        out.emplace_back(
            w, aligned(resolve_distribution(comp.value("state", json()), dc, where + ".components[].state")));
    }
    return out;
}

// Everything a single run needs, built once per experiment.
struct Built {
    ExperimentConfig config;
    ProtocolParams params;
    Distribution dc = Distribution::point(1, 0);
    std::shared_ptr<StateVector> psi_c;
    std::shared_ptr<ComparisonCircuit> g;
    std::shared_ptr<LocalHamiltonian> h;
    std::shared_ptr<XZHamiltonian> xz;
    std::variant<std::monostate, QuantumProver, HistoryProver, ClassicalProver> prover;
    std::string label;
    std::uint64_t rounds = 0;
};

int history_qubits(int n, int t_gates_decomposed) {
    return 2 * n + t_gates_decomposed + 1;
}

Built build(const ExperimentConfig &c) {
    Built b;
    b.config = c;
    b.params.eta = c.eta;
    b.params.delta = c.delta;
    b.params.k = c.k;
    b.params.rounds_override = c.rounds;
    b.params.record_transcript = c.record_transcript;
    b.params.energy_measurement = energy_measurement_from_name(c.energy_measurement);

    Circuit payload = load_circuit(c);
    int n = payload.num_qubits();
    if (2 * n + 1 > kMaxSimulatedQubits) {
        throw ConfigError(
            "comparison circuit would need " + std::to_string(2 * n + 1) + " qubits, above the simulation cap of " +
            std::to_string(kMaxSimulatedQubits));
    }
    b.psi_c = std::make_shared<StateVector>(payload_state(payload));
    b.dc = born_distribution(*b.psi_c);
    // Strategy states carry ψ_C's phases so the comparison statistics depend
    // on the distributions alone.
    auto aligned = [&](const Distribution &d) { return from_distribution(d, *b.psi_c); };
    Distribution target = resolve_distribution(c.target, b.dc, "target");
    const json &s = c.strategy;
    if (!s.is_object()) {
        throw ConfigError("strategy must be a JSON object");
    }
    std::string kind = get_field<std::string>(s, "kind", "strategy");
    bool two_qubit = c.model == Model::kHistory || c.model == Model::kClassical;
    b.g = std::make_shared<ComparisonCircuit>(build_comparison(payload, two_qubit));

    if (c.model == Model::kQuantum || c.model == Model::kNonIid) {
        b.rounds = c.model == Model::kQuantum ? quantum_rounds(b.params) : noniid_rounds(b.params);
        if (kind == "honest") {
            check_keys(s, "strategy", {"kind"});
            b.prover = QuantumProver::honest(target, *b.psi_c);
            b.label = "honest(" + describe(c.target) + ")";
        } else if (kind == "fixed_state") {
            check_keys(s, "strategy", {"kind", "state"});
            b.prover = QuantumProver::fixed_state(
                aligned(resolve_distribution(s.value("state", json()), b.dc, "strategy.state")));
            b.label = "fixed_state(" + describe(s.value("state", json())) + ")";
        } else if (kind == "ensemble") {
            check_keys(s, "strategy", {"kind", "components"});
            b.prover = QuantumProver::ensemble(weighted_states(s, b.dc, *b.psi_c, "strategy"));
            b.label = "ensemble(" + std::to_string(s.at("components").size()) + ")";
        } else if (kind == "schedule") {
            check_keys(s, "strategy", {"kind", "pattern"});
            if (!s.contains("pattern") || !s.at("pattern").is_array() || s.at("pattern").empty()) {
                throw ConfigError("strategy.pattern must be a non-empty list of states");
            }
            std::vector<StateVector> pattern;
            for (const auto &ref : s.at("pattern")) {
                pattern.push_back(aligned(resolve_distribution(ref, b.dc, "strategy.pattern[]")));
            }
            std::vector<StateVector> slots;
            slots.reserve(b.rounds);
            for (std::uint64_t r = 0; r < b.rounds; r++) {
                slots.push_back(pattern[r % pattern.size()]);
            }
            b.prover = QuantumProver::schedule(slots);
            b.label = "schedule(" + std::to_string(pattern.size()) + ")";
        } else {
            throw ConfigError("unknown quantum strategy '" + kind + "'");
        }
        return b;
    }

    int n_prime = history_qubits(n, b.g->t_prime());
    if (n_prime > kMaxSimulatedQubits) {
        throw ConfigError(
            "history system needs n′ = " + std::to_string(n_prime) + " qubits, above the simulation cap of " +
            std::to_string(kMaxSimulatedQubits));
    }
    b.h = std::make_shared<LocalHamiltonian>(build_hamiltonian(*b.g));
    StateVector psi_target = aligned(target);

    if (c.model == Model::kHistory) {
        b.rounds = constant_memory_rounds(b.params, b.g->t_prime(), b.h->size());
        if (kind == "honest") {
            check_keys(s, "strategy", {"kind"});
            b.prover = HistoryProver::honest(*b.g, psi_target);
            b.label = "honest_history(" + describe(c.target) + ")";
        } else if (kind == "corrupted") {
            check_keys(s, "strategy", {"kind", "mode", "epsilon", "state"});
            Corruption mode;
            try {
                mode = corruption_from_name(get_field<std::string>(s, "mode", "strategy"));
            } catch (const std::invalid_argument &e) {
                throw ConfigError(std::string("strategy.mode: ") + e.what());
            }
            double eps = s.value("epsilon", 0.0);
            StateVector psi = s.contains("state")
                                  ? aligned(resolve_distribution(s.at("state"), b.dc, "strategy.state"))
                                  : psi_target;
            b.prover = HistoryProver::corrupted(*b.g, psi, eps, mode);
            b.label = corruption_name(mode) + "(eps=" + fmt(eps) + ")";
        } else if (kind == "ensemble") {
            check_keys(s, "strategy", {"kind", "components"});
            b.prover = HistoryProver::ensemble(*b.g, weighted_states(s, b.dc, *b.psi_c, "strategy"));
            b.label = "ensemble_history(" + std::to_string(s.at("components").size()) + ")";
        } else {
            throw ConfigError("unknown history strategy '" + kind + "'");
        }
        return b;
    }

    HistoryLayout layout = history_layout(*b.g);
    b.xz = std::make_shared<XZHamiltonian>(xz_part(*b.h, layout));
    double weight = 0;
    for (const auto &t : b.xz->terms) {
        if (!t.letters.empty()) {
            weight += std::abs(t.coefficient);
        }
    }
    b.rounds = classical_rounds(b.params, b.g->t_prime(), weight);
    if (kind == "honest") {
        check_keys(s, "strategy", {"kind"});
        b.prover = ClassicalProver::honest(history_state(*b.g, psi_target));
        b.label = "honest_classical(" + describe(c.target) + ")";
    } else if (kind == "dishonest_preimage") {
        check_keys(s, "strategy", {"kind", "error_rate"});
        double rate = get_field<double>(s, "error_rate", "strategy");
        if (!(rate >= 0 && rate <= 1)) {
            throw ConfigError("strategy.error_rate must lie in [0, 1]");
        }
        b.prover = ClassicalProver::dishonest_preimage(history_state(*b.g, psi_target), rate);
        b.label = "dishonest_preimage(rate=" + fmt(rate) + ")";
    } else if (kind == "biased_sampler") {
        check_keys(s, "strategy", {"kind", "state"});
        b.prover = ClassicalProver::biased_sampler(
            history_state(*b.g, aligned(resolve_distribution(s.value("state", json()), b.dc, "strategy.state"))));
        b.label = "biased_sampler(" + describe(s.value("state", json())) + ")";
    } else {
        throw ConfigError("unknown classical strategy '" + kind + "'");
    }
    return b;
}

Distribution conditioned_distribution(const StateVector &state, const HistoryLayout &layout) {
    auto [w, prob] = conditioned_adv_weights(state, layout);
    if (prob <= 0) {
        throw std::domain_error("conditioning event has zero probability");
    }
    for (double &x : w) {
        x /= prob;
    }
    return Distribution::from_dense(layout.n, w);
}

RunResult run_one(const Built &b, std::uint64_t index) {
    RunResult res{index, substream(RngStream(b.config.seed), index, Purpose::kMetaRun).next_u64(), {}, false,
                  std::numeric_limits<double>::quiet_NaN()};
    ProtocolParams params = b.params;
    params.seed = res.seed;
    if (const auto *qp = std::get_if<QuantumProver>(&b.prover)) {
        res.verdict = b.config.model == Model::kQuantum ? run_quantum_verifier(*b.g, params, *qp)
                                                        : run_noniid_verifier(*b.g, params, *qp);
        res.accepted = res.verdict.accepted();
        if (res.verdict.outcome != Outcome::kError) {
            res.dh_implied = hellinger(implied_distribution(*qp, res.verdict), b.dc);
        }
    } else if (const auto *hp = std::get_if<HistoryProver>(&b.prover)) {
        res.verdict = run_constant_memory(*b.g, *b.h, params, *hp);
        res.accepted = res.verdict.accepted();
        try {
            res.dh_implied = hellinger(hp->implied_distribution(), b.dc);
        } catch (const std::exception &) {
        }
    } else if (const auto *cp = std::get_if<ClassicalProver>(&b.prover)) {
        res.verdict = run_classical(*b.xz, params, b.config.key_bits, *cp);
        Thresholds th = thresholds(b.config.eta, b.g->t_prime());
        res.accepted = res.verdict.accepted() && res.verdict.p_estimate >= th.p_min &&
                       res.verdict.energy_estimate <= th.energy_max;
        try {
            res.dh_implied = hellinger(conditioned_distribution(cp->logical_state(), *b.xz->layout), b.dc);
        } catch (const std::exception &) {
        }
    }
    return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig &config, int jobs) {
    Built b = [&] {
        try {
            return build(config);
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
    }();
    ExperimentResult out{config, b.label, b.rounds, b.dc.num_bits(), {}};
    out.runs.resize(config.meta_runs);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t i = next++; i < config.meta_runs; i = next++) {
            out.runs[i] = run_one(b, i);
        }
    };
    int threads = static_cast<int>(std::min<std::uint64_t>(std::max(1, jobs), config.meta_runs));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; t++) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    return out;
}

std::string csv_rows(const ExperimentResult &result) {
    const ExperimentConfig &c = result.config;
    std::ostringstream os;
    for (const auto &r : result.runs) {
        std::string accepted = r.verdict.outcome == Outcome::kError ? "error" : (r.accepted ? "1" : "0");
        os << r.seed << ',' << model_name(c.model) << ",\"" << result.strategy_label << "\"," << fmt(c.eta) << ','
           << fmt(c.delta) << ',' << c.k << ',' << result.rounds << ',' << accepted << ','
           << fmt(r.verdict.p_estimate) << ',' << fmt(r.verdict.energy_estimate) << ',' << r.verdict.samples.size()
           << ',' << fmt(r.dh_implied) << '\n';
    }
    return os.str();
}

std::string jsonl_records(const ExperimentResult &result) {
    const ExperimentConfig &c = result.config;
    std::ostringstream os;
    for (const auto &r : result.runs) {
        for (const auto &rec : r.verdict.transcript) {
            json j = rec;
            j["record"] = "round";
            j["run"] = r.index;
            os << j.dump() << '\n';
        }
        const Verdict &v = r.verdict;
        json s = {{"record", "summary"},
                  {"schema_version", kOutputSchemaVersion},
                  {"run", r.index},
                  {"seed", r.seed},
                  {"model", model_name(c.model)},
                  {"strategy", result.strategy_label},
                  {"eta", c.eta},
                  {"delta", c.delta},
                  {"K", c.k},
                  {"N", result.rounds},
                  {"outcome", outcome_name(v.outcome)},
                  {"accepted", r.accepted},
                  {"message", v.message},
                  {"p", v.p_estimate},
                  {"gamma", v.energy_estimate},
                  {"gamma_sigma", v.energy_sigma},
                  {"n1", v.n1},
                  {"n2", v.n2},
                  {"n3", v.n3},
                  {"S_size", v.samples.size()},
                  {"dH_implied", std::isnan(r.dh_implied) ? json() : json(r.dh_implied)}};
        if (v.selected) {
            s["selected"] = to_bitstring(*v.selected, result.sample_bits);
        }
        os << s.dump() << '\n';
    }
    return os.str();
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig &config) {
    if (config.sweep.is_null()) {
        return {config};
    }
    json base;
    to_json(base, config);
    base.erase("sweep");
    std::vector<json> grid{base};
    for (const auto &[path, values] : config.sweep.items()) {
        std::string pointer = "/" + path;
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        std::vector<json> next;
        for (const auto &g : grid) {
            for (const auto &v : values) {
                json copy = g;
                try {
                    copy[json::json_pointer(pointer)] = v;
                } catch (const json::exception &e) {
                    throw ConfigError("sweep path '" + path + "': " + e.what());
                }
                next.push_back(std::move(copy));
            }
        }
        grid = std::move(next);
    }
    std::vector<ExperimentConfig> out;
    for (const auto &g : grid) {
        ExperimentConfig c = config_from_json(g);
        c.base_dir = config.base_dir;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace certsamp
