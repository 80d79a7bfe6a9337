#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "certsamp/protocols.h"

namespace certsamp {

/// Bumped whenever a CSV column or JSONL summary field changes meaning.
inline constexpr int kOutputSchemaVersion = 1;
inline constexpr const char *kCsvHeader = "seed,model,strategy,eta,delta,K,N,accepted,p,gamma,S_size,dH_implied";

class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class Model { kQuantum, kNonIid, kHistory, kClassical };
std::string model_name(Model m);
Model model_from_name(const std::string &name);

/// Experiment description. Everything the run needs is in here, so the same
/// config and seed reproduce the same bytes. See README for the JSON schema.
struct ExperimentConfig {
    Model model = Model::kQuantum;
    /// Circuit JSON (inline) or {"file": path} or {"random": {n, T, seed}}.
    nlohmann::json circuit;
    /// Distribution the honest prover samples from:
    /// {"kind": "circuit"} (D = D_C), {"kind": "distance", "value": x}
    /// (D on the segment toward a point mass at d_H = x from D_C), or
    /// {"kind": "explicit", "dist": {...}}.
    nlohmann::json target = {{"kind", "circuit"}};
    /// {"kind": ..., params}; state references use the same forms as target.
    nlohmann::json strategy = {{"kind", "honest"}};
    double eta = 0.1;
    double delta = 0.1;
    std::uint64_t k = 1;
    std::optional<std::uint64_t> rounds;
    std::string energy_measurement = "eigenbasis";
    int key_bits = 3;
    std::uint64_t meta_runs = 1;
    std::uint64_t seed = 0;
    bool record_transcript = false;
    std::string jsonl = "runs.jsonl";
    std::string csv = "summary.csv";
    /// Optional grid for `sweep`: dotted config paths to value lists.
    nlohmann::json sweep;
    /// Directory that relative file references resolve against.
    std::string base_dir = ".";

    bool operator==(const ExperimentConfig &) const = default;
};

void to_json(nlohmann::json &j, const ExperimentConfig &c);
/// Throws ConfigError on unknown keys, wrong types, or out-of-range values.
ExperimentConfig config_from_json(const nlohmann::json &j);
ExperimentConfig load_config(const std::string &path);

struct RunResult {
    std::uint64_t index;
    std::uint64_t seed;
    Verdict verdict;
    /// Classical model: whether the post-hoc thresholds hold.
    bool accepted;
    double dh_implied;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string strategy_label;
    std::uint64_t rounds;
    /// Bit width of the harvested samples.
    int sample_bits;
    std::vector<RunResult> runs;
};

/// Builds every object the config describes, then runs meta_runs protocol
/// executions on `jobs` worker threads. Results are ordered by run index.
/// Throws ConfigError when the config is inconsistent or the system would
/// exceed the simulation cap.
ExperimentResult run_experiment(const ExperimentConfig &config, int jobs = 1);

/// One CSV row per run, no header.
std::string csv_rows(const ExperimentResult &result);
/// Round records (when recorded) followed by one summary record per run.
std::string jsonl_records(const ExperimentResult &result);

/// The cartesian grid of `config.sweep`, each entry a full config with the
/// swept paths substituted.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig &config);

}  // namespace certsamp
