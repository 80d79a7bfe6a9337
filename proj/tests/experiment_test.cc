#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "certsamp/experiment.h"

namespace certsamp {
namespace {

using nlohmann::json;

json quantum_config() {
    return json::parse(R"({
        "model": "quantum",
        "circuit": {"random": {"n": 2, "T": 2, "seed": 5}},
        "target": {"kind": "distance", "value": 0.05},
        "strategy": {"kind": "honest"},
        "params": {"eta": 0.2, "delta": 0.1, "K": 5},
        "meta_runs": 12,
        "seed": 99
    })");
}

TEST(Config, RoundTripIsIdentity) {
    ExperimentConfig c = config_from_json(quantum_config());
    json once = c;
    ExperimentConfig again = config_from_json(once);
    EXPECT_EQ(again, c);
    json twice = again;
    EXPECT_EQ(twice, once);
}

TEST(Config, RoundTripWithOptionalFields) {
    json j = quantum_config();
    j["params"]["N"] = 1234;
    j["params"]["energy_measurement"] = "pauli";
    j["record_transcript"] = true;
    j["outputs"] = {{"jsonl", "a.jsonl"}, {"csv", "b.csv"}};
    j["sweep"] = {{"params.eta", {0.1, 0.2}}};
    ExperimentConfig c = config_from_json(j);
    EXPECT_EQ(c.rounds, 1234U);
    EXPECT_EQ(config_from_json(json(c)), c);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    json j = quantum_config();
    j["colour"] = "blue";
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = quantum_config();
    j["params"]["eta"] = 0.9;
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = quantum_config();
    j["model"] = "telepathic";
    EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, SimulationCapIsAConfigError) {
    json j = quantum_config();
    j["model"] = "history";
    j["circuit"] = {{"random", {{"n", 3}, {"T", 2}, {"seed", 1}}}};
    j["meta_runs"] = 1;
    try {
        run_experiment(config_from_json(j));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("24"), std::string::npos);
    }
}

TEST(Experiment, CsvShape) {
    ExperimentResult r = run_experiment(config_from_json(quantum_config()));
    std::string rows = csv_rows(r);
    std::istringstream in(rows);
    std::string line;
    int count = 0, accepted = 0;
    while (std::getline(in, line)) {
        count++;
        EXPECT_NE(line.find(",quantum,"), std::string::npos);
        accepted += r.runs[static_cast<size_t>(count - 1)].accepted ? 1 : 0;
    }
    EXPECT_EQ(count, 12);
    EXPECT_GE(accepted, 10);
    EXPECT_EQ(std::string(kCsvHeader), "seed,model,strategy,eta,delta,K,N,accepted,p,gamma,S_size,dH_implied");
}

TEST(Experiment, JsonlSummaryRecords) {
    ExperimentResult r = run_experiment(config_from_json(quantum_config()));
    std::istringstream in(jsonl_records(r));
    std::string line;
    int summaries = 0;
    while (std::getline(in, line)) {
        json rec = json::parse(line);
        if (rec.contains("schema_version")) {
            EXPECT_EQ(rec.at("schema_version"), kOutputSchemaVersion);
            summaries++;
        }
    }
    EXPECT_EQ(summaries, 12);
}

TEST(Experiment, DeterministicAcrossJobCounts) {
    for (const char *model : {"quantum", "noniid", "history", "classical"}) {
        json j = quantum_config();
        j["model"] = model;
        j["circuit"] = {{"random", {{"n", 1}, {"T", 1}, {"seed", 3}}}};
        j["params"]["N"] = 3000;
        j["meta_runs"] = 4;
        j["record_transcript"] = true;
        ExperimentConfig c = config_from_json(j);
        ExperimentResult a = run_experiment(c, 1);
        ExperimentResult b = run_experiment(c, 3);
        EXPECT_EQ(csv_rows(a), csv_rows(b)) << model;
        EXPECT_EQ(jsonl_records(a), jsonl_records(b)) << model;
    }
}

TEST(Experiment, SeedChangesOutput) {
    ExperimentConfig c = config_from_json(quantum_config());
    std::string a = csv_rows(run_experiment(c));
    c.seed += 1;
    EXPECT_NE(csv_rows(run_experiment(c)), a);
}

TEST(Sweep, CartesianGrid) {
    json j = quantum_config();
    j["sweep"] = {{"params.eta", {0.1, 0.2}}, {"target.value", {0.0, 0.1, 0.2}}};
    std::vector<ExperimentConfig> grid = expand_sweep(config_from_json(j));
    ASSERT_EQ(grid.size(), 6U);
    int hits = 0;
    for (const auto &g : grid) {
        hits += g.eta == 0.2 && g.target.at("value") == 0.1 ? 1 : 0;
    }
    EXPECT_EQ(hits, 1);
}

}  // namespace
}  // namespace certsamp
