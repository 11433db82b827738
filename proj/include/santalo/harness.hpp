#pragma once

#include "santalo/common.hpp"
#include "santalo/ledger.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace santalo::harness {

// Two-column plot data, written as "<experiment>__<name>.dat".
struct PlotSeries {
    std::string name;
    std::string x_label, y_label;
    std::vector<double> x, y;
};

struct ExperimentResult {
    std::vector<Ledger> ledgers;
    std::vector<PlotSeries> plots;
    nlohmann::json metrics = nlohmann::json::object();
};

// A registered experiment. Parameters not listed in `defaults` are rejected;
// the report echoes the merged parameters so no tolerance is implicit.
struct ExperimentKind {
    std::string name;
    std::string module;
    std::string description;
    bool randomized = false;
    nlohmann::json defaults;
    std::function<ExperimentResult(const nlohmann::json& params, std::uint64_t seed)> run;
    // Range checks on the merged parameters; throws ConfigInvalid("<field>: ...").
    std::function<void(const nlohmann::json& params)> check;
};
const std::vector<ExperimentKind>& registry();
const ExperimentKind& find_kind(const std::string& name);  // ConfigInvalid if unknown

struct ExperimentConfig {
    std::string name;  // unique within a run; defaults to the kind
    std::string kind;
    nlohmann::json params;  // merged with the defaults
    std::optional<std::uint64_t> seed;
};

struct RunConfig {
    std::string name;
    std::vector<ExperimentConfig> experiments;
    std::string out_dir;  // empty: caller decides
    nlohmann::json source;  // the config as written
};

// {"name": .., "out": .., "seed": .., "experiments": [{"kind": .., "name": ..,
//  "seed": .., "params": {..}}]}; a single experiment may be given inline with
// "kind" and "params" at the top level. Keys starting with "_" are notes.
// Errors carry the line and column (syntax) or the field path (content).
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

struct ExperimentReport {
    ExperimentConfig config;
    std::uint64_t seed = 0;
    ExperimentResult result;
    double seconds = 0.0;
    std::string error;  // non-empty when the experiment threw
};

struct RunReport {
    std::string name;
    nlohmann::json config;
    std::vector<ExperimentReport> experiments;  // ordered by experiment name
    double seconds = 0.0;
    std::string input_hash;  // sha256 of the canonical config
    nlohmann::json versions;

    std::vector<Ledger> ledgers() const;
    int count(Verdict v) const;
    nlohmann::json to_json() const;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

// SANTALO_LAB_SEED, if set; ConfigInvalid when it is not an unsigned integer.
std::optional<std::uint64_t> seed_from_env();

// Experiment errors become Skipped rows named "<experiment>/error"; siblings
// keep running.
RunReport run(const RunConfig& config, const RunOptions& options = {});

// report.json, ledgers.csv, ledgers.jsonl and plots/*.dat. ledgers.csv holds
// no timings, so equal configs give equal bytes.
void write_outputs(const RunReport& report, const std::string& dir);
std::string summary_table(const RunReport& report);
// 0: no Violated rows, 2: some Violated row.
int exit_code(const RunReport& report);

std::vector<std::string> suite_names();
RunConfig suite(const std::string& name);  // UnknownSuite

}  // namespace santalo::harness
