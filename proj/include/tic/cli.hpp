#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tic {

using Json = nlohmann::ordered_json;

// One pass/fail entry of an experiment report: `pass` is `value op tol`.
struct Check {
    std::string name;
    double value = 0.0;
    std::string op; // "<=" or ">="
    double tol = 0.0;
    bool pass = false;
};

// Parsed run configuration.  The grid/solver/model blocks keep their JSON
// form; each experiment merges them over its own defaults, so a config may
// specify only the keys it wants to change.  Schema:
//   { "experiment": "<tag>", "grid": {...}, "solver": {...},
//     "model": {"name": "...", "params": {...}},
//     "output_dir": "path", "seed": 0 }
// grid keys: T, ns, ny, y_min, y_max, closure
//   (closure: periodic | dirichlet-from-data | extrapolate |
//    extrapolate-quadratic; periodic grids treat [y_min, y_max) as one
//    period).
// solver keys are experiment-specific; all tolerances must be > 0.
struct RunConfig {
    std::string experiment;
    Json grid = Json::object();
    Json solver = Json::object();
    Json model = Json::object();
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    bool verbose = false;
    int threads = 1;

    // recognized tag, registered model name, positive tolerances; throws
    // ConfigError naming the offending key
    void validate() const;
};

// Throws ConfigError on unreadable files, malformed JSON, or a missing
// "experiment" key.
RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::string& path);

const std::vector<std::string>& experiment_tags();
// Built-in model table (name, coefficients, nonlinearity), stable order.
std::string list_registry();

struct RunReport {
    std::vector<Check> checks;
    bool pass = false;
    Json results; // the results.json payload
};

// Execute the experiment and write results.json, CSV surfaces, and binary
// fields into `out_dir` (which must exist).  Throws ConfigError / SolverError.
RunReport run_experiment(const RunConfig& cfg, const std::string& out_dir);

// Full artifact run with atomic output: writes into <output_dir>.tmp, then
// renames over <output_dir>.  Returns the process exit status: 0 all checks
// pass, 1 solver failure or failed check, 2 config/schema error.  Nothing is
// written on status 2.
int run_from_file(const std::string& config_path,
                  const std::string& output_dir_override = "",
                  bool verbose = false, int threads = 1);

} // namespace tic
