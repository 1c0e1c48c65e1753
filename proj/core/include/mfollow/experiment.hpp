#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfollow/cost.hpp"
#include "mfollow/scenario_tree.hpp"
#include "mfollow/solver.hpp"
#include "mfollow/stopping.hpp"

namespace mfollow {

// Exit codes shared by the runners and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitCertificate = 4;

struct TreeConfig {
    std::string family;  // "lottery" | "binomial" | "ray"
    std::size_t steps = 1;
    double horizon = 1.0;
    double volatility = 1.0;
    double drift = 0.0;
    std::vector<double> l0 = {0.0};
    std::vector<std::pair<std::vector<double>, double>> support;
    std::optional<std::int64_t> seed;
};

struct CostConfig {
    std::string name;
    std::size_t k = 1;
    std::size_t d = 1;
    std::map<std::string, double> params;
};

struct LadderConfig {
    std::vector<double> caps;
    std::size_t comparison_steps = 100;
    double final_gap_target = 1e-4;
    double monotone_slack = 1e-8;
};

struct OutputConfig {
    std::string dir = ".";
    bool json_out = true;
    bool csv_out = true;
};

struct ExperimentConfig {
    TreeConfig tree;
    CostConfig cost;
    SolveOptions solver;
    std::optional<LadderConfig> ladder;
    PayoffForm payoff_form = PayoffForm::FromProof;
    OutputConfig outputs;
};

/// Parse and validate against the published schema; unknown keys are
/// rejected, types checked, defaults applied. Throws config_error.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

ScenarioTree build_tree(const TreeConfig& cfg);
CostSpec build_cost(const CostConfig& cfg);

struct RunSettings {
    std::string out_dir = ".";
    bool waive_coercivity = false;
    double tolerance = 1e-6;
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;  // suppress progress lines (tests)
};

int run_solve(const ExperimentConfig& config, const RunSettings& settings);
int run_ladder_experiment(const ExperimentConfig& config, const RunSettings& settings);
int run_stop(const ExperimentConfig& config, const RunSettings& settings);
int run_mzdist(const ExperimentConfig& config, const RunSettings& settings);

/// Reproduction experiments: "quadratic-terminal", "exp-nonattain",
/// "ray-counterexample".
int run_repro(const std::string& name, const RunSettings& settings);

/// Minimum pathwise cost over all nondecreasing controls on one path,
/// by dynamic programming over a value lattice of the given resolution.
/// This is the anticipative (per-path) relaxation used by the ray repro.
double anticipative_path_optimum(const CostSpec& spec, const TimeGrid& grid,
                                 const std::vector<std::vector<double>>& l_values,
                                 double level_max, double resolution);

/// Expectation of anticipative_path_optimum over all tree paths: a lower
/// bound for every admissible plan's expected cost.
double anticipative_tree_optimum(const CostSpec& spec, const ScenarioTree& tree,
                                 double level_max, double resolution);

} // namespace mfollow
