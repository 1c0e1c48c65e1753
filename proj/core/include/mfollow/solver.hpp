#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfollow/cost.hpp"
#include "mfollow/meyer_zheng.hpp"
#include "mfollow/scenario_tree.hpp"

namespace mfollow {

struct SolveOptions {
    std::size_t max_iterations = 20000;
    double grad_tolerance = 1e-9;     // KKT residual target, in adjoint units
    double step_initial = 1.0;        // first trial step of the line search
    double step_shrink = 0.5;         // backtracking factor, in (0,1)
    double step_grow = 2.0;           // growth of the trial step after acceptance
    double step_max = 1e4;            // ceiling on the trial step
    double armijo_c = 1e-4;           // sufficient-decrease constant
    std::uint64_t seed = 0;           // reserved; the solver itself is deterministic
    bool waive_coercivity = false;
    bool record_trace = false;

    void validate() const;
};

struct SolveReport {
    double value = 0.0;
    std::size_t iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    bool coercivity_verified = false;
    std::vector<double> value_trace;  // populated when record_trace is set
};

struct CoercivityReport {
    bool coercive = false;
    double constant = 0.0;  // the certified kappa when coercive
    std::string explanation;
};

/// Linear coercivity screen: passes when f is bounded away from zero on the
/// grid by the declared lower bound, or when g's declared envelope
/// certifies linear growth.
CoercivityReport check_coercivity(const CostSpec& spec, const ScenarioTree& tree);

/// Minimise J over plans with 0 <= dA <= n * dt_i per node and no initial
/// jump. Projected gradient on the box, preconditioned so steps and
/// residuals live in adjoint units; backtracking line search guarantees a
/// nonincreasing value trace. Nonconvergence is reported, not thrown.
std::pair<ControlPlan, SolveReport> solve_capped(const ScenarioTree& tree, const CostSpec& spec,
                                                 double cap_rate, const SolveOptions& opts);

/// Minimise J over dA >= 0 with an initial jump allowed. Requires the
/// coercivity screen to pass unless the caller waives it, in which case
/// divergence shows up as converged = false with the value trace attached.
std::pair<ControlPlan, SolveReport> solve_uncapped(const ScenarioTree& tree, const CostSpec& spec,
                                                   const SolveOptions& opts);

struct LadderReport {
    std::vector<double> caps;
    std::vector<double> values;
    std::vector<std::size_t> iterations;
    std::vector<bool> rung_converged;
    double uncapped_value = 0.0;
    bool uncapped_converged = false;
    /// Distances from each capped optimizer (Lipschitz embedding at its
    /// rate) to the uncapped one (step embedding), on the comparison grid.
    std::vector<double> pseudopath_gaps;
    std::vector<double> sup_gaps;
    std::vector<double> successive_gaps;
    /// E[ sum (Y^{[n]})^- dt ] per rung.
    std::vector<double> y_negative_integrals;

    std::vector<ControlPlan> capped_plans;
    ControlPlan uncapped_plan;
};

struct LadderOptions {
    SolveOptions solve;
    std::size_t comparison_steps = 100;  // grid used for embedding distances
};

/// Solve the capped problems along an increasing cap list, warm-starting
/// each rung from the previous optimizer, then the uncapped problem; attach
/// embedding distances and the capped first-order traces.
LadderReport run_ladder(const ScenarioTree& tree, const CostSpec& spec,
                        const std::vector<double>& caps, const LadderOptions& opts);

/// Per-leaf control paths of a plan (k = 1): cumulative A at every grid
/// time along each root-to-leaf path, with the leaf probability.
std::vector<std::pair<double, GridPath>> control_grid_paths(const ScenarioTree& tree,
                                                            const ControlPlan& plan);

} // namespace mfollow
