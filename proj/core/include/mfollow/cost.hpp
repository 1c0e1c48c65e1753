#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfollow/scenario_tree.hpp"

namespace mfollow {

/// The triple (f, h, g): f >= 0 prices control mass over time, h is the
/// running cost, g the terminal cost; h(l,.) and g(l,.) convex on [0,inf)^k.
/// Gradients are taken in the control argument a.
struct CostSpec {
    std::size_t k = 1;  // control dimension
    std::size_t d = 1;  // target dimension

    std::function<void(double t, std::span<double> out)> f;
    std::function<double(std::span<const double> l, std::span<const double> a)> h;
    std::function<double(std::span<const double> l, std::span<const double> a)> g;
    std::function<void(std::span<const double> l, std::span<const double> a,
                       std::span<double> out)> grad_h;
    std::function<void(std::span<const double> l, std::span<const double> a,
                       std::span<double> out)> grad_g;

    // Coercivity and growth metadata. f_lower_bound is the declared
    // componentwise lower bound c >= 0 of f; linear_growth_certified marks a
    // g whose declared envelope certifies linear coercivity on its own.
    double f_lower_bound = 0.0;
    bool linear_growth_certified = false;
    std::optional<double> growth_p;
    std::optional<double> growth_q;

    std::string name = "custom";

    bool has_gradients() const { return static_cast<bool>(grad_h) && static_cast<bool>(grad_g); }
    std::vector<double> f_at(double t) const;
};

/// Built-in cost library. Known names: "zero", "quadratic_tracking"
/// (params: f_const), "exponential", "absolute_tracking" (params: f_const,
/// f_slope). Throws config_error on unknown names or parameters.
CostSpec make_cost_spec(const std::string& name, const std::map<std::string, double>& params,
                        std::size_t k = 1, std::size_t d = 1);

/// Register a named spec factory so config files can select custom costs.
void register_cost_spec(const std::string& name,
                        std::function<CostSpec(const std::map<std::string, double>&,
                                               std::size_t, std::size_t)> factory);

struct AuditReport {
    bool passed = true;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
};

/// Probe-grid audit: f >= 0 on the grid times, h and g >= 0 and midpoint
/// convex at probe points, gradients within 1e-5 relative of central
/// differences. Probe offsets dodge the |.| kink. Growth metadata only
/// produces warnings.
AuditReport audit_cost_spec(const CostSpec& spec, const ScenarioTree& tree);

/// Adapted, componentwise nondecreasing follower: a nonnegative initial
/// jump at the root's pre-time slot plus nonnegative per-node increments
/// applied at each node's time. Root nodes carry no increment of their own;
/// the initial jump is the only mass at t = 0. Capped plans additionally
/// satisfy delta A <= lipschitz_rate * dt at every node and a zero initial
/// jump.
struct ControlPlan {
    const ScenarioTree* tree = nullptr;
    std::size_t k = 1;
    std::vector<double> initial_jump;            // R^k
    std::vector<std::vector<double>> increments; // per node id, R^k
    std::optional<double> lipschitz_rate;

    static ControlPlan zero(const ScenarioTree& tree, std::size_t k);

    std::span<const double> increment(std::size_t node) const {
        return {increments[node].data(), k};
    }
    /// Box upper bound at a node: rate * dt for capped plans (0 on the root
    /// slice), +inf otherwise.
    double cap_at(std::size_t node) const;
    /// Cumulative A along the path to (and including) the node.
    std::vector<double> cumulative_at(std::size_t node) const;
    void validate() const;
};

/// Signed perturbation of a plan (paths of finite variation).
struct PlanDelta {
    std::size_t k = 1;
    std::vector<double> initial_jump;
    std::vector<std::vector<double>> increments;
};

/// Per-path control data: initial jump plus one increment row per step.
struct PathIncrements {
    std::vector<double> initial_jump;              // R^k
    std::vector<std::vector<double>> increments;   // rows for t_1..t_M
};

/// Restriction of a plan to one root-to-leaf path.
PathIncrements plan_on_path(const ControlPlan& plan, const PathSample& path);

/// Cumulative A as an adapted process: value at a node is the initial jump
/// plus all increments along the root path, the node's own included.
AdaptedProcess cumulative_process(const ScenarioTree& tree, const ControlPlan& plan);

/// Cumulative A values at t_0..t_M for a path control.
std::vector<std::vector<double>> cumulative_path(const PathIncrements& inc);

/// C(L, A) = int f dA + int h(L_t, A_t) dt + g(L_T, A_T). The dA integral
/// uses the initial-jump convention, the dt integral the left-endpoint rule
/// (the value at t_i is held on (t_i, t_{i+1}]).
double pathwise_cost(const CostSpec& spec, const TimeGrid& grid,
                     const std::vector<std::vector<double>>& l_values,
                     const PathIncrements& inc);
double pathwise_cost(const CostSpec& spec, const PathSample& path, const ControlPlan& plan);

/// J = E[C(L, A)]: probability-weighted pathwise cost, accumulated node by
/// node in ascending id order (bit-identical to leaf enumeration).
double expected_cost(const CostSpec& spec, const ScenarioTree& tree, const ControlPlan& plan);

/// The subgradient process along one path:
/// dC_t = f(t) + sum_{s in [t,T)} grad_h(L_s, A_s) ds + grad_g(L_T, A_T),
/// with the same left-endpoint rule as pathwise_cost.
struct SubgradientPath {
    std::vector<std::vector<double>> values; // per time, R^k
};
SubgradientPath subgradient_process(const CostSpec& spec, const TimeGrid& grid,
                                    const std::vector<std::vector<double>>& l_values,
                                    const PathIncrements& inc);
SubgradientPath subgradient_process(const CostSpec& spec, const PathSample& path,
                                    const ControlPlan& plan);

/// <X, Delta> = X_0 dDelta_init + sum X_{t_i} dDelta_i (Stieltjes pairing
/// under the initial-jump convention).
double pairing(const TimeGrid& grid, const std::vector<std::vector<double>>& x,
               const std::vector<double>& delta_initial,
               const std::vector<std::vector<double>>& delta_increments);

struct SubgradientCheckRow {
    std::size_t path_index = 0;
    double lhs = 0.0;  // C(L, A + Delta)
    double rhs = 0.0;  // C(L, A) + <dC(L,A), Delta>
    bool violated = false;
};
struct SubgradientCheckReport {
    std::vector<SubgradientCheckRow> rows;
    double worst_violation = 0.0;  // max(rhs - lhs, 0)
    bool passed = true;
};

/// Pathwise check of C(L, A+Delta) >= C(L, A) + <dC(L,A), Delta> with
/// violations flagged beyond 1e-9. Requires A + Delta to stay a monotone
/// plan.
SubgradientCheckReport subgradient_inequality_check(const CostSpec& spec,
                                                    const ScenarioTree& tree,
                                                    const ControlPlan& plan,
                                                    const PlanDelta& delta);

} // namespace mfollow
