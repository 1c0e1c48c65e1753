#pragma once

#include <vector>

#include "mfollow/cost.hpp"
#include "mfollow/scenario_tree.hpp"

namespace mfollow {

/// Adjoint of the control problem at a plan:
///   Y_nu = f(t_nu) + E[ sum_{j >= i(nu)} grad_h(L_j, A_j) dt + grad_g(L_T, A_T) | nu ],
/// computed by one backward pass. nodeProbability * Y is the exact gradient
/// of expected_cost in each node increment; Y_root is the gradient in the
/// initial jump.
AdaptedProcess compute_adjoint(const ScenarioTree& tree, const CostSpec& spec,
                               const ControlPlan& plan);

/// Residuals of the three first-order conditions at a plan. A plan is
/// certified when every residual is at or below the tolerance; the pathwise
/// complementarity form is the certifying one.
struct FBSDECertificate {
    double negativity_residual = 0.0;        // max(0, -min Y)
    double complementarity_residual = 0.0;   // |E <Y, dA>|
    double complementarity_pathwise = 0.0;   // max over nodes of |Y . dA|
    double martingale_defect = 0.0;          // one-step defect of Y + N - f
    double terminal_defect = 0.0;            // max |Y_T - f(T) - grad_g|
    bool admissibility_checked = false;
    double tolerance = 0.0;
    bool certified = false;
};

FBSDECertificate certify(const ScenarioTree& tree, const CostSpec& spec,
                         const ControlPlan& plan, double tolerance);

/// Lower bound on a competitor's cost from the subgradient chain:
///   J(competitor) >= J(plan) + E<Y, dA'> - E<Y, dA>.
/// Returns the evaluated right side.
double optimality_gap_bound(const ScenarioTree& tree, const CostSpec& spec,
                            const ControlPlan& plan, const AdaptedProcess& adjoint,
                            const ControlPlan& competitor);

/// Both sides of the capped first-order identity
///   n * E[ sum (Y_i)^- dt_i ] = -E[ sum Y_i dA_i ]
/// (right-endpoint grid sums pair each increment with the step that ends at
/// its node) plus the box-KKT decomposition residual: (Y)^+ at capped
/// nodes, (Y)^- at zero nodes, |Y| at interior ones.
struct CappedKktReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double identity_gap = 0.0;
    double box_residual = 0.0;
};

CappedKktReport capped_kkt_identities(const ScenarioTree& tree, const CostSpec& spec,
                                      const ControlPlan& capped_plan, double cap_rate);

/// E[ sum (Y^{[n]})^- dt ] per ladder rung; tends to zero as the cap grows
/// on coercive problems.
std::vector<double> prop206b_limit_trace(const ScenarioTree& tree, const CostSpec& spec,
                                         const std::vector<ControlPlan>& capped_plans);

/// E[ sum (Y)^- dt ] for one plan (right-endpoint rule).
double negative_part_time_integral(const ScenarioTree& tree, const AdaptedProcess& adjoint);

} // namespace mfollow
