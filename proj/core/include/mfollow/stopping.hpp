#pragma once

#include <vector>

#include "mfollow/cost.hpp"
#include "mfollow/pontryagin.hpp"
#include "mfollow/scenario_tree.hpp"

namespace mfollow {

/// Which payoff the stopping problem uses. FromProof evaluates the
/// subgradient at the zero plan, whose terminal term is grad_g(L_T, 0);
/// FromDisplay charges g_a at the stopped value of L instead. The two are
/// not claimed equivalent; FromProof is the one the control/stopping
/// equivalence is stated for.
enum class PayoffForm { FromProof, FromDisplay };

/// Stopping payoff Z (k = 1): Z equals the adjoint at the zero plan, so
/// stopping at nu pays f(t_nu) + E[ tail of h_a(.,0) dt + g_a(L_T,0) | nu ].
AdaptedProcess payoff_process(const ScenarioTree& tree, const CostSpec& spec,
                              PayoffForm form = PayoffForm::FromProof);

/// Minimizing Snell envelope with a never-stop option worth 0:
/// U_T = min(Z_T, 0), U = min(Z, E[U | .]) backwards.
struct SnellEnvelope {
    AdaptedProcess envelope;
    std::vector<bool> stop_region;  // per node id
    double root_value = 0.0;
};

SnellEnvelope snell_min(const ScenarioTree& tree, const AdaptedProcess& z);

/// First-entry stopping policy: per leaf path, the time index at which to
/// stop, or "never".
struct StoppingPolicy {
    static constexpr std::size_t kNever = static_cast<std::size_t>(-1);
    std::vector<std::size_t> stop_index;  // per path, kNever if no stop
};

StoppingPolicy policy_from_region(const ScenarioTree& tree, const std::vector<bool>& region);

/// tau_A = first time cumulative A exceeds zero; the initial jump maps to
/// t = 0.
StoppingPolicy tau_from_control(const ControlPlan& plan);

/// E[ Z_tau 1{tau finite} ] by path enumeration.
double stopping_value(const ScenarioTree& tree, const AdaptedProcess& z,
                      const StoppingPolicy& policy);

struct EquivalenceReport {
    double control_stop_value = 0.0;  // E[Z_tau] at tau from the certified plan
    double snell_value = 0.0;         // U_root
    double proof_bound = 0.0;         // E[dC(L,0)_0] - Y_0 at the plan
    bool value_matches_snell = false;
    bool value_matches_bound = false;
    bool passed = false;
};

/// The control-to-stopping equivalence at a certified plan: the stopping
/// time extracted from the plan must attain the Snell value, and both must
/// agree with the bound E[dC(L,0)_0 - Y_0] read off the maximum principle.
EquivalenceReport equivalence_check(const ScenarioTree& tree, const CostSpec& spec,
                                    const ControlPlan& certified_plan, double tolerance);

} // namespace mfollow
