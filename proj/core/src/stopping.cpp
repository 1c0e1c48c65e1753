#include "mfollow/stopping.hpp"

#include <algorithm>
#include <cmath>

#include "mfollow/errors.hpp"

namespace mfollow {

AdaptedProcess payoff_process(const ScenarioTree& tree, const CostSpec& spec, PayoffForm form) {
    if (spec.k != 1)
        throw precondition_error("payoff_process: the stopping problem needs k = 1");
    if (!spec.has_gradients())
        throw precondition_error("payoff_process: gradients required");

    if (form == PayoffForm::FromProof)
        return compute_adjoint(tree, spec, ControlPlan::zero(tree, 1));

    // Display form: f(t) + g_a(L_t, 0) + E[ sum_{j >= i} h_a(L_j, 0) dt | . ].
    const TimeGrid& grid = tree.grid();
    const std::size_t last = grid.num_times() - 1;
    AdaptedProcess z(tree, 1);
    std::vector<double> zero(1, 0.0), buf(1);
    for (std::size_t i = last + 1; i-- > 0;) {
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            double tail = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                tail += n.child_probs[c] * z.at(n.children[c])[0];
            if (i < last) {
                spec.grad_h(tree.l_value(id), {zero.data(), 1}, {buf.data(), 1});
                tail += buf[0] * grid.dt(i + 1);
            }
            z.at(id)[0] = tail;
        }
    }
    // The tail recursion above stored E[ sum h_a dt | . ]; add f and g_a at
    // the node itself.
    for (std::size_t i = 0; i <= last; ++i) {
        const auto fv = spec.f_at(grid.time(i));
        for (std::size_t id : tree.slice(i)) {
            spec.grad_g(tree.l_value(id), {zero.data(), 1}, {buf.data(), 1});
            z.at(id)[0] += fv[0] + buf[0];
        }
    }
    return z;
}

SnellEnvelope snell_min(const ScenarioTree& tree, const AdaptedProcess& z) {
    if (z.dim() != 1)
        throw precondition_error("snell_min: payoff must be scalar");
    const std::size_t last = tree.num_slices() - 1;

    SnellEnvelope out{AdaptedProcess(tree, 1), std::vector<bool>(tree.num_nodes(), false), 0.0};
    for (std::size_t id : tree.slice(last)) {
        const double zv = z.at(id)[0];
        out.envelope.at(id)[0] = std::min(zv, 0.0);
        out.stop_region[id] = zv <= 0.0;
    }
    for (std::size_t i = last; i-- > 0;) {
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            double continuation = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                continuation += n.child_probs[c] * out.envelope.at(n.children[c])[0];
            const double zv = z.at(id)[0];
            out.envelope.at(id)[0] = std::min(zv, continuation);
            out.stop_region[id] = zv <= continuation;
        }
    }
    out.root_value = out.envelope.at(tree.root())[0];
    return out;
}

StoppingPolicy policy_from_region(const ScenarioTree& tree, const std::vector<bool>& region) {
    StoppingPolicy policy;
    for (const PathSample& path : enumerate_paths(tree)) {
        std::size_t stop = StoppingPolicy::kNever;
        for (std::size_t i = 0; i < path.node_ids.size(); ++i)
            if (region[path.node_ids[i]]) {
                stop = i;
                break;
            }
        policy.stop_index.push_back(stop);
    }
    return policy;
}

StoppingPolicy tau_from_control(const ControlPlan& plan) {
    if (plan.k != 1)
        throw precondition_error("tau_from_control: needs k = 1");
    const ScenarioTree& tree = *plan.tree;
    StoppingPolicy policy;
    for (const PathSample& path : enumerate_paths(tree)) {
        std::size_t stop = StoppingPolicy::kNever;
        double mass = plan.initial_jump[0];
        if (mass > 0.0) {
            stop = 0;  // the initial jump acts at t = 0
        } else {
            for (std::size_t i = 1; i < path.node_ids.size(); ++i) {
                mass += plan.increments[path.node_ids[i]][0];
                if (mass > 0.0) {
                    stop = i;
                    break;
                }
            }
        }
        policy.stop_index.push_back(stop);
    }
    return policy;
}

double stopping_value(const ScenarioTree& tree, const AdaptedProcess& z,
                      const StoppingPolicy& policy) {
    const auto paths = enumerate_paths(tree);
    if (policy.stop_index.size() != paths.size())
        throw dimension_error("stopping_value: policy does not match the tree's paths");
    double acc = 0.0;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const std::size_t stop = policy.stop_index[p];
        if (stop == StoppingPolicy::kNever)
            continue;
        acc += paths[p].probability * z.at(paths[p].node_ids[stop])[0];
    }
    return acc;
}

EquivalenceReport equivalence_check(const ScenarioTree& tree, const CostSpec& spec,
                                    const ControlPlan& certified_plan, double tolerance) {
    if (spec.k != 1)
        throw precondition_error("equivalence_check: needs k = 1");
    const FBSDECertificate cert = certify(tree, spec, certified_plan, tolerance);
    if (!cert.certified)
        throw precondition_error(
            "equivalence_check: plan fails the first-order certificate at this tolerance");

    const AdaptedProcess z = payoff_process(tree, spec, PayoffForm::FromProof);
    const SnellEnvelope snell = snell_min(tree, z);
    const StoppingPolicy tau = tau_from_control(certified_plan);

    EquivalenceReport report;
    report.control_stop_value = stopping_value(tree, z, tau);
    report.snell_value = snell.root_value;

    const AdaptedProcess y = compute_adjoint(tree, spec, certified_plan);
    report.proof_bound = z.at(tree.root())[0] - y.at(tree.root())[0];

    report.value_matches_snell =
        std::abs(report.control_stop_value - report.snell_value) <= tolerance;
    report.value_matches_bound =
        std::abs(report.control_stop_value - report.proof_bound) <= tolerance;
    report.passed = report.value_matches_snell && report.value_matches_bound;
    return report;
}

} // namespace mfollow
