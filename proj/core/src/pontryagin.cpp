#include "mfollow/pontryagin.hpp"

#include <algorithm>
#include <cmath>

#include "mfollow/errors.hpp"

namespace mfollow {

AdaptedProcess compute_adjoint(const ScenarioTree& tree, const CostSpec& spec,
                               const ControlPlan& plan) {
    if (!spec.has_gradients())
        throw precondition_error("compute_adjoint: gradients required");
    if (plan.tree != &tree)
        throw precondition_error("compute_adjoint: plan does not live on this tree");

    const TimeGrid& grid = tree.grid();
    const std::size_t last = grid.num_times() - 1;
    const std::size_t k = spec.k;
    const AdaptedProcess a = cumulative_process(tree, plan);

    // G_nu = E[ tail of grad_h dt + grad_g | nu ], then Y = f + G.
    AdaptedProcess y(tree, k);
    std::vector<double> buf(k);
    for (std::size_t id : tree.slice(last)) {
        spec.grad_g(tree.l_value(id), a.at(id), {buf.data(), k});
        std::copy(buf.begin(), buf.end(), y.at(id).begin());
    }
    for (std::size_t i = last; i-- > 0;) {
        const double dt = grid.dt(i + 1);
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            auto dst = y.at(id);
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                auto ch = y.at(n.children[c]);
                const double q = n.child_probs[c];
                for (std::size_t j = 0; j < k; ++j)
                    dst[j] += q * ch[j];
            }
            spec.grad_h(tree.l_value(id), a.at(id), {buf.data(), k});
            for (std::size_t j = 0; j < k; ++j)
                dst[j] += buf[j] * dt;
        }
    }
    for (std::size_t i = 0; i <= last; ++i) {
        const auto fv = spec.f_at(grid.time(i));
        for (std::size_t id : tree.slice(i)) {
            auto dst = y.at(id);
            for (std::size_t j = 0; j < k; ++j)
                dst[j] += fv[j];
        }
    }
    return y;
}

FBSDECertificate certify(const ScenarioTree& tree, const CostSpec& spec,
                         const ControlPlan& plan, double tolerance) {
    plan.validate();
    const AdaptedProcess y = compute_adjoint(tree, spec, plan);
    const AdaptedProcess a = cumulative_process(tree, plan);
    const TimeGrid& grid = tree.grid();
    const std::size_t last = grid.num_times() - 1;
    const std::size_t k = spec.k;

    FBSDECertificate cert;
    cert.tolerance = tolerance;
    cert.admissibility_checked = true;  // plans on a tree are adapted by construction

    double min_y = 0.0;
    for (double v : y.raw())
        min_y = std::min(min_y, v);
    cert.negativity_residual = std::max(0.0, -min_y);

    // <Y, dA> in expectation and its worst pathwise term. The initial jump
    // pairs with Y at the root.
    double expectation = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double term = y.at(tree.root())[j] * plan.initial_jump[j];
        expectation += term;
        cert.complementarity_pathwise = std::max(cert.complementarity_pathwise, std::abs(term));
    }
    for (const TreeNode& n : tree.nodes()) {
        if (n.time_index == 0)
            continue;
        for (std::size_t j = 0; j < k; ++j) {
            const double term = y.at(n.id)[j] * plan.increments[n.id][j];
            expectation += n.path_prob * term;
            cert.complementarity_pathwise =
                std::max(cert.complementarity_pathwise, std::abs(term));
        }
    }
    cert.complementarity_residual = std::abs(expectation);

    // One-step martingale defect of Q = Y + N - f, with N the cumulative
    // grad_h dt strictly before the node's time.
    AdaptedProcess q(tree, k);
    std::vector<double> gh(k);
    {
        AdaptedProcess n_proc(tree, k);
        for (std::size_t i = 1; i <= last; ++i) {
            const double dt = grid.dt(i);
            for (std::size_t id : tree.slice(i)) {
                const TreeNode& node = tree.node(id);
                auto dst = n_proc.at(id);
                auto parent_n = n_proc.at(node.parent);
                spec.grad_h(tree.l_value(node.parent), a.at(node.parent), {gh.data(), k});
                for (std::size_t j = 0; j < k; ++j)
                    dst[j] = parent_n[j] + gh[j] * dt;
            }
        }
        for (std::size_t i = 0; i <= last; ++i) {
            const auto fv = spec.f_at(grid.time(i));
            for (std::size_t id : tree.slice(i)) {
                auto dst = q.at(id);
                auto ysrc = y.at(id);
                auto nsrc = n_proc.at(id);
                for (std::size_t j = 0; j < k; ++j)
                    dst[j] = ysrc[j] + nsrc[j] - fv[j];
            }
        }
    }
    for (const TreeNode& n : tree.nodes()) {
        if (n.children.empty())
            continue;
        for (std::size_t j = 0; j < k; ++j) {
            double expect = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                expect += n.child_probs[c] * q.at(n.children[c])[j];
            cert.martingale_defect =
                std::max(cert.martingale_defect, std::abs(q.at(n.id)[j] - expect));
        }
    }

    std::vector<double> gg(k);
    for (std::size_t id : tree.slice(last)) {
        const auto fv = spec.f_at(grid.time(last));
        spec.grad_g(tree.l_value(id), a.at(id), {gg.data(), k});
        for (std::size_t j = 0; j < k; ++j)
            cert.terminal_defect = std::max(
                cert.terminal_defect, std::abs(y.at(id)[j] - fv[j] - gg[j]));
    }

    cert.certified = cert.negativity_residual <= tolerance &&
                     cert.complementarity_pathwise <= tolerance &&
                     cert.complementarity_residual <= tolerance &&
                     cert.martingale_defect <= tolerance &&
                     cert.terminal_defect <= tolerance;
    return cert;
}

namespace {

double adjoint_pairing(const ScenarioTree& tree, const AdaptedProcess& y,
                       const ControlPlan& plan) {
    double acc = 0.0;
    for (std::size_t j = 0; j < plan.k; ++j)
        acc += y.at(tree.root())[j] * plan.initial_jump[j];
    for (const TreeNode& n : tree.nodes()) {
        if (n.time_index == 0)
            continue;
        for (std::size_t j = 0; j < plan.k; ++j)
            acc += n.path_prob * y.at(n.id)[j] * plan.increments[n.id][j];
    }
    return acc;
}

} // namespace

double optimality_gap_bound(const ScenarioTree& tree, const CostSpec& spec,
                            const ControlPlan& plan, const AdaptedProcess& adjoint,
                            const ControlPlan& competitor) {
    competitor.validate();
    const double j_plan = expected_cost(spec, tree, plan);
    return j_plan + adjoint_pairing(tree, adjoint, competitor) -
           adjoint_pairing(tree, adjoint, plan);
}

double negative_part_time_integral(const ScenarioTree& tree, const AdaptedProcess& adjoint) {
    const TimeGrid& grid = tree.grid();
    double acc = 0.0;
    for (std::size_t i = 1; i < tree.num_slices(); ++i) {
        const double dt = grid.dt(i);
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            for (double v : adjoint.at(id))
                acc += n.path_prob * std::max(0.0, -v) * dt;
        }
    }
    return acc;
}

CappedKktReport capped_kkt_identities(const ScenarioTree& tree, const CostSpec& spec,
                                      const ControlPlan& capped_plan, double cap_rate) {
    const AdaptedProcess y = compute_adjoint(tree, spec, capped_plan);
    CappedKktReport report;
    report.lhs = cap_rate * negative_part_time_integral(tree, y);
    report.rhs = -adjoint_pairing(tree, y, capped_plan);
    report.identity_gap = std::abs(report.lhs - report.rhs);

    const TimeGrid& grid = tree.grid();
    for (const TreeNode& n : tree.nodes()) {
        if (n.time_index == 0)
            continue;
        const double cap = cap_rate * grid.dt(n.time_index);
        for (std::size_t j = 0; j < capped_plan.k; ++j) {
            const double a = capped_plan.increments[n.id][j];
            const double v = y.at(n.id)[j];
            double r;
            if (a <= 1e-12)
                r = std::max(0.0, -v);          // (Y)^- must vanish at zero
            else if (a >= cap - 1e-12)
                r = std::max(0.0, v);           // (Y)^+ must vanish at the cap
            else
                r = std::abs(v);
            report.box_residual = std::max(report.box_residual, r);
        }
    }
    return report;
}

std::vector<double> prop206b_limit_trace(const ScenarioTree& tree, const CostSpec& spec,
                                         const std::vector<ControlPlan>& capped_plans) {
    std::vector<double> out;
    out.reserve(capped_plans.size());
    for (const ControlPlan& p : capped_plans)
        out.push_back(negative_part_time_integral(tree, compute_adjoint(tree, spec, p)));
    return out;
}

} // namespace mfollow
