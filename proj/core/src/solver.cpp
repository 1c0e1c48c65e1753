#include "mfollow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfollow/errors.hpp"
#include "mfollow/pontryagin.hpp"

namespace mfollow {

void SolveOptions::validate() const {
    if (!(grad_tolerance > 0.0))
        throw precondition_error("SolveOptions: grad_tolerance must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0))
        throw precondition_error("SolveOptions: step_shrink must lie in (0,1)");
    if (!(step_initial > 0.0) || !(step_grow >= 1.0) || !(armijo_c > 0.0) ||
        !(step_max >= step_initial))
        throw precondition_error("SolveOptions: invalid line-search parameters");
}

CoercivityReport check_coercivity(const CostSpec& spec, const ScenarioTree& tree) {
    CoercivityReport report;
    double min_f = std::numeric_limits<double>::infinity();
    for (double t : tree.grid().times())
        for (double v : spec.f_at(t))
            min_f = std::min(min_f, v);

    if (spec.f_lower_bound > 0.0 && min_f >= spec.f_lower_bound - 1e-15) {
        report.coercive = true;
        report.constant = spec.f_lower_bound;
        report.explanation = "f bounded away from zero on the grid (c = " +
                             std::to_string(spec.f_lower_bound) + ")";
        return report;
    }
    if (spec.linear_growth_certified) {
        report.coercive = true;
        report.constant = 0.0;
        report.explanation = "terminal cost declares a linearly growing envelope";
        return report;
    }
    report.coercive = false;
    if (min_f <= 0.0)
        report.explanation = "witness: min f on the grid is " + std::to_string(min_f) +
                             " and '" + spec.name + "' certifies no linear growth in g";
    else
        report.explanation = "declared f lower bound is " + std::to_string(spec.f_lower_bound) +
                             "; raise it to min f = " + std::to_string(min_f) +
                             " to certify coercivity via f";
    return report;
}

namespace {

// One flat variable vector: k initial-jump slots (uncapped only), then k
// slots per node on slices >= 1, ordered by node id.
struct Boxes {
    const ScenarioTree* tree;
    std::size_t k;
    bool with_jump;
    std::optional<double> cap_rate;
    std::vector<std::size_t> var_nodes;  // node ids with variables

    std::size_t size() const { return (with_jump ? k : 0) + var_nodes.size() * k; }

    double upper(std::size_t flat_index) const {
        if (with_jump && flat_index < k)
            return std::numeric_limits<double>::infinity();
        if (!cap_rate)
            return std::numeric_limits<double>::infinity();
        const std::size_t node_pos = (flat_index - (with_jump ? k : 0)) / k;
        const TreeNode& n = tree->node(var_nodes[node_pos]);
        return *cap_rate * tree->grid().dt(n.time_index);
    }
};

Boxes make_boxes(const ScenarioTree& tree, std::size_t k, bool with_jump,
                 std::optional<double> cap_rate) {
    Boxes b;
    b.tree = &tree;
    b.k = k;
    b.with_jump = with_jump;
    b.cap_rate = cap_rate;
    for (const TreeNode& n : tree.nodes())
        if (n.time_index > 0)
            b.var_nodes.push_back(n.id);
    std::sort(b.var_nodes.begin(), b.var_nodes.end());
    return b;
}

void vars_to_plan(const Boxes& b, const std::vector<double>& x, ControlPlan& plan) {
    std::size_t pos = 0;
    if (b.with_jump)
        for (std::size_t j = 0; j < b.k; ++j)
            plan.initial_jump[j] = x[pos++];
    for (std::size_t node_pos = 0; node_pos < b.var_nodes.size(); ++node_pos)
        for (std::size_t j = 0; j < b.k; ++j)
            plan.increments[b.var_nodes[node_pos]][j] = x[pos++];
}

// Preconditioned gradient in adjoint units (direction = Y), together with
// the true gradient (nodeProbability * Y) used by the Armijo test.
void gradients(const Boxes& b, const AdaptedProcess& y, std::vector<double>& dir,
               std::vector<double>& grad) {
    std::size_t pos = 0;
    if (b.with_jump) {
        auto yr = y.at(b.tree->root());
        for (std::size_t j = 0; j < b.k; ++j) {
            dir[pos] = yr[j];
            grad[pos] = yr[j];
            ++pos;
        }
    }
    for (std::size_t node_pos = 0; node_pos < b.var_nodes.size(); ++node_pos) {
        const TreeNode& n = b.tree->node(b.var_nodes[node_pos]);
        auto yn = y.at(n.id);
        for (std::size_t j = 0; j < b.k; ++j) {
            dir[pos] = yn[j];
            grad[pos] = n.path_prob * yn[j];
            ++pos;
        }
    }
}

double kkt_residual(const Boxes& b, const std::vector<double>& x, const std::vector<double>& dir) {
    double res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double projected = std::clamp(x[i] - dir[i], 0.0, b.upper(i));
        res = std::max(res, std::abs(x[i] - projected));
    }
    return res;
}

std::pair<ControlPlan, SolveReport> projected_gradient(const ScenarioTree& tree,
                                                       const CostSpec& spec, const Boxes& boxes,
                                                       const SolveOptions& opts,
                                                       const ControlPlan* warm_start) {
    ControlPlan plan = ControlPlan::zero(tree, spec.k);
    plan.lipschitz_rate = boxes.cap_rate;
    std::vector<double> x(boxes.size(), 0.0);
    if (warm_start) {
        std::size_t pos = 0;
        if (boxes.with_jump)
            for (std::size_t j = 0; j < boxes.k; ++j)
                x[pos++] = warm_start->initial_jump[j];
        for (std::size_t node_pos = 0; node_pos < boxes.var_nodes.size(); ++node_pos)
            for (std::size_t j = 0; j < boxes.k; ++j)
                x[pos++] = warm_start->increments[boxes.var_nodes[node_pos]][j];
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], 0.0, boxes.upper(i));
    }
    vars_to_plan(boxes, x, plan);

    SolveReport report;
    double value = expected_cost(spec, tree, plan);
    if (opts.record_trace)
        report.value_trace.push_back(value);

    std::vector<double> dir(x.size()), grad(x.size()), trial(x.size());
    double step = opts.step_initial;
    ControlPlan trial_plan = plan;

    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        const AdaptedProcess y = compute_adjoint(tree, spec, plan);
        gradients(boxes, y, dir, grad);

        report.kkt_residual = kkt_residual(boxes, x, dir);
        if (report.kkt_residual <= opts.grad_tolerance) {
            report.converged = true;
            report.iterations = iter;
            break;
        }

        bool accepted = false;
        double s = step;
        for (int bt = 0; bt < 60; ++bt) {
            double decrease = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                trial[i] = std::clamp(x[i] - s * dir[i], 0.0, boxes.upper(i));
                decrease += grad[i] * (trial[i] - x[i]);
            }
            if (decrease >= 0.0) {
                // No feasible descent at this step; shrink.
                s *= opts.step_shrink;
                continue;
            }
            vars_to_plan(boxes, trial, trial_plan);
            const double trial_value = expected_cost(spec, tree, trial_plan);
            if (trial_value <= value + opts.armijo_c * decrease) {
                x.swap(trial);
                value = trial_value;
                accepted = true;
                step = std::min(s * opts.step_grow, opts.step_max);
                break;
            }
            s *= opts.step_shrink;
        }

        if (!accepted) {
            // Line search exhausted: best iterate so far, residual as is.
            report.iterations = iter + 1;
            report.converged = report.kkt_residual <= opts.grad_tolerance;
            break;
        }
        vars_to_plan(boxes, x, plan);
        if (opts.record_trace)
            report.value_trace.push_back(value);
        report.iterations = iter + 1;
    }

    if (!report.converged && report.iterations == opts.max_iterations) {
        const AdaptedProcess y = compute_adjoint(tree, spec, plan);
        gradients(boxes, y, dir, grad);
        report.kkt_residual = kkt_residual(boxes, x, dir);
        report.converged = report.kkt_residual <= opts.grad_tolerance;
    }

    vars_to_plan(boxes, x, plan);
    report.value = expected_cost(spec, tree, plan);
    return {std::move(plan), report};
}

} // namespace

std::pair<ControlPlan, SolveReport> solve_capped(const ScenarioTree& tree, const CostSpec& spec,
                                                 double cap_rate, const SolveOptions& opts) {
    opts.validate();
    if (!(cap_rate > 0.0))
        throw precondition_error("solve_capped: cap must be positive");
    const AuditReport audit = audit_cost_spec(spec, tree);
    if (!audit.passed)
        throw config_error("solve_capped: cost spec failed the convexity audit: " +
                           audit.violations.front());
    Boxes boxes = make_boxes(tree, spec.k, /*with_jump=*/false, cap_rate);
    auto [plan, report] = projected_gradient(tree, spec, boxes, opts, nullptr);
    report.coercivity_verified = check_coercivity(spec, tree).coercive;
    return {std::move(plan), report};
}

std::pair<ControlPlan, SolveReport> solve_uncapped(const ScenarioTree& tree, const CostSpec& spec,
                                                   const SolveOptions& opts) {
    opts.validate();
    const AuditReport audit = audit_cost_spec(spec, tree);
    if (!audit.passed)
        throw config_error("solve_uncapped: cost spec failed the convexity audit: " +
                           audit.violations.front());
    const CoercivityReport coercivity = check_coercivity(spec, tree);
    if (!coercivity.coercive && !opts.waive_coercivity)
        throw precondition_error("solve_uncapped: coercivity unverified (" +
                                 coercivity.explanation + "); pass the waiver to run anyway");
    Boxes boxes = make_boxes(tree, spec.k, /*with_jump=*/true, std::nullopt);
    auto [plan, report] = projected_gradient(tree, spec, boxes, opts, nullptr);
    report.coercivity_verified = coercivity.coercive;
    return {std::move(plan), report};
}

std::vector<std::pair<double, GridPath>> control_grid_paths(const ScenarioTree& tree,
                                                            const ControlPlan& plan) {
    std::vector<std::pair<double, GridPath>> out;
    for (const PathSample& path : enumerate_paths(tree)) {
        const auto a = cumulative_path(plan_on_path(plan, path));
        out.emplace_back(path.probability, GridPath(tree.grid(), a));
    }
    return out;
}

LadderReport run_ladder(const ScenarioTree& tree, const CostSpec& spec,
                        const std::vector<double>& caps, const LadderOptions& opts) {
    for (std::size_t i = 1; i < caps.size(); ++i)
        if (!(caps[i] > caps[i - 1]))
            throw precondition_error("run_ladder: caps must be strictly increasing");
    if (caps.empty())
        throw precondition_error("run_ladder: empty cap list");
    opts.solve.validate();
    const AuditReport audit = audit_cost_spec(spec, tree);
    if (!audit.passed)
        throw config_error("run_ladder: cost spec failed the convexity audit: " +
                           audit.violations.front());

    LadderReport report;
    report.caps = caps;

    const ControlPlan* warm = nullptr;
    for (double n : caps) {
        Boxes boxes = make_boxes(tree, spec.k, false, n);
        auto [plan, rung] = projected_gradient(tree, spec, boxes, opts.solve, warm);
        report.values.push_back(rung.value);
        report.iterations.push_back(rung.iterations);
        report.rung_converged.push_back(rung.converged);
        report.capped_plans.push_back(std::move(plan));
        warm = &report.capped_plans.back();
    }

    {
        const CoercivityReport coercivity = check_coercivity(spec, tree);
        SolveOptions uncapped_opts = opts.solve;
        if (!coercivity.coercive && !uncapped_opts.waive_coercivity)
            throw precondition_error("run_ladder: coercivity unverified (" +
                                     coercivity.explanation + ")");
        Boxes boxes = make_boxes(tree, spec.k, true, std::nullopt);
        auto [plan, rep] = projected_gradient(tree, spec, boxes, uncapped_opts, nullptr);
        report.uncapped_value = rep.value;
        report.uncapped_converged = rep.converged;
        report.uncapped_plan = std::move(plan);
    }

    report.y_negative_integrals = prop206b_limit_trace(tree, spec, report.capped_plans);

    // Embedding distances on the comparison grid: each capped optimizer as
    // the Lipschitz path it stands for, the singular one as a step path.
    const TimeGrid cmp = TimeGrid::uniform(opts.comparison_steps, tree.grid().horizon());
    const auto singular_paths = control_grid_paths(tree, report.uncapped_plan);
    std::vector<GridPath> singular_embedded;
    for (const auto& [prob, path] : singular_paths)
        singular_embedded.push_back(resample_path(path, cmp));

    std::vector<std::vector<GridPath>> embedded_per_rung;
    for (std::size_t r = 0; r < caps.size(); ++r) {
        const auto capped_paths = control_grid_paths(tree, report.capped_plans[r]);
        std::vector<GridPath> embedded;
        double pp = 0.0, sup = 0.0;
        for (std::size_t p = 0; p < capped_paths.size(); ++p) {
            embedded.push_back(lipschitz_embedding(capped_paths[p].second, caps[r], cmp));
            pp += capped_paths[p].first * pseudopath_distance(embedded.back(), singular_embedded[p]);
            sup = std::max(sup, sup_distance(embedded.back(), singular_embedded[p]));
        }
        report.pseudopath_gaps.push_back(pp);
        report.sup_gaps.push_back(sup);
        embedded_per_rung.push_back(std::move(embedded));
    }
    for (std::size_t r = 0; r + 1 < caps.size(); ++r) {
        double pp = 0.0;
        const auto probs = control_grid_paths(tree, report.capped_plans[r]);
        for (std::size_t p = 0; p < probs.size(); ++p)
            pp += probs[p].first *
                  pseudopath_distance(embedded_per_rung[r][p], embedded_per_rung[r + 1][p]);
        report.successive_gaps.push_back(pp);
    }
    return report;
}

} // namespace mfollow
