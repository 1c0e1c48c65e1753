#include "mfollow/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mfollow/errors.hpp"

namespace mfollow {

namespace {

// Exact grouping of float vectors; supports constructed directly, no noise.
using Key = std::vector<double>;

std::size_t ancestor_at(const ScenarioTree& tree, std::size_t leaf_node, std::size_t time_index) {
    std::size_t id = leaf_node;
    while (tree.node(id).time_index > time_index)
        id = tree.node(id).parent;
    return id;
}

} // namespace

void RandomizedModel::validate() const {
    if (!tree)
        throw precondition_error("RandomizedModel: no tree attached");
    if (outcome_probs.empty())
        throw precondition_error("RandomizedModel: empty lottery");
    double total = 0.0;
    for (double p : outcome_probs) {
        if (!(p > 0.0))
            throw precondition_error("RandomizedModel: lottery probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw precondition_error("RandomizedModel: lottery probabilities must sum to 1");
    if (initial_jumps.size() != outcome_probs.size() || increments.size() != outcome_probs.size())
        throw dimension_error("RandomizedModel: one control per outcome expected");
    for (std::size_t r = 0; r < outcome_probs.size(); ++r)
        plan_for_outcome(r).validate();
}

ControlPlan RandomizedModel::plan_for_outcome(std::size_t r) const {
    ControlPlan p;
    p.tree = tree;
    p.k = k;
    p.initial_jump = initial_jumps[r];
    p.increments = increments[r];
    return p;
}

void JointLaw::validate() const {
    if (!tree)
        throw precondition_error("JointLaw: no tree attached");
    const auto paths = enumerate_paths(*tree);
    std::vector<double> l_marginal(paths.size(), 0.0);
    double total = 0.0;
    for (const Row& row : rows) {
        if (row.path_index >= paths.size())
            throw precondition_error("JointLaw: path index out of range");
        if (row.a_values.size() != tree->grid().num_times())
            throw dimension_error("JointLaw: one A value per grid time expected");
        for (const auto& v : row.a_values)
            if (v.size() != k)
                throw dimension_error("JointLaw: A dimension mismatch");
        if (!(row.probability >= 0.0))
            throw precondition_error("JointLaw: negative probability");
        l_marginal[row.path_index] += row.probability;
        total += row.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw precondition_error("JointLaw: probabilities must sum to 1");
    for (std::size_t p = 0; p < paths.size(); ++p)
        if (std::abs(l_marginal[p] - paths[p].probability) > 1e-12)
            throw precondition_error("JointLaw: L-marginal does not match the tree law at path " +
                                     std::to_string(p));
}

JointLaw joint_law_from_model(const RandomizedModel& model) {
    model.validate();
    JointLaw law;
    law.tree = model.tree;
    law.k = model.k;
    const auto paths = enumerate_paths(*model.tree);
    for (std::size_t r = 0; r < model.outcome_probs.size(); ++r) {
        const ControlPlan plan = model.plan_for_outcome(r);
        for (std::size_t p = 0; p < paths.size(); ++p) {
            JointLaw::Row row;
            row.path_index = p;
            row.a_values = cumulative_path(plan_on_path(plan, paths[p]));
            row.probability = model.outcome_probs[r] * paths[p].probability;
            law.rows.push_back(std::move(row));
        }
    }
    return law;
}

IndependenceReport check_conditional_independence(const JointLaw& law, std::size_t time_index) {
    law.validate();
    const ScenarioTree& tree = *law.tree;
    if (time_index >= tree.grid().num_times())
        throw precondition_error("check_conditional_independence: time index out of range");
    const auto paths = enumerate_paths(tree);

    // Group rows by the L-history node at time_index.
    std::map<std::size_t, std::vector<const JointLaw::Row*>> groups;
    for (const auto& row : law.rows) {
        const std::size_t leaf = paths[row.path_index].node_ids.back();
        groups[ancestor_at(tree, leaf, time_index)].push_back(&row);
    }

    IndependenceReport report;
    for (const auto& [node, rows] : groups) {
        double mass = 0.0;
        for (const auto* r : rows)
            mass += r->probability;
        if (mass <= 0.0)
            continue;

        // Joint cells: (A-history through time_index) x (L-suffix = path id).
        std::map<std::pair<Key, std::size_t>, double> joint;
        std::map<Key, double> a_marginal;
        std::map<std::size_t, double> l_marginal;
        for (const auto* r : rows) {
            Key a_hist;
            for (std::size_t i = 0; i <= time_index; ++i)
                for (double v : r->a_values[i])
                    a_hist.push_back(v);
            const double p = r->probability / mass;
            joint[{a_hist, r->path_index}] += p;
            a_marginal[a_hist] += p;
            l_marginal[r->path_index] += p;
        }

        for (const auto& [amk, ap] : a_marginal) {
            for (const auto& [lmk, lp] : l_marginal) {
                double jp = 0.0;
                if (auto it = joint.find({amk, lmk}); it != joint.end())
                    jp = it->second;
                const double gap = std::abs(jp - ap * lp);
                if (gap > 1e-10) {
                    report.independent = false;
                    report.witness = IndependenceWitness{
                        time_index, node,
                        "A-history cell with first coordinate " + std::to_string(amk.front()) +
                            " correlates with L-path " + std::to_string(lmk),
                        gap};
                    return report;
                }
            }
        }
    }
    return report;
}

IndependenceReport check_conditional_independence(const RandomizedModel& model,
                                                  std::size_t time_index) {
    return check_conditional_independence(joint_law_from_model(model), time_index);
}

ProjectionResult optional_project(const RandomizedModel& model, const CostSpec& spec) {
    model.validate();
    const ScenarioTree& tree = *model.tree;

    ProjectionResult result{ControlPlan::zero(tree, model.k), 0.0, 0.0};
    for (std::size_t r = 0; r < model.outcome_probs.size(); ++r) {
        const double p = model.outcome_probs[r];
        const ControlPlan plan = model.plan_for_outcome(r);
        result.cost_before += p * expected_cost(spec, tree, plan);
        for (std::size_t j = 0; j < model.k; ++j)
            result.projected.initial_jump[j] += p * plan.initial_jump[j];
        for (std::size_t id = 0; id < tree.num_nodes(); ++id)
            for (std::size_t j = 0; j < model.k; ++j)
                result.projected.increments[id][j] += p * plan.increments[id][j];
    }
    result.cost_after = expected_cost(spec, tree, result.projected);
    return result;
}

CoupledLaw couple_conditionally_independent(const JointLaw& law_q, const JointLaw& law_r) {
    law_q.validate();
    law_r.validate();
    if (law_q.tree != law_r.tree)
        throw precondition_error("couple_conditionally_independent: laws live on different trees");
    const ScenarioTree& tree = *law_q.tree;
    const auto paths = enumerate_paths(tree);

    // Conditional laws per L-path (the shared marginal is the tree law, so
    // any mismatch beyond 1e-12 was already rejected by validate()).
    std::vector<std::vector<const JointLaw::Row*>> q_by_path(paths.size()), r_by_path(paths.size());
    for (const auto& row : law_q.rows)
        q_by_path[row.path_index].push_back(&row);
    for (const auto& row : law_r.rows)
        r_by_path[row.path_index].push_back(&row);

    CoupledLaw coupled;
    coupled.tree = &tree;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const double lp = paths[p].probability;
        if (q_by_path[p].empty() || r_by_path[p].empty())
            throw precondition_error(
                "couple_conditionally_independent: missing support on L-path " + std::to_string(p));
        for (const auto* q : q_by_path[p]) {
            for (const auto* r : r_by_path[p]) {
                CoupledLaw::Row row;
                row.path_index = p;
                row.q_values = q->a_values;
                row.r_values = r->a_values;
                row.probability = (q->probability / lp) * (r->probability / lp) * lp;
                coupled.rows.push_back(std::move(row));
            }
        }
    }
    return coupled;
}

CouplingCheck verify_coupling(const CoupledLaw& coupled, const JointLaw& law_q,
                              const JointLaw& law_r, double tolerance) {
    CouplingCheck check;
    const ScenarioTree& tree = *coupled.tree;
    const auto paths = enumerate_paths(tree);

    auto flatten = [](const std::vector<std::vector<double>>& v) {
        Key key;
        for (const auto& row : v)
            for (double x : row)
                key.push_back(x);
        return key;
    };

    std::map<std::pair<std::size_t, Key>, double> q_marg, r_marg, q_ref, r_ref;
    for (const auto& row : coupled.rows) {
        q_marg[{row.path_index, flatten(row.q_values)}] += row.probability;
        r_marg[{row.path_index, flatten(row.r_values)}] += row.probability;
    }
    for (const auto& row : law_q.rows)
        q_ref[{row.path_index, flatten(row.a_values)}] += row.probability;
    for (const auto& row : law_r.rows)
        r_ref[{row.path_index, flatten(row.a_values)}] += row.probability;

    auto tv = [](const std::map<std::pair<std::size_t, Key>, double>& a,
                 const std::map<std::pair<std::size_t, Key>, double>& b) {
        double acc = 0.0;
        for (const auto& [key, p] : a) {
            auto it = b.find(key);
            acc += std::abs(p - (it == b.end() ? 0.0 : it->second));
        }
        for (const auto& [key, p] : b)
            if (a.find(key) == a.end())
                acc += p;
        return 0.5 * acc;
    };
    check.marginal_q_tv = tv(q_marg, q_ref);
    check.marginal_r_tv = tv(r_marg, r_ref);

    // Conditional independence of Q and R given the full L-path.
    for (std::size_t p = 0; p < paths.size() && check.conditionally_independent; ++p) {
        std::map<Key, double> qm, rm;
        std::map<std::pair<Key, Key>, double> joint;
        double mass = 0.0;
        for (const auto& row : coupled.rows) {
            if (row.path_index != p)
                continue;
            const Key qk = flatten(row.q_values), rk = flatten(row.r_values);
            qm[qk] += row.probability;
            rm[rk] += row.probability;
            joint[{qk, rk}] += row.probability;
            mass += row.probability;
        }
        if (mass <= 0.0)
            continue;
        for (const auto& [qk, qp] : qm)
            for (const auto& [rk, rp] : rm) {
                double jp = 0.0;
                if (auto it = joint.find({qk, rk}); it != joint.end())
                    jp = it->second;
                if (std::abs(jp / mass - (qp / mass) * (rp / mass)) > 1e-10)
                    check.conditionally_independent = false;
            }
    }

    check.passed = check.marginal_q_tv <= tolerance && check.marginal_r_tv <= tolerance &&
                   check.conditionally_independent;
    return check;
}

} // namespace mfollow
