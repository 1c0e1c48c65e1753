#include "mfollow/scenario_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfollow/errors.hpp"

namespace mfollow {

ScenarioTree::ScenarioTree(TimeGrid grid, std::vector<TreeNode> nodes, std::size_t root)
    : grid_(std::move(grid)), nodes_(std::move(nodes)), root_(root) {
    if (nodes_.empty())
        throw precondition_error("ScenarioTree: empty node list");
    if (root_ >= nodes_.size())
        throw precondition_error("ScenarioTree: root id out of range");
    dim_ = nodes_[root_].l_value.size();

    slices_.assign(grid_.num_times(), {});
    for (const TreeNode& n : nodes_) {
        if (n.time_index >= grid_.num_times())
            throw precondition_error("ScenarioTree: node time index beyond grid");
        slices_[n.time_index].push_back(n.id);
    }
    for (auto& s : slices_)
        std::sort(s.begin(), s.end());

    // Path probabilities by forward pass.
    nodes_[root_].path_prob = 1.0;
    for (std::size_t i = 0; i + 1 < slices_.size(); ++i) {
        for (std::size_t id : slices_[i]) {
            const TreeNode& n = nodes_[id];
            for (std::size_t c = 0; c < n.children.size(); ++c)
                nodes_[n.children[c]].path_prob = n.path_prob * n.child_probs[c];
        }
    }
    validate();
}

void ScenarioTree::validate() const {
    if (nodes_[root_].time_index != 0 || nodes_[root_].parent != kNoNode)
        throw precondition_error("ScenarioTree: root must sit at time index 0 with no parent");
    if (slices_[0].size() != 1)
        throw precondition_error("ScenarioTree: exactly one root expected");

    const std::size_t last = grid_.num_times() - 1;
    for (const TreeNode& n : nodes_) {
        if (n.id >= nodes_.size())
            throw precondition_error("ScenarioTree: node id out of range");
        if (n.l_value.size() != dim_)
            throw dimension_error("ScenarioTree: inconsistent L dimension at node " +
                                  std::to_string(n.id));
        if (n.time_index < last) {
            if (n.children.empty())
                throw precondition_error("ScenarioTree: non-terminal node " +
                                         std::to_string(n.id) + " has no children");
            if (n.children.size() != n.child_probs.size())
                throw precondition_error("ScenarioTree: children/probability size mismatch");
            double total = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                if (!(n.child_probs[c] > 0.0))
                    throw precondition_error("ScenarioTree: transition probabilities must be positive");
                const TreeNode& ch = nodes_[n.children[c]];
                if (ch.time_index != n.time_index + 1)
                    throw precondition_error("ScenarioTree: child not on the next time slice");
                if (ch.parent != n.id)
                    throw precondition_error("ScenarioTree: parent link mismatch");
                total += n.child_probs[c];
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw precondition_error("ScenarioTree: transition probabilities at node " +
                                         std::to_string(n.id) + " do not sum to 1");
        } else if (!n.children.empty()) {
            throw precondition_error("ScenarioTree: terminal node with children");
        }
    }
}

std::vector<PathSample> enumerate_paths(const ScenarioTree& tree) {
    const std::size_t last = tree.grid().num_times() - 1;
    std::vector<PathSample> out;
    out.reserve(tree.slice(last).size());
    for (std::size_t leaf : tree.slice(last)) {
        PathSample p;
        p.probability = tree.node(leaf).path_prob;
        std::vector<std::size_t> rev;
        for (std::size_t id = leaf; id != kNoNode; id = tree.node(id).parent)
            rev.push_back(id);
        p.node_ids.assign(rev.rbegin(), rev.rend());
        p.l_values.reserve(p.node_ids.size());
        for (std::size_t id : p.node_ids)
            p.l_values.push_back(tree.node(id).l_value);
        out.push_back(std::move(p));
    }
    return out;
}

AdaptedProcess::AdaptedProcess(const ScenarioTree& tree, std::size_t dim, double fill)
    : tree_(&tree), dim_(dim), values_(tree.num_nodes() * dim, fill) {}

// --- builders ---------------------------------------------------------------

ScenarioTree build_binomial_tree(std::size_t steps, double volatility, double drift,
                                 const std::vector<double>& l0, double horizon) {
    if (steps == 0)
        throw precondition_error("build_binomial_tree: steps must be >= 1");
    if (!(volatility > 0.0))
        throw precondition_error("build_binomial_tree: volatility must be positive");
    if (!(horizon > 0.0))
        throw precondition_error("build_binomial_tree: horizon must be positive");
    if (l0.empty())
        throw precondition_error("build_binomial_tree: l0 must have dimension >= 1");

    TimeGrid grid = TimeGrid::uniform(steps, horizon);
    std::vector<TreeNode> nodes;
    TreeNode root;
    root.id = 0;
    root.time_index = 0;
    root.l_value = l0;
    nodes.push_back(root);

    std::vector<std::size_t> frontier{0};
    for (std::size_t i = 1; i <= steps; ++i) {
        const double dt = grid.dt(i);
        const double up = volatility * std::sqrt(dt) + drift * dt;
        const double down = -volatility * std::sqrt(dt) + drift * dt;
        std::vector<std::size_t> next;
        next.reserve(frontier.size() * 2);
        for (std::size_t pid : frontier) {
            for (double move : {up, down}) {
                TreeNode child;
                child.id = nodes.size();
                child.time_index = i;
                child.parent = pid;
                child.l_value = nodes[pid].l_value;
                for (double& v : child.l_value)
                    v += move;
                nodes[pid].children.push_back(child.id);
                nodes[pid].child_probs.push_back(0.5);
                next.push_back(child.id);
                nodes.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree(std::move(grid), std::move(nodes), 0);
}

ScenarioTree build_lottery_tree(std::size_t steps,
                                const std::vector<std::pair<std::vector<double>, double>>& terminal_support,
                                double horizon) {
    if (steps == 0)
        throw precondition_error("build_lottery_tree: steps must be >= 1");
    if (!(horizon > 0.0))
        throw precondition_error("build_lottery_tree: horizon must be positive");
    if (terminal_support.empty())
        throw precondition_error("build_lottery_tree: empty terminal support");
    const std::size_t d = terminal_support.front().first.size();
    double total = 0.0;
    for (const auto& [value, prob] : terminal_support) {
        if (value.size() != d)
            throw dimension_error("build_lottery_tree: inconsistent support dimension");
        if (!(prob > 0.0))
            throw precondition_error("build_lottery_tree: probabilities must be positive");
        total += prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw precondition_error("build_lottery_tree: probabilities must sum to 1");

    TimeGrid grid = TimeGrid::uniform(steps, horizon);
    std::vector<TreeNode> nodes;
    for (std::size_t i = 0; i < steps; ++i) {
        TreeNode n;
        n.id = i;
        n.time_index = i;
        n.parent = (i == 0) ? kNoNode : i - 1;
        n.l_value.assign(d, 0.0);
        if (i > 0) {
            nodes[i - 1].children.push_back(i);
            nodes[i - 1].child_probs.push_back(1.0);
        }
        nodes.push_back(std::move(n));
    }
    for (const auto& [value, prob] : terminal_support) {
        TreeNode leaf;
        leaf.id = nodes.size();
        leaf.time_index = steps;
        leaf.parent = steps - 1;
        leaf.l_value = value;
        nodes[steps - 1].children.push_back(leaf.id);
        nodes[steps - 1].child_probs.push_back(prob);
        nodes.push_back(std::move(leaf));
    }
    return ScenarioTree(std::move(grid), std::move(nodes), 0);
}

ScenarioTree build_ray_tree(std::size_t steps) {
    if (steps == 0)
        throw precondition_error("build_ray_tree: steps must be >= 1");
    TimeGrid grid = TimeGrid::uniform(steps, 1.0);
    std::vector<TreeNode> nodes;
    TreeNode root;
    root.id = 0;
    root.time_index = 0;
    root.l_value = {0.0};
    nodes.push_back(root);

    // Fair branch at t_1, each ray deterministic afterwards.
    std::size_t prev_low = kNoNode, prev_high = kNoNode;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t = grid.time(i);
        for (double ell : {0.0, 1.0}) {
            TreeNode n;
            n.id = nodes.size();
            n.time_index = i;
            n.l_value = {t * ell};
            std::size_t& prev = (ell == 0.0) ? prev_low : prev_high;
            if (i == 1) {
                n.parent = 0;
                nodes[0].children.push_back(n.id);
                nodes[0].child_probs.push_back(0.5);
            } else {
                n.parent = prev;
                nodes[prev].children.push_back(n.id);
                nodes[prev].child_probs.push_back(1.0);
            }
            prev = n.id;
            nodes.push_back(std::move(n));
        }
    }
    return ScenarioTree(std::move(grid), std::move(nodes), 0);
}

// --- operations -------------------------------------------------------------

AdaptedProcess conditional_expectation(const ScenarioTree& tree, const AdaptedProcess& x,
                                       std::size_t from_index, std::size_t to_index) {
    const std::size_t last = tree.grid().num_times() - 1;
    if (to_index > last || from_index > last)
        throw precondition_error("conditional_expectation: time index out of range");
    if (to_index < from_index)
        throw precondition_error("conditional_expectation: to_index must be >= from_index");

    const std::size_t m = x.dim();
    AdaptedProcess out(tree, m);
    for (std::size_t id : tree.slice(to_index)) {
        auto src = x.at(id);
        std::copy(src.begin(), src.end(), out.at(id).begin());
    }
    // Backward averaging below to_index.
    for (std::size_t i = to_index; i-- > 0;) {
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            auto dst = out.at(id);
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                auto ch = out.at(n.children[c]);
                const double q = n.child_probs[c];
                for (std::size_t j = 0; j < m; ++j)
                    dst[j] += q * ch[j];
            }
        }
    }
    // Beyond to_index the conditioned variable is already measurable: freeze.
    for (std::size_t i = to_index + 1; i <= last; ++i) {
        for (std::size_t id : tree.slice(i)) {
            auto src = out.at(tree.node(id).parent);
            std::copy(src.begin(), src.end(), out.at(id).begin());
        }
    }
    return out;
}

double stieltjes_integral(const TimeGrid& grid,
                          const std::vector<std::vector<double>>& integrand,
                          const std::vector<double>& initial_jump,
                          const std::vector<std::vector<double>>& increments) {
    const std::size_t m = grid.num_steps();
    if (integrand.size() != m + 1)
        throw dimension_error("stieltjes_integral: integrand must cover every grid time");
    if (increments.size() != m)
        throw dimension_error("stieltjes_integral: one increment row per step expected");
    const std::size_t k = integrand.front().size();
    if (initial_jump.size() != k)
        throw dimension_error("stieltjes_integral: initial jump dimension mismatch");

    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        acc += integrand[0][j] * initial_jump[j];
    for (std::size_t i = 1; i <= m; ++i) {
        if (integrand[i].size() != k || increments[i - 1].size() != k)
            throw dimension_error("stieltjes_integral: dimension mismatch at step " +
                                  std::to_string(i));
        for (std::size_t j = 0; j < k; ++j)
            acc += integrand[i][j] * increments[i - 1][j];
    }
    return acc;
}

} // namespace mfollow
