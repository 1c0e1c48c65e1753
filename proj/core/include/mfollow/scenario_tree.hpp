#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfollow/time_grid.hpp"

namespace mfollow {

constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

struct TreeNode {
    std::size_t id = 0;
    std::size_t time_index = 0;
    std::size_t parent = kNoNode;             // kNoNode for the root
    std::vector<std::size_t> children;        // ascending node ids
    std::vector<double> child_probs;          // positive, sum to 1
    std::vector<double> l_value;              // R^d
    double path_prob = 1.0;                   // product of transition probs from root
};

/// Finite filtered scenario model for the target process L: one node per
/// atom of F^L_{t_i}, children carry strictly positive transition
/// probabilities summing to one. Immutable after construction and safe to
/// share across threads.
class ScenarioTree {
public:
    ScenarioTree(TimeGrid grid, std::vector<TreeNode> nodes, std::size_t root);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }
    std::size_t root() const { return root_; }
    std::size_t num_nodes() const { return nodes_.size(); }
    const TreeNode& node(std::size_t id) const { return nodes_[id]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    /// Node ids at a given time index, ascending.
    const std::vector<std::size_t>& slice(std::size_t time_index) const {
        return slices_[time_index];
    }
    std::size_t num_slices() const { return slices_.size(); }
    std::span<const double> l_value(std::size_t id) const {
        return {nodes_[id].l_value.data(), dim_};
    }

private:
    TimeGrid grid_;
    std::vector<TreeNode> nodes_;
    std::size_t root_;
    std::size_t dim_;
    std::vector<std::vector<std::size_t>> slices_;

    void validate() const;
};

/// One root-to-leaf scenario: node ids, per-time L values, path probability.
struct PathSample {
    std::vector<std::size_t> node_ids;        // length M+1, root first
    std::vector<std::vector<double>> l_values;
    double probability = 0.0;
};

/// All root-to-leaf paths, ordered by leaf node id.
std::vector<PathSample> enumerate_paths(const ScenarioTree& tree);

/// Process adapted to the tree filtration: one R^m value per node.
class AdaptedProcess {
public:
    AdaptedProcess(const ScenarioTree& tree, std::size_t dim, double fill = 0.0);

    std::size_t dim() const { return dim_; }
    const ScenarioTree& tree() const { return *tree_; }
    std::span<double> at(std::size_t node) {
        return {values_.data() + node * dim_, dim_};
    }
    std::span<const double> at(std::size_t node) const {
        return {values_.data() + node * dim_, dim_};
    }
    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }

private:
    const ScenarioTree* tree_;
    std::size_t dim_;
    std::vector<double> values_;
};

// --- builders ---------------------------------------------------------------

/// Non-recombining binomial tree: each node splits into up/down children
/// with probability 1/2; per-coordinate increments +-volatility*sqrt(dt) + drift*dt.
ScenarioTree build_binomial_tree(std::size_t steps, double volatility, double drift,
                                 const std::vector<double>& l0, double horizon);

/// L stays at 0 until the final step, then branches once into the given
/// terminal support. Probabilities must be positive and sum to 1 (1e-12).
ScenarioTree build_lottery_tree(std::size_t steps,
                                const std::vector<std::pair<std::vector<double>, double>>& terminal_support,
                                double horizon);

/// Two rays on [0,1]: a fair branch at t_1 into L_t = t*ell, ell in {0,1}.
ScenarioTree build_ray_tree(std::size_t steps);

// --- operations -------------------------------------------------------------

/// E[x_{to_index} | F_{t_i}] materialised on the whole tree: backward
/// induction below to_index, frozen at the slice value beyond it. Only the
/// values of x at to_index are read; from_index is validated against
/// to_index and names the slice callers care about. Summation runs over
/// children in ascending id order, so results are bit-reproducible.
AdaptedProcess conditional_expectation(const ScenarioTree& tree, const AdaptedProcess& x,
                                       std::size_t from_index, std::size_t to_index);

/// Stieltjes sum with the initial-jump convention: the jump just prior to
/// t = 0 is charged at integrand(t_0), increments at t_1..t_M at the times
/// they occur. integrand has one R^k row per grid time; increments has the
/// initial-jump row followed by one row per t_1..t_M.
double stieltjes_integral(const TimeGrid& grid,
                          const std::vector<std::vector<double>>& integrand,
                          const std::vector<double>& initial_jump,
                          const std::vector<std::vector<double>>& increments);

} // namespace mfollow
