#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfollow/scenario_tree.hpp"
#include "mfollow/time_grid.hpp"

namespace mfollow {

/// Grid restriction of a cadlag path: one R^n value per grid time.
struct GridPath {
    TimeGrid grid;
    std::vector<std::vector<double>> values;  // length num_times()

    GridPath(TimeGrid g, std::vector<std::vector<double>> v);
    std::size_t dim() const { return values.front().size(); }
};

/// Convergence-in-measure metric for lambda + delta_T restricted to the
/// grid: sum_i min(1, |x(t_i) - y(t_i)|) dt_{i+1} + min(1, |x(T) - y(T)|).
double pseudopath_distance(const GridPath& x, const GridPath& y);

/// max over grid times of |x(t_i) - y(t_i)|.
double sup_distance(const GridPath& x, const GridPath& y);

/// Right-continuous step interpolation onto a new grid with the same
/// horizon; the terminal value is preserved exactly.
GridPath resample_path(const GridPath& x, const TimeGrid& target);

/// Canonical Lipschitz representative of a rate-capped monotone grid path,
/// sampled on a target grid: within each source cell the increment is
/// exerted at rate `rate`, placed as late as the cell allows (the pointwise
/// smallest Lipschitz interpolant). Capped optimizers are continuous
/// objects; this is the shape they stand for when compared against
/// singular (step) paths.
GridPath lipschitz_embedding(const GridPath& x, double rate, const TimeGrid& target);

struct FunctionalGapRow {
    std::string label;
    std::vector<double> integral_gaps;   // per sequence element
    std::vector<double> terminal_gaps;
    bool tail_converged = false;
};
struct FunctionalConvergenceReport {
    std::vector<FunctionalGapRow> rows;
    bool converged = false;
};

/// Test-functional characterisation of pseudopath convergence: for each
/// bounded continuous b, the grid quadrature of b(s, x_n(s)) against the
/// limit, plus the terminal values. The tail (last element) must be within
/// the tolerance for every b and at T.
FunctionalConvergenceReport functional_convergence_check(
    const std::vector<GridPath>& paths, const GridPath& limit,
    const std::vector<std::pair<std::string, std::function<double(double, double)>>>& test_fns,
    double tolerance);

/// Quasimartingale variation on the finest grid partition with
/// left-endpoint conditioning:
///   sum_j E| E[x_{t_j} - x_{t_{j-1}} | F_{t_{j-1}}] | + E|x_T|.
double conditional_variation(const ScenarioTree& tree, const AdaptedProcess& x);

struct VariationReport {
    std::vector<std::vector<double>> per_process;  // per family member, per coordinate
    std::vector<double> supremum;                  // per coordinate
    double ceiling = 0.0;
    bool bounded = false;
};

/// sup of conditional_variation across a family, per coordinate, against a
/// caller-supplied ceiling.
VariationReport tightness_certificate(
    const std::vector<std::pair<const ScenarioTree*, const AdaptedProcess*>>& family,
    double ceiling);

struct WeightedPathSet {
    std::vector<GridPath> paths;
    std::vector<double> weights;
};

/// Bounded-Lipschitz distance between the empirical laws of
/// (x(t))_{t in time_subset}, estimated with a fixed dictionary of clipped
/// coordinate functions and their pairwise min/max compositions. The subset
/// must contain T.
double findim_marginal_distance(const WeightedPathSet& a, const WeightedPathSet& b,
                                const std::vector<double>& time_subset);

} // namespace mfollow
