#include "mfollow/meyer_zheng.hpp"

#include <algorithm>
#include <cmath>

#include "mfollow/errors.hpp"

namespace mfollow {

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
}

void require_same_grid(const GridPath& x, const GridPath& y) {
    if (!(x.grid == y.grid))
        throw precondition_error("paths live on different grids; resample first");
    if (x.dim() != y.dim())
        throw dimension_error("path dimensions differ");
}

} // namespace

GridPath::GridPath(TimeGrid g, std::vector<std::vector<double>> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.num_times())
        throw dimension_error("GridPath: one value per grid time expected");
    for (const auto& row : values)
        if (row.size() != values.front().size())
            throw dimension_error("GridPath: inconsistent value dimension");
}

double pseudopath_distance(const GridPath& x, const GridPath& y) {
    require_same_grid(x, y);
    const std::size_t m = x.grid.num_steps();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        acc += std::min(1.0, euclid(x.values[i], y.values[i])) * x.grid.dt(i + 1);
    return acc + std::min(1.0, euclid(x.values[m], y.values[m]));
}

double sup_distance(const GridPath& x, const GridPath& y) {
    require_same_grid(x, y);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i)
        acc = std::max(acc, euclid(x.values[i], y.values[i]));
    return acc;
}

GridPath resample_path(const GridPath& x, const TimeGrid& target) {
    if (std::abs(x.grid.horizon() - target.horizon()) > 1e-12)
        throw precondition_error("resample_path: horizons differ");
    std::vector<std::vector<double>> values;
    values.reserve(target.num_times());
    std::size_t src = 0;
    for (std::size_t i = 0; i < target.num_times(); ++i) {
        const double s = target.time(i);
        while (src + 1 < x.grid.num_times() && x.grid.time(src + 1) <= s + 1e-15)
            ++src;
        values.push_back(x.values[src]);
    }
    values.back() = x.values.back();  // terminal value preserved exactly
    return GridPath(target, std::move(values));
}

GridPath lipschitz_embedding(const GridPath& x, double rate, const TimeGrid& target) {
    if (std::abs(x.grid.horizon() - target.horizon()) > 1e-12)
        throw precondition_error("lipschitz_embedding: horizons differ");
    if (!(rate > 0.0))
        throw precondition_error("lipschitz_embedding: rate must be positive");

    const std::size_t n = x.dim();
    std::vector<std::vector<double>> values;
    values.reserve(target.num_times());
    for (std::size_t i = 0; i < target.num_times(); ++i) {
        const double s = target.time(i);
        // Locate the source cell (t_{c-1}, t_c] containing s.
        std::size_t c = 0;
        while (c + 1 < x.grid.num_times() && x.grid.time(c + 1) < s - 1e-15)
            ++c;
        if (s <= x.grid.time(0) + 1e-15) {
            values.push_back(x.values[0]);
            continue;
        }
        const std::size_t cell = std::min(c + 1, x.grid.num_times() - 1);
        const double t_hi = x.grid.time(cell);
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = x.values[cell - 1][j];
            const double hi = x.values[cell][j];
            v[j] = std::clamp(hi - rate * (t_hi - s), lo, hi);
        }
        values.push_back(std::move(v));
    }
    return GridPath(target, std::move(values));
}

FunctionalConvergenceReport functional_convergence_check(
    const std::vector<GridPath>& paths, const GridPath& limit,
    const std::vector<std::pair<std::string, std::function<double(double, double)>>>& test_fns,
    double tolerance) {
    FunctionalConvergenceReport report;
    const std::size_t m = limit.grid.num_steps();

    auto quadrature = [&](const GridPath& p, const std::function<double(double, double)>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            acc += b(p.grid.time(i), p.values[i][0]) * p.grid.dt(i + 1);
        return acc;
    };

    report.converged = !paths.empty();
    for (const auto& [label, b] : test_fns) {
        FunctionalGapRow row;
        row.label = label;
        const double limit_integral = quadrature(limit, b);
        for (const GridPath& p : paths) {
            require_same_grid(p, limit);
            row.integral_gaps.push_back(std::abs(quadrature(p, b) - limit_integral));
            row.terminal_gaps.push_back(euclid(p.values.back(), limit.values.back()));
        }
        row.tail_converged = !row.integral_gaps.empty() &&
                             row.integral_gaps.back() <= tolerance &&
                             row.terminal_gaps.back() <= tolerance;
        report.converged = report.converged && row.tail_converged;
        report.rows.push_back(std::move(row));
    }
    return report;
}

double conditional_variation(const ScenarioTree& tree, const AdaptedProcess& x) {
    if (x.dim() != 1)
        throw precondition_error("conditional_variation: apply per scalar component");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < tree.num_slices(); ++i) {
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            double drift = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                drift += n.child_probs[c] * (x.at(n.children[c])[0] - x.at(id)[0]);
            acc += n.path_prob * std::abs(drift);
        }
    }
    for (std::size_t id : tree.slice(tree.num_slices() - 1))
        acc += tree.node(id).path_prob * std::abs(x.at(id)[0]);
    return acc;
}

VariationReport tightness_certificate(
    const std::vector<std::pair<const ScenarioTree*, const AdaptedProcess*>>& family,
    double ceiling) {
    if (family.empty())
        throw precondition_error("tightness_certificate: empty family");
    VariationReport report;
    report.ceiling = ceiling;
    const std::size_t dim = family.front().second->dim();
    report.supremum.assign(dim, 0.0);
    for (const auto& [tree, proc] : family) {
        std::vector<double> per_coord(dim, 0.0);
        for (std::size_t j = 0; j < dim; ++j) {
            AdaptedProcess comp(*tree, 1);
            for (std::size_t id = 0; id < tree->num_nodes(); ++id)
                comp.at(id)[0] = proc->at(id)[j];
            per_coord[j] = conditional_variation(*tree, comp);
            report.supremum[j] = std::max(report.supremum[j], per_coord[j]);
        }
        report.per_process.push_back(std::move(per_coord));
    }
    report.bounded = *std::max_element(report.supremum.begin(), report.supremum.end()) <= ceiling;
    return report;
}

double findim_marginal_distance(const WeightedPathSet& a, const WeightedPathSet& b,
                                const std::vector<double>& time_subset) {
    if (time_subset.empty())
        throw precondition_error("findim_marginal_distance: empty time subset");
    if (a.paths.empty() || b.paths.empty())
        throw precondition_error("findim_marginal_distance: empty path set");
    const double horizon = a.paths.front().grid.horizon();
    if (std::abs(time_subset.back() - horizon) > 1e-12)
        throw precondition_error("findim_marginal_distance: time subset must contain T");

    auto marginal = [&](const GridPath& p) {
        std::vector<double> v;
        for (double t : time_subset) {
            std::size_t idx = 0;
            bool found = false;
            for (std::size_t i = 0; i < p.grid.num_times(); ++i)
                if (std::abs(p.grid.time(i) - t) <= 1e-12) {
                    idx = i;
                    found = true;
                    break;
                }
            if (!found)
                throw precondition_error("findim_marginal_distance: subset time off the grid");
            for (double vv : p.values[idx])
                v.push_back(vv);
        }
        return v;
    };

    std::vector<std::vector<double>> va, vb;
    for (const auto& p : a.paths)
        va.push_back(marginal(p));
    for (const auto& p : b.paths)
        vb.push_back(marginal(p));
    const std::size_t dim = va.front().size();

    // Fixed, versioned dictionary: clipped coordinates at a handful of
    // thresholds, then pairwise min/max of distinct clips.
    const std::vector<double> thresholds = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    using Fn = std::function<double(const std::vector<double>&)>;
    std::vector<Fn> dict;
    for (std::size_t j = 0; j < dim; ++j)
        for (double c : thresholds)
            dict.push_back([j, c](const std::vector<double>& v) {
                return std::clamp(v[j] - c, -1.0, 1.0);
            });
    const std::size_t base = dict.size();
    const std::size_t pair_cap = 64;  // keep the dictionary small and fixed
    std::size_t added = 0;
    for (std::size_t u = 0; u < base && added < pair_cap; ++u) {
        for (std::size_t w = u + 1; w < base && added < pair_cap; w += 3) {
            Fn fu = dict[u], fw = dict[w];
            dict.push_back([fu, fw](const std::vector<double>& v) {
                return std::min(fu(v), fw(v));
            });
            dict.push_back([fu, fw](const std::vector<double>& v) {
                return std::max(fu(v), fw(v));
            });
            added += 2;
        }
    }

    double dist = 0.0;
    for (const Fn& fn : dict) {
        double ea = 0.0, eb = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i)
            ea += a.weights[i] * fn(va[i]);
        for (std::size_t i = 0; i < vb.size(); ++i)
            eb += b.weights[i] * fn(vb[i]);
        dist = std::max(dist, std::abs(ea - eb));
    }
    return dist;
}

} // namespace mfollow
