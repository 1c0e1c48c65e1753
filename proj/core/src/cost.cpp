#include "mfollow/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "mfollow/errors.hpp"

namespace mfollow {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void check_finite(double v, const char* which, std::size_t node_hint) {
    if (!std::isfinite(v))
        throw evaluation_error(std::string(which) + " returned a non-finite value at node " +
                               std::to_string(node_hint));
}

using Factory = std::function<CostSpec(const std::map<std::string, double>&, std::size_t, std::size_t)>;

std::map<std::string, Factory>& registry() {
    static std::map<std::string, Factory> reg;
    return reg;
}
std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

CostSpec make_zero(std::size_t k, std::size_t d) {
    CostSpec s;
    s.k = k;
    s.d = d;
    s.name = "zero";
    s.f = [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    s.h = [](std::span<const double>, std::span<const double>) { return 0.0; };
    s.g = [](std::span<const double>, std::span<const double>) { return 0.0; };
    s.grad_h = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    s.grad_g = s.grad_h;
    s.f_lower_bound = 0.0;
    return s;
}

CostSpec make_quadratic(const std::map<std::string, double>& params, std::size_t k, std::size_t d) {
    if (k != d)
        throw config_error("quadratic_tracking needs k == d");
    const double f_const = param_or(params, "f_const", 1.0);
    if (f_const < 0.0)
        throw config_error("quadratic_tracking: f_const must be >= 0");
    CostSpec s;
    s.k = k;
    s.d = d;
    s.name = "quadratic_tracking";
    s.f = [f_const](double, std::span<double> out) { std::fill(out.begin(), out.end(), f_const); };
    s.h = [](std::span<const double>, std::span<const double>) { return 0.0; };
    s.g = [](std::span<const double> l, std::span<const double> a) {
        double v = 0.0;
        for (std::size_t j = 0; j < l.size(); ++j)
            v += 0.5 * (l[j] - a[j]) * (l[j] - a[j]);
        return v;
    };
    s.grad_h = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    s.grad_g = [](std::span<const double> l, std::span<const double> a, std::span<double> out) {
        for (std::size_t j = 0; j < l.size(); ++j)
            out[j] = a[j] - l[j];
    };
    s.f_lower_bound = f_const;
    s.linear_growth_certified = true;  // quadratic growth in a dominates any line
    s.growth_q = 2.0;
    return s;
}

CostSpec make_exponential(std::size_t k, std::size_t d) {
    CostSpec s;
    s.k = k;
    s.d = d;
    s.name = "exponential";
    s.f = [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    s.h = [](std::span<const double>, std::span<const double>) { return 0.0; };
    s.g = [](std::span<const double>, std::span<const double> a) {
        double v = 0.0;
        for (double aj : a)
            v += std::exp(-aj);
        return v;
    };
    s.grad_h = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    s.grad_g = [](std::span<const double>, std::span<const double> a, std::span<double> out) {
        for (std::size_t j = 0; j < a.size(); ++j)
            out[j] = -std::exp(-a[j]);
    };
    s.f_lower_bound = 0.0;
    s.linear_growth_certified = false;  // bounded g, the nonattainment example
    return s;
}

// h = sum_j |l_j - a_j| with the one-sided gradient sign(a - l), 0 at ties.
CostSpec make_absolute(const std::map<std::string, double>& params, std::size_t k, std::size_t d) {
    if (k != d)
        throw config_error("absolute_tracking needs k == d");
    const double f_const = param_or(params, "f_const", 0.5);
    const double f_slope = param_or(params, "f_slope", 1.0);
    CostSpec s;
    s.k = k;
    s.d = d;
    s.name = "absolute_tracking";
    s.f = [f_const, f_slope](double t, std::span<double> out) {
        std::fill(out.begin(), out.end(), f_const + f_slope * t);
    };
    s.h = [](std::span<const double> l, std::span<const double> a) {
        double v = 0.0;
        for (std::size_t j = 0; j < l.size(); ++j)
            v += std::abs(l[j] - a[j]);
        return v;
    };
    s.g = [](std::span<const double>, std::span<const double>) { return 0.0; };
    s.grad_h = [](std::span<const double> l, std::span<const double> a, std::span<double> out) {
        for (std::size_t j = 0; j < l.size(); ++j) {
            if (a[j] > l[j])
                out[j] = 1.0;
            else if (a[j] < l[j])
                out[j] = -1.0;
            else
                out[j] = 0.0;
        }
    };
    s.grad_g = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    s.f_lower_bound = std::min(f_const, f_const + f_slope);  // affine f on [0, T], T <= 1 use
    s.linear_growth_certified = false;
    return s;
}

} // namespace

std::vector<double> CostSpec::f_at(double t) const {
    std::vector<double> out(k, 0.0);
    f(t, {out.data(), out.size()});
    return out;
}

CostSpec make_cost_spec(const std::string& name, const std::map<std::string, double>& params,
                        std::size_t k, std::size_t d) {
    {
        std::lock_guard<std::mutex> lock(registry_mutex());
        auto it = registry().find(name);
        if (it != registry().end())
            return it->second(params, k, d);
    }
    if (name == "zero")
        return make_zero(k, d);
    if (name == "quadratic_tracking")
        return make_quadratic(params, k, d);
    if (name == "exponential")
        return make_exponential(k, d);
    if (name == "absolute_tracking")
        return make_absolute(params, k, d);
    throw config_error("unknown cost spec '" + name + "'");
}

void register_cost_spec(const std::string& name, Factory factory) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    registry()[name] = std::move(factory);
}

AuditReport audit_cost_spec(const CostSpec& spec, const ScenarioTree& tree) {
    AuditReport report;
    auto fail = [&](const std::string& msg) {
        report.passed = false;
        report.violations.push_back(msg);
    };

    for (double t : tree.grid().times()) {
        auto fv = spec.f_at(t);
        for (double v : fv)
            if (!(v >= 0.0))
                fail("f negative at t = " + std::to_string(t));
    }

    // Probe l values from the tree itself, a values on an irrational-offset
    // grid so the |.| kink of library costs is never hit exactly.
    std::vector<std::vector<double>> l_probes;
    for (std::size_t id : tree.slice(tree.grid().num_times() - 1))
        l_probes.emplace_back(tree.node(id).l_value);
    l_probes.emplace_back(std::vector<double>(tree.dim(), 0.0));

    std::vector<double> a_levels = {0.0131, 0.2371, 0.5113, 0.9417, 1.6183, 2.7183};
    const std::size_t k = spec.k;
    std::vector<double> a1(k), a2(k), mid(k), grad(k), shifted(k);

    for (const auto& l : l_probes) {
        std::span<const double> ls{l.data(), l.size()};
        for (double base1 : a_levels) {
            for (double base2 : a_levels) {
                for (std::size_t j = 0; j < k; ++j) {
                    a1[j] = base1 * (1.0 + 0.1 * static_cast<double>(j));
                    a2[j] = base2 * (1.0 + 0.05 * static_cast<double>(j));
                    mid[j] = 0.5 * (a1[j] + a2[j]);
                }
                for (auto* phi : {&spec.h, &spec.g}) {
                    const char* tag = (phi == &spec.h) ? "h" : "g";
                    const double v1 = (*phi)(ls, a1);
                    const double v2 = (*phi)(ls, a2);
                    const double vm = (*phi)(ls, mid);
                    if (!(v1 >= 0.0) || !(v2 >= 0.0))
                        fail(std::string(tag) + " negative at a probe point");
                    if (vm > 0.5 * (v1 + v2) + 1e-9)
                        fail(std::string(tag) + " fails the midpoint convexity test");
                }
            }
        }
        if (spec.has_gradients()) {
            const double step = 1e-6;
            for (double base : a_levels) {
                for (std::size_t j = 0; j < k; ++j)
                    a1[j] = base * (1.0 + 0.1 * static_cast<double>(j)) + 0.0457;
                for (auto [phi, gphi, tag] :
                     {std::tuple{&spec.h, &spec.grad_h, "grad_h"},
                      std::tuple{&spec.g, &spec.grad_g, "grad_g"}}) {
                    (*gphi)(ls, a1, {grad.data(), k});
                    for (std::size_t j = 0; j < k; ++j) {
                        std::copy(a1.begin(), a1.end(), shifted.begin());
                        shifted[j] = a1[j] + step;
                        const double up = (*phi)(ls, shifted);
                        shifted[j] = a1[j] - step;
                        const double dn = (*phi)(ls, shifted);
                        const double fd = (up - dn) / (2.0 * step);
                        const double scale = std::max({1.0, std::abs(fd), std::abs(grad[j])});
                        if (std::abs(fd - grad[j]) > 1e-5 * scale)
                            fail(std::string(tag) + " disagrees with central differences");
                    }
                }
            }
        }
    }

    if (!spec.growth_p && !spec.growth_q)
        report.warnings.push_back("no growth envelope declared; exponential-growth hypotheses unchecked");
    return report;
}

ControlPlan ControlPlan::zero(const ScenarioTree& tree, std::size_t k) {
    ControlPlan p;
    p.tree = &tree;
    p.k = k;
    p.initial_jump.assign(k, 0.0);
    p.increments.assign(tree.num_nodes(), std::vector<double>(k, 0.0));
    return p;
}

double ControlPlan::cap_at(std::size_t node) const {
    if (!lipschitz_rate)
        return std::numeric_limits<double>::infinity();
    const TreeNode& n = tree->node(node);
    if (n.time_index == 0)
        return 0.0;
    return *lipschitz_rate * tree->grid().dt(n.time_index);
}

std::vector<double> ControlPlan::cumulative_at(std::size_t node) const {
    std::vector<double> acc = initial_jump;
    std::vector<std::size_t> chain;
    for (std::size_t id = node; id != kNoNode; id = tree->node(id).parent)
        chain.push_back(id);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        for (std::size_t j = 0; j < k; ++j)
            acc[j] += increments[*it][j];
    return acc;
}

void ControlPlan::validate() const {
    if (!tree)
        throw precondition_error("ControlPlan: no tree attached");
    if (initial_jump.size() != k || increments.size() != tree->num_nodes())
        throw dimension_error("ControlPlan: shape mismatch");
    for (double v : initial_jump)
        if (!(v >= 0.0))
            throw precondition_error("ControlPlan: initial jump must be nonnegative");
    for (std::size_t id = 0; id < increments.size(); ++id) {
        if (increments[id].size() != k)
            throw dimension_error("ControlPlan: increment dimension mismatch at node " +
                                  std::to_string(id));
        const double cap = cap_at(id);
        for (double v : increments[id]) {
            if (!(v >= 0.0))
                throw precondition_error("ControlPlan: negative increment at node " +
                                         std::to_string(id));
            if (v > cap + 1e-12)
                throw precondition_error("ControlPlan: increment above cap at node " +
                                         std::to_string(id));
        }
    }
    if (lipschitz_rate)
        for (double v : initial_jump)
            if (v != 0.0)
                throw precondition_error("ControlPlan: capped plans carry no initial jump");
}

PathIncrements plan_on_path(const ControlPlan& plan, const PathSample& path) {
    PathIncrements inc;
    inc.initial_jump = plan.initial_jump;
    inc.increments.reserve(path.node_ids.size() - 1);
    for (std::size_t i = 1; i < path.node_ids.size(); ++i)
        inc.increments.push_back(plan.increments[path.node_ids[i]]);
    return inc;
}

AdaptedProcess cumulative_process(const ScenarioTree& tree, const ControlPlan& plan) {
    AdaptedProcess a(tree, plan.k);
    auto root = a.at(tree.root());
    std::copy(plan.initial_jump.begin(), plan.initial_jump.end(), root.begin());
    for (std::size_t i = 1; i < tree.num_slices(); ++i) {
        for (std::size_t id : tree.slice(i)) {
            auto dst = a.at(id);
            auto src = a.at(tree.node(id).parent);
            for (std::size_t j = 0; j < plan.k; ++j)
                dst[j] = src[j] + plan.increments[id][j];
        }
    }
    return a;
}

std::vector<std::vector<double>> cumulative_path(const PathIncrements& inc) {
    std::vector<std::vector<double>> a;
    a.reserve(inc.increments.size() + 1);
    a.push_back(inc.initial_jump);
    for (const auto& row : inc.increments) {
        std::vector<double> next = a.back();
        for (std::size_t j = 0; j < row.size(); ++j)
            next[j] += row[j];
        a.push_back(std::move(next));
    }
    return a;
}

double pathwise_cost(const CostSpec& spec, const TimeGrid& grid,
                     const std::vector<std::vector<double>>& l_values,
                     const PathIncrements& inc) {
    const std::size_t m = grid.num_steps();
    if (l_values.size() != m + 1 || inc.increments.size() != m)
        throw dimension_error("pathwise_cost: path length does not match the grid");

    const auto a = cumulative_path(inc);
    double cost = dot(std::span<const double>{spec.f_at(0.0)},
                      std::span<const double>{inc.initial_jump});
    for (std::size_t i = 1; i <= m; ++i)
        cost += dot(std::span<const double>{spec.f_at(grid.time(i))},
                    std::span<const double>{inc.increments[i - 1]});
    for (std::size_t i = 0; i < m; ++i) {
        const double hv = spec.h({l_values[i].data(), l_values[i].size()},
                                 {a[i].data(), a[i].size()});
        check_finite(hv, "h", i);
        cost += hv * grid.dt(i + 1);
    }
    const double gv = spec.g({l_values[m].data(), l_values[m].size()},
                             {a[m].data(), a[m].size()});
    check_finite(gv, "g", m);
    return cost + gv;
}

double pathwise_cost(const CostSpec& spec, const PathSample& path, const ControlPlan& plan) {
    return pathwise_cost(spec, plan.tree->grid(), path.l_values, plan_on_path(plan, path));
}

double expected_cost(const CostSpec& spec, const ScenarioTree& tree, const ControlPlan& plan) {
    if (plan.tree != &tree)
        throw precondition_error("expected_cost: plan does not live on this tree");
    const TimeGrid& grid = tree.grid();
    const std::size_t last = grid.num_times() - 1;

    double cost = dot(std::span<const double>{spec.f_at(0.0)},
                      std::span<const double>{plan.initial_jump});

    // Running A per node, built slice by slice.
    std::vector<std::vector<double>> cumulative(tree.num_nodes());
    cumulative[tree.root()] = plan.initial_jump;

    std::vector<double> fv(spec.k);
    for (std::size_t i = 0; i <= last; ++i) {
        spec.f(grid.time(i), {fv.data(), fv.size()});
        for (std::size_t id : tree.slice(i)) {
            const TreeNode& n = tree.node(id);
            if (i > 0) {
                cumulative[id] = cumulative[n.parent];
                for (std::size_t j = 0; j < spec.k; ++j)
                    cumulative[id][j] += plan.increments[id][j];
                cost += n.path_prob * dot({fv.data(), fv.size()},
                                          {plan.increments[id].data(), spec.k});
            }
            const auto& a = cumulative[id];
            if (i < last) {
                const double hv = spec.h(tree.l_value(id), {a.data(), a.size()});
                check_finite(hv, "h", id);
                cost += n.path_prob * hv * grid.dt(i + 1);
            } else {
                const double gv = spec.g(tree.l_value(id), {a.data(), a.size()});
                check_finite(gv, "g", id);
                cost += n.path_prob * gv;
            }
        }
    }
    return cost;
}

SubgradientPath subgradient_process(const CostSpec& spec, const TimeGrid& grid,
                                    const std::vector<std::vector<double>>& l_values,
                                    const PathIncrements& inc) {
    if (!spec.has_gradients())
        throw precondition_error("subgradient_process: gradients required");
    const std::size_t m = grid.num_steps();
    if (l_values.size() != m + 1 || inc.increments.size() != m)
        throw dimension_error("subgradient_process: path length does not match the grid");

    const auto a = cumulative_path(inc);
    const std::size_t k = spec.k;
    std::vector<double> tail(k, 0.0), gg(k), gh(k);
    spec.grad_g({l_values[m].data(), l_values[m].size()}, {a[m].data(), a[m].size()},
                {gg.data(), k});

    SubgradientPath out;
    out.values.assign(m + 1, std::vector<double>(k, 0.0));
    for (std::size_t i = m + 1; i-- > 0;) {
        if (i < m) {
            spec.grad_h({l_values[i].data(), l_values[i].size()}, {a[i].data(), a[i].size()},
                        {gh.data(), k});
            for (std::size_t j = 0; j < k; ++j)
                tail[j] += gh[j] * grid.dt(i + 1);
        }
        const auto fv = spec.f_at(grid.time(i));
        for (std::size_t j = 0; j < k; ++j)
            out.values[i][j] = fv[j] + tail[j] + gg[j];
    }
    return out;
}

SubgradientPath subgradient_process(const CostSpec& spec, const PathSample& path,
                                    const ControlPlan& plan) {
    return subgradient_process(spec, plan.tree->grid(), path.l_values, plan_on_path(plan, path));
}

double pairing(const TimeGrid& grid, const std::vector<std::vector<double>>& x,
               const std::vector<double>& delta_initial,
               const std::vector<std::vector<double>>& delta_increments) {
    return stieltjes_integral(grid, x, delta_initial, delta_increments);
}

SubgradientCheckReport subgradient_inequality_check(const CostSpec& spec,
                                                    const ScenarioTree& tree,
                                                    const ControlPlan& plan,
                                                    const PlanDelta& delta) {
    if (delta.k != plan.k || delta.increments.size() != tree.num_nodes())
        throw dimension_error("subgradient_inequality_check: delta shape mismatch");

    // A + Delta must stay monotone.
    ControlPlan shifted = plan;
    shifted.lipschitz_rate.reset();
    for (std::size_t j = 0; j < plan.k; ++j) {
        shifted.initial_jump[j] += delta.initial_jump[j];
        if (shifted.initial_jump[j] < -1e-15)
            throw precondition_error("subgradient_inequality_check: A + Delta leaves the monotone cone");
        shifted.initial_jump[j] = std::max(shifted.initial_jump[j], 0.0);
    }
    for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
        for (std::size_t j = 0; j < plan.k; ++j) {
            shifted.increments[id][j] += delta.increments[id][j];
            if (shifted.increments[id][j] < -1e-15)
                throw precondition_error("subgradient_inequality_check: A + Delta leaves the monotone cone");
            shifted.increments[id][j] = std::max(shifted.increments[id][j], 0.0);
        }
    }

    SubgradientCheckReport report;
    const auto paths = enumerate_paths(tree);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& path = paths[p];
        PathIncrements delta_inc;
        delta_inc.initial_jump = delta.initial_jump;
        for (std::size_t i = 1; i < path.node_ids.size(); ++i)
            delta_inc.increments.push_back(delta.increments[path.node_ids[i]]);

        const double lhs = pathwise_cost(spec, path, shifted);
        const auto dc = subgradient_process(spec, path, plan);
        const double pair = pairing(tree.grid(), dc.values, delta_inc.initial_jump,
                                    delta_inc.increments);
        const double rhs = pathwise_cost(spec, path, plan) + pair;

        SubgradientCheckRow row{p, lhs, rhs, rhs > lhs + 1e-9};
        report.worst_violation = std::max(report.worst_violation, rhs - lhs);
        if (row.violated)
            report.passed = false;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace mfollow
