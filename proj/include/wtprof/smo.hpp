#pragma once

// Sequential minimal optimization for the one-class dual
//
//     minimize   1/2 a'Qa + p'a
//     subject to 0 <= a_i <= ub,  sum_i a_i = 1.
//
// With every label +1 the equality constraint only allows moving mass between
// two coordinates. Each step picks the maximal violating pair
//     i = argmin { G_t : a_t < ub },   j = argmax { G_t : a_t > 0 },
// where G = Qa + p, and moves the optimal amount from a_j to a_i in closed
// form. The point is KKT-optimal within `tol` once G_j - G_i <= tol.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wtprof/error.hpp"
#include "wtprof/kernels.hpp"

namespace wtprof {

struct SolverOptions {
    double tol = 1e-3;
    std::size_t max_iter = 10'000'000;
    /// Called after every pair update with the current objective value.
    std::function<void(std::size_t iteration, double objective)> on_iteration;
};

struct DualSolution {
    std::vector<double> alpha;
    std::vector<double> gradient;  // Qa + p at the returned alpha
    double objective = 0.0;
    double gap = 0.0;  // final maximal KKT violation
    std::size_t iterations = 0;
};

inline double dual_objective(const GramMatrix& q, std::span<const double> linear, std::span<const double> alpha) {
    double obj = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) row += q(i, j) * alpha[j];
        obj += alpha[i] * (0.5 * row + (linear.empty() ? 0.0 : linear[i]));
    }
    return obj;
}

namespace detail {

inline void full_gradient(const GramMatrix& q, std::span<const double> linear, const std::vector<double>& alpha,
                          std::vector<double>& g) {
    const std::size_t l = alpha.size();
    for (std::size_t t = 0; t < l; ++t) g[t] = linear.empty() ? 0.0 : linear[t];
    for (std::size_t s = 0; s < l; ++s) {
        if (alpha[s] == 0.0) continue;
        const auto row = q.row(s);
        for (std::size_t t = 0; t < l; ++t) g[t] += alpha[s] * row[t];
    }
}

}  // namespace detail

/// Solves the box- and simplex-constrained dual. `linear` may be empty (p = 0).
inline DualSolution solve_one_class_dual(const GramMatrix& q, std::span<const double> linear, double upper,
                                         const SolverOptions& opt = {}) {
    const std::size_t l = q.size();
    if (l == 0) throw ContractViolation("cannot train on an empty set");
    if (!linear.empty() && linear.size() != l) throw ContractViolation("linear term size mismatch");
    if (!(upper > 0.0)) throw SolverError("box bound must be positive");
    if (upper * static_cast<double>(l) < 1.0 - 1e-12)
        throw SolverError("infeasible: box bound " + std::to_string(upper) + " times " + std::to_string(l) +
                          " points is below 1");

    DualSolution sol;
    auto& a = sol.alpha;
    auto& g = sol.gradient;
    a.assign(l, 0.0);
    g.assign(l, 0.0);

    // Feasible start: fill coordinates up to the bound in order.
    double remaining = 1.0;
    for (std::size_t t = 0; t < l && remaining > 0.0; ++t) {
        a[t] = std::min(upper, remaining);
        remaining -= a[t];
        if (remaining < 1e-15) remaining = 0.0;
    }
    detail::full_gradient(q, linear, a, g);

    auto objective = [&] {
        double obj = 0.0;
        for (std::size_t t = 0; t < l; ++t) obj += a[t] * (g[t] + (linear.empty() ? 0.0 : linear[t]));
        return 0.5 * obj;
    };

    bool refreshed = false;
    std::size_t iter = 0;
    while (true) {
        std::size_t i = l, j = l;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < l; ++t) {
            if (a[t] < upper && g[t] < g_min) {
                g_min = g[t];
                i = t;
            }
            if (a[t] > 0.0 && g[t] > g_max) {
                g_max = g[t];
                j = t;
            }
        }
        sol.gap = (i == l || j == l) ? 0.0 : g_max - g_min;

        if (sol.gap <= opt.tol) {
            // Confirm against a freshly accumulated gradient before stopping.
            if (refreshed) break;
            detail::full_gradient(q, linear, a, g);
            refreshed = true;
            continue;
        }
        refreshed = false;

        if (iter >= opt.max_iter)
            throw SolverError("no convergence after " + std::to_string(iter) +
                                  " pair updates, KKT violation " + std::to_string(sol.gap),
                              sol.gap);

        const double step_max = std::min(upper - a[i], a[j]);
        const double eta = q(i, i) + q(j, j) - 2.0 * q(i, j);
        // Along a_i += d, a_j -= d the objective changes by d (g_i - g_j) + d^2 eta / 2.
        // A non-positive curvature sends the minimum to the segment end.
        double step = step_max;
        if (eta > 1e-15) step = std::min(step_max, (g_max - g_min) / eta);

        if (step == upper - a[i] && step <= a[j]) {
            a[i] = upper;
            a[j] = (step == a[j]) ? 0.0 : a[j] - step;
        } else if (step == a[j]) {
            a[i] = std::min(upper, a[i] + step);
            a[j] = 0.0;
        } else {
            a[i] = std::min(upper, a[i] + step);
            a[j] -= step;
        }

        const auto qi = q.row(i);
        const auto qj = q.row(j);
        for (std::size_t t = 0; t < l; ++t) g[t] += step * (qi[t] - qj[t]);

        ++iter;
        if (opt.on_iteration) opt.on_iteration(iter, objective());
    }

    sol.iterations = iter;
    sol.objective = objective();
    return sol;
}

/// Coordinates strictly inside (0, ub).
inline bool is_free(double alpha, double upper) { return alpha > 0.0 && alpha < upper; }

/// Drops coordinates below `floor`, then hands the removed mass to the free
/// coordinates so the sum stays 1 without touching the bounds.
inline void prune_small(std::vector<double>& alpha, double upper, double floor = 1e-12) {
    double removed = 0.0;
    for (auto& a : alpha) {
        if (a > 0.0 && a < floor) {
            removed += a;
            a = 0.0;
        }
    }
    if (removed == 0.0) return;
    double free_mass = 0.0;
    for (double a : alpha)
        if (is_free(a, upper)) free_mass += a;
    if (free_mass <= 0.0) return;
    for (auto& a : alpha)
        if (is_free(a, upper)) a = std::min(upper, a + removed * a / free_mass);
}

}  // namespace wtprof
