#pragma once

// Brute-force reference for the one-class duals, independent of the library's
// kernel and solver code: dense kernels, exhaustive enumeration of a grid over
// the box-constrained simplex, then a derivative-free pattern search along the
// pair directions e_i - e_j.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

enum class Kind { Linear, Polynomial, Rbf, Sigmoid };

struct KernelParams {
    Kind kind = Kind::Linear;
    double width = 1.0;  // rbf
    double scale = 1.0;  // poly / sigmoid
    double coef0 = 0.0;
    int degree = 3;
};

inline double dense_kernel(const KernelParams& p, const Vec& x, const Vec& y) {
    double dotv = 0.0, dist = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dotv += x[i] * y[i];
        dist += (x[i] - y[i]) * (x[i] - y[i]);
    }
    switch (p.kind) {
        case Kind::Linear: return dotv;
        case Kind::Rbf: return std::exp(-dist / p.width);
        case Kind::Polynomial: return std::pow(p.scale * dotv + p.coef0, p.degree);
        case Kind::Sigmoid: return std::tanh(p.scale * dotv + p.coef0);
    }
    return 0.0;
}

inline Mat dense_gram(const KernelParams& p, const std::vector<Vec>& xs) {
    Mat k(xs.size(), Vec(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) k[i][j] = dense_kernel(p, xs[i], xs[j]);
    return k;
}

/// 1/2 a'Ka (OC-SVM dual, minimized).
inline double ocsvm_objective(const Mat& k, const Vec& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) s += a[i] * a[j] * k[i][j];
    return 0.5 * s;
}

/// sum a_i k_ii - a'Ka (SVDD dual, maximized).
inline double svdd_objective(const Mat& k, const Vec& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i] * k[i][i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * k[i][j];
    }
    return lin - quad;
}

struct Result {
    Vec alpha;
    double value = 0.0;  // of the minimized function
};

/// Minimizes `f` over {0 <= a_i <= ub, sum a = 1}.
inline Result minimize_on_simplex(std::size_t l, double ub, const std::function<double(const Vec&)>& f,
                                  int grid_steps) {
    Result best;
    best.value = std::numeric_limits<double>::infinity();

    // Enumerate all compositions n_1 + ... + n_l = grid_steps.
    Vec a(l, 0.0);
    std::vector<int> n(l, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int left) {
        if (idx + 1 == l) {
            n[idx] = left;
            for (std::size_t t = 0; t < l; ++t) {
                a[t] = static_cast<double>(n[t]) / grid_steps;
                if (a[t] > ub + 1e-12) return;
            }
            const double v = f(a);
            if (v < best.value) {
                best.value = v;
                best.alpha = a;
            }
            return;
        }
        for (int k = 0; k <= left; ++k) {
            n[idx] = k;
            rec(idx + 1, left - k);
        }
    };
    rec(0, grid_steps);

    if (best.alpha.empty()) {
        // Grid too coarse to hit the feasible set (ub * l close to 1): use the
        // uniform point, which is feasible whenever ub * l >= 1.
        best.alpha.assign(l, 1.0 / static_cast<double>(l));
        best.value = f(best.alpha);
    }
    for (auto& v : best.alpha) v = std::min(v, ub);

    // Pattern search with exact clipping at the box.
    Vec cur = best.alpha;
    double fcur = f(cur);
    for (double h = 1.0 / grid_steps; h > 1e-13; h *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < l; ++i) {
                for (std::size_t j = 0; j < l; ++j) {
                    if (i == j) continue;
                    const double step = std::min({h, ub - cur[i], cur[j]});
                    if (step <= 0.0) continue;
                    Vec trial = cur;
                    trial[i] = (step == ub - cur[i]) ? ub : cur[i] + step;
                    trial[j] = (step == cur[j]) ? 0.0 : cur[j] - step;
                    const double ft = f(trial);
                    if (ft < fcur) {
                        cur = trial;
                        fcur = ft;
                        improved = true;
                    }
                }
            }
        }
    }
    return {cur, fcur};
}

inline int default_grid_steps(std::size_t l) {
    switch (l) {
        case 1: return 1;
        case 2: return 1000;
        case 3: return 300;
        case 4: return 80;
        default: return 30;
    }
}

inline Result solve_ocsvm(const Mat& k, double ub) {
    return minimize_on_simplex(k.size(), ub, [&](const Vec& a) { return ocsvm_objective(k, a); },
                               default_grid_steps(k.size()));
}

/// Returns the maximizer; `value` holds the maximal SVDD objective.
inline Result solve_svdd(const Mat& k, double c) {
    auto r = minimize_on_simplex(k.size(), c, [&](const Vec& a) { return -svdd_objective(k, a); },
                                 default_grid_steps(k.size()));
    r.value = -r.value;
    return r;
}

/// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
inline double min_eigenvalue(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, a[i][i]);
    return m;
}

}  // namespace oracle
