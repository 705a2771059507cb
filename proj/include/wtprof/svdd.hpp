#pragma once

// Support vector data description: the smallest feature-space sphere holding
// most of the training data. The dual maximizes
//     sum a_i k(x_i,x_i) - sum a_i a_j k(x_i,x_j),  0 <= a_i <= C,  sum a_i = 1,
// which the shared solver handles as minimizing 1/2 a'Ka - 1/2 sum a_i k(x_i,x_i).

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "wtprof/error.hpp"
#include "wtprof/kernels.hpp"
#include "wtprof/ocsvm.hpp"
#include "wtprof/smo.hpp"

namespace wtprof {

struct SvddModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> alphas;
    std::vector<std::size_t> support_indices;  // positions in the training set; not persisted
    KernelSpec kernel;
    double weight_c = 1.0;
    double r_squared = 0.0;
    double center_norm_sq = 0.0;  // sum a_i a_j k(x_i,x_j)
    std::size_t train_size = 0;

    std::size_t dim() const { return support_vectors.empty() ? 0 : support_vectors.front().dim(); }
};

inline SvddModel train_svdd(std::span<const FeatureVector> xs, const GramMatrix& gram, double c,
                            const KernelSpec& kernel, const SolverOptions& opt = {}) {
    if (xs.empty()) throw ContractViolation("SVDD needs at least one training vector");
    if (!(c > 0.0)) throw ConfigError("SVDD weight C must be positive");
    if (gram.size() != xs.size()) throw ContractViolation("Gram matrix does not match the training set");
    const std::size_t l = xs.size();
    if (c * static_cast<double>(l) < 1.0 - 1e-12)
        throw SolverError("SVDD infeasible: C * l = " + std::to_string(c * static_cast<double>(l)) + " < 1");

    // On the simplex a constant diagonal makes the linear term a constant, so
    // it is dropped and the problem coincides with the OC-SVM dual.
    std::vector<double> linear;
    if (!kernel.constant_diagonal()) {
        linear.resize(l);
        for (std::size_t t = 0; t < l; ++t) linear[t] = -0.5 * gram(t, t);
    }
    const auto sol = solve_one_class_dual(gram, linear, c, opt);

    // (K a)_t recovered from the gradient.
    std::vector<double> ka(l);
    for (std::size_t t = 0; t < l; ++t) ka[t] = sol.gradient[t] - (linear.empty() ? 0.0 : linear[t]);
    double cn = 0.0;
    for (std::size_t t = 0; t < l; ++t) cn += sol.alpha[t] * ka[t];

    // Squared feature-space distance of each training point to the center.
    // Free points lie on the sphere; a = 0 inside, a = C outside.
    std::vector<double> dist(l);
    for (std::size_t t = 0; t < l; ++t) dist[t] = gram(t, t) - 2.0 * ka[t] + cn;
    std::vector<double> neg(l);
    for (std::size_t t = 0; t < l; ++t) neg[t] = -dist[t];

    SvddModel m;
    m.kernel = kernel;
    m.weight_c = c;
    m.train_size = l;
    m.center_norm_sq = cn;
    // free_mean_or_midpoint expects "at bound => below, zero => above", which
    // holds for the negated distances.
    m.r_squared = -detail::free_mean_or_midpoint(neg, sol.alpha, c);
    detail::keep_support_vectors(m, xs, sol.alpha, c);
    return m;
}

inline SvddModel train_svdd(std::span<const FeatureVector> xs, double c, const KernelSpec& kernel,
                            const SolverOptions& opt = {}) {
    if (xs.empty()) throw ContractViolation("SVDD needs at least one training vector");
    const auto k = kernel.resolved(xs.front().dim());
    return train_svdd(xs, gram_matrix(k, xs), c, k, opt);
}

/// score = R^2 - |Phi(x) - a|^2; accepted when non-negative.
inline Decision decide_svdd(const SvddModel& m, const FeatureVector& x) {
    const KernelProbe probe(m.kernel, x);
    const double self = m.kernel.constant_diagonal() ? 1.0 : probe.self();
    const double score = m.r_squared - m.center_norm_sq + 2.0 * expansion(m, probe) - self;
    return {score >= 0.0, score};
}

inline nlohmann::json to_json(const SvddModel& m) {
    return {{"type", "svdd"},
            {"kernel", m.kernel.to_json()},
            {"C", m.weight_c},
            {"l", m.train_size},
            {"r_squared", m.r_squared},
            {"center_norm_sq", m.center_norm_sq},
            {"dim", m.dim()},
            {"svs", detail::svs_to_json(m.support_vectors)},
            {"alphas", m.alphas}};
}

inline SvddModel svdd_from_json(const nlohmann::json& j) {
    if (j.at("type").get<std::string>() != "svdd") throw DataError("not an svdd model");
    SvddModel m;
    m.kernel = KernelSpec::from_json(j.at("kernel"));
    m.weight_c = j.at("C").get<double>();
    m.train_size = j.at("l").get<std::size_t>();
    m.r_squared = j.at("r_squared").get<double>();
    m.center_norm_sq = j.at("center_norm_sq").get<double>();
    m.support_vectors = detail::svs_from_json(j.at("svs"), j.at("dim").get<std::size_t>());
    m.alphas = j.at("alphas").get<std::vector<double>>();
    if (m.alphas.size() != m.support_vectors.size()) throw DataError("svdd model: alphas and svs differ in length");
    return m;
}

}  // namespace wtprof
