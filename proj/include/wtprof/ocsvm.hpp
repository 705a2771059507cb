#pragma once

// nu one-class SVM: the dual minimizes 1/2 sum a_i a_j k(x_i,x_j) subject to
// 0 <= a_i <= 1/(nu l) and sum a_i = 1. A point is accepted when
// sum a_i k(x_i,x) - rho >= 0.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"
#include "wtprof/error.hpp"
#include "wtprof/kernels.hpp"
#include "wtprof/smo.hpp"

namespace wtprof {

struct Decision {
    bool accept = false;
    double score = 0.0;
};

struct OcSvmModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> alphas;
    std::vector<std::size_t> support_indices;  // positions in the training set; not persisted
    double rho = 0.0;
    KernelSpec kernel;
    double nu = 0.5;
    std::size_t train_size = 0;

    std::size_t dim() const { return support_vectors.empty() ? 0 : support_vectors.front().dim(); }
    double upper_bound() const { return 1.0 / (nu * static_cast<double>(train_size)); }
};

namespace detail {

/// KKT-consistent offset: mean of `values` over free coordinates, otherwise the
/// midpoint of [max over at-bound coordinates, min over zero coordinates].
inline double free_mean_or_midpoint(std::span<const double> values, std::span<const double> alpha, double upper) {
    double sum = 0.0;
    std::size_t n_free = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper_v = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        if (is_free(alpha[t], upper)) {
            sum += values[t];
            ++n_free;
        } else if (alpha[t] >= upper) {
            lower = std::max(lower, values[t]);
        } else {
            upper_v = std::min(upper_v, values[t]);
        }
    }
    if (n_free > 0) return sum / static_cast<double>(n_free);
    if (std::isinf(lower)) return upper_v;
    if (std::isinf(upper_v)) return lower;
    return 0.5 * (lower + upper_v);
}

template <typename Model>
void keep_support_vectors(Model& m, std::span<const FeatureVector> xs, std::vector<double> alpha, double upper) {
    prune_small(alpha, upper);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        if (alpha[t] > 0.0) {
            m.support_vectors.push_back(xs[t]);
            m.alphas.push_back(alpha[t]);
            m.support_indices.push_back(t);
        }
    }
}

}  // namespace detail

/// Trains on a precomputed Gram matrix of `xs` under the resolved `kernel`.
inline OcSvmModel train_ocsvm(std::span<const FeatureVector> xs, const GramMatrix& gram, double nu,
                              const KernelSpec& kernel, const SolverOptions& opt = {}) {
    if (xs.empty()) throw ContractViolation("OC-SVM needs at least one training vector");
    if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in (0,1]");
    if (gram.size() != xs.size()) throw ContractViolation("Gram matrix does not match the training set");

    const double upper = 1.0 / (nu * static_cast<double>(xs.size()));
    const auto sol = solve_one_class_dual(gram, {}, upper, opt);

    OcSvmModel m;
    m.kernel = kernel;
    m.nu = nu;
    m.train_size = xs.size();
    // With p = 0 the gradient is exactly sum_j a_j k(x_j, x_t).
    m.rho = detail::free_mean_or_midpoint(sol.gradient, sol.alpha, upper);
    detail::keep_support_vectors(m, xs, sol.alpha, upper);
    return m;
}

inline OcSvmModel train_ocsvm(std::span<const FeatureVector> xs, double nu, const KernelSpec& kernel,
                              const SolverOptions& opt = {}) {
    if (xs.empty()) throw ContractViolation("OC-SVM needs at least one training vector");
    const auto k = kernel.resolved(xs.front().dim());
    return train_ocsvm(xs, gram_matrix(k, xs), nu, k, opt);
}

/// Kernel expansion sum a_i k(x_i, x) for a probe built on x.
[[gnu::noinline]] inline double expansion(std::span<const FeatureVector> svs, std::span<const double> alphas,
                                          const KernelProbe& probe) {
    double s = 0.0;
    for (std::size_t i = 0; i < svs.size(); ++i) s += alphas[i] * probe(svs[i]);
    return s;
}

template <typename Model>
double expansion(const Model& m, const KernelProbe& probe) {
    if (probe.dim() != m.dim()) throw ContractViolation("input dimension does not match the model");
    return expansion(m.support_vectors, m.alphas, probe);
}

inline Decision decide_ocsvm(const OcSvmModel& m, const FeatureVector& x) {
    const double score = expansion(m, KernelProbe(m.kernel, x)) - m.rho;
    return {score >= 0.0, score};
}

namespace detail {

inline nlohmann::json sparse_to_json(const FeatureVector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : v.entries()) out.push_back(nlohmann::json::array({e.column, e.value}));
    return out;
}

inline FeatureVector sparse_from_json(const nlohmann::json& j, std::size_t dim) {
    std::vector<FeatureEntry> entries;
    for (const auto& e : j) entries.push_back({e.at(0).get<Column>(), e.at(1).get<double>()});
    return FeatureVector(dim, std::move(entries));
}

inline nlohmann::json svs_to_json(const std::vector<FeatureVector>& svs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : svs) out.push_back(sparse_to_json(v));
    return out;
}

inline std::vector<FeatureVector> svs_from_json(const nlohmann::json& j, std::size_t dim) {
    std::vector<FeatureVector> out;
    for (const auto& v : j) out.push_back(sparse_from_json(v, dim));
    return out;
}

}  // namespace detail

inline nlohmann::json to_json(const OcSvmModel& m) {
    return {{"type", "ocsvm"},
            {"kernel", m.kernel.to_json()},
            {"nu", m.nu},
            {"l", m.train_size},
            {"rho", m.rho},
            {"dim", m.dim()},
            {"svs", detail::svs_to_json(m.support_vectors)},
            {"alphas", m.alphas}};
}

inline OcSvmModel ocsvm_from_json(const nlohmann::json& j) {
    if (j.at("type").get<std::string>() != "ocsvm") throw DataError("not an ocsvm model");
    OcSvmModel m;
    m.kernel = KernelSpec::from_json(j.at("kernel"));
    m.nu = j.at("nu").get<double>();
    m.train_size = j.at("l").get<std::size_t>();
    m.rho = j.at("rho").get<double>();
    m.support_vectors = detail::svs_from_json(j.at("svs"), j.at("dim").get<std::size_t>());
    m.alphas = j.at("alphas").get<std::vector<double>>();
    if (m.alphas.size() != m.support_vectors.size()) throw DataError("ocsvm model: alphas and svs differ in length");
    return m;
}

}  // namespace wtprof
