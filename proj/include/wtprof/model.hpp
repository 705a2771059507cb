#pragma once

// Algorithm-agnostic handle over the two one-class models.

#include <fstream>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "wtprof/ocsvm.hpp"
#include "wtprof/svdd.hpp"

namespace wtprof {

enum class Algorithm { OcSvm, Svdd };

inline constexpr std::string_view to_string(Algorithm a) { return a == Algorithm::OcSvm ? "ocsvm" : "svdd"; }

inline Algorithm algorithm_from_string(std::string_view s) {
    if (s == "ocsvm") return Algorithm::OcSvm;
    if (s == "svdd") return Algorithm::Svdd;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

class OneClassModel {
public:
    OneClassModel(OcSvmModel m) : model_(std::move(m)) {}  // NOLINT(google-explicit-constructor)
    OneClassModel(SvddModel m) : model_(std::move(m)) {}   // NOLINT(google-explicit-constructor)

    Algorithm algorithm() const { return std::holds_alternative<OcSvmModel>(model_) ? Algorithm::OcSvm : Algorithm::Svdd; }

    Decision decide(const FeatureVector& x) const {
        return std::visit(
            [&](const auto& m) {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, OcSvmModel>)
                    return decide_ocsvm(m, x);
                else
                    return decide_svdd(m, x);
            },
            model_);
    }

    /// Decision from a precomputed expansion sum a_i k(x_i, x) and k(x, x).
    Decision decide_from_expansion(double expansion_value, double self_kernel) const {
        double score;
        if (const auto* oc = std::get_if<OcSvmModel>(&model_))
            score = expansion_value - oc->rho;
        else {
            const auto& sv = std::get<SvddModel>(model_);
            score = sv.r_squared - sv.center_norm_sq + 2.0 * expansion_value - self_kernel;
        }
        return {score >= 0.0, score};
    }

    std::size_t support_count() const {
        return std::visit([](const auto& m) { return m.support_vectors.size(); }, model_);
    }
    const std::vector<double>& alphas() const {
        return std::visit([](const auto& m) -> const std::vector<double>& { return m.alphas; }, model_);
    }
    /// Training-set positions of the support vectors; empty for a loaded model.
    const std::vector<std::size_t>& support_indices() const {
        return std::visit([](const auto& m) -> const std::vector<std::size_t>& { return m.support_indices; }, model_);
    }
    std::size_t dim() const {
        return std::visit([](const auto& m) { return m.dim(); }, model_);
    }
    const KernelSpec& kernel() const {
        return std::visit([](const auto& m) -> const KernelSpec& { return m.kernel; }, model_);
    }
    /// nu for OC-SVM, C for SVDD.
    double parameter() const {
        if (const auto* oc = std::get_if<OcSvmModel>(&model_)) return oc->nu;
        return std::get<SvddModel>(model_).weight_c;
    }

    const OcSvmModel* ocsvm() const { return std::get_if<OcSvmModel>(&model_); }
    const SvddModel* svdd() const { return std::get_if<SvddModel>(&model_); }

    nlohmann::json to_json() const {
        return std::visit([](const auto& m) { return wtprof::to_json(m); }, model_);
    }

    static OneClassModel from_json(const nlohmann::json& j) {
        const auto type = j.at("type").get<std::string>();
        if (type == "ocsvm") return ocsvm_from_json(j);
        if (type == "svdd") return svdd_from_json(j);
        throw DataError("unknown model type '" + type + "'");
    }

private:
    std::variant<OcSvmModel, SvddModel> model_;
};

/// Trains either model; `param` is nu (OC-SVM) or C (SVDD). `kernel` must be resolved.
inline OneClassModel train_model(Algorithm algo, std::span<const FeatureVector> xs, const GramMatrix& gram,
                                 double param, const KernelSpec& kernel, const SolverOptions& opt = {}) {
    if (algo == Algorithm::OcSvm) return train_ocsvm(xs, gram, param, kernel, opt);
    return train_svdd(xs, gram, param, kernel, opt);
}

inline OneClassModel train_model(Algorithm algo, std::span<const FeatureVector> xs, double param,
                                 const KernelSpec& kernel, const SolverOptions& opt = {}) {
    if (xs.empty()) throw ContractViolation("cannot train on an empty set");
    const auto k = kernel.resolved(xs.front().dim());
    return train_model(algo, xs, gram_matrix(k, xs), param, k, opt);
}

inline void save_model(const std::string& path, const OneClassModel& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file " + path);
    out << m.to_json().dump(1) << '\n';
}

inline OneClassModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read model file " + path);
    try {
        return OneClassModel::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model file " + path + ": " + e.what());
    }
}

}  // namespace wtprof
