#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wtprof/error.hpp"
#include "wtprof/features.hpp"

namespace wtprof {

enum class KernelKind { Linear, Polynomial, Rbf, Sigmoid };

inline constexpr std::string_view to_string(KernelKind k) {
    switch (k) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Polynomial: return "poly";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::Sigmoid: return "sigmoid";
    }
    return "";
}

inline KernelKind kernel_kind_from_string(std::string_view s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "poly" || s == "polynomial") return KernelKind::Polynomial;
    if (s == "rbf") return KernelKind::Rbf;
    if (s == "sigmoid") return KernelKind::Sigmoid;
    throw ConfigError("unknown kernel '" + std::string(s) + "'");
}

/// Kernel choice plus its parameters. Unset parameters take dimension-based
/// defaults in resolved(): RBF width dim/2, polynomial/sigmoid scale 1/dim.
struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    std::optional<double> rbf_width;  // k = exp(-|x-y|^2 / width)
    int poly_degree = 3;
    double coef0 = 0.0;
    std::optional<double> scale;

    static KernelSpec linear() { return {}; }
    static KernelSpec rbf(std::optional<double> width = std::nullopt) {
        KernelSpec k;
        k.kind = KernelKind::Rbf;
        k.rbf_width = width;
        return k;
    }
    static KernelSpec polynomial(int degree = 3, std::optional<double> scale = std::nullopt, double coef0 = 0.0) {
        KernelSpec k;
        k.kind = KernelKind::Polynomial;
        k.poly_degree = degree;
        k.scale = scale;
        k.coef0 = coef0;
        return k;
    }
    static KernelSpec sigmoid(std::optional<double> scale = std::nullopt, double coef0 = 0.0) {
        KernelSpec k;
        k.kind = KernelKind::Sigmoid;
        k.scale = scale;
        k.coef0 = coef0;
        return k;
    }

    KernelSpec resolved(std::size_t dim) const {
        KernelSpec k = *this;
        const double d = static_cast<double>(dim == 0 ? 1 : dim);
        if (k.kind == KernelKind::Rbf && !k.rbf_width) k.rbf_width = d / 2.0;
        if ((k.kind == KernelKind::Polynomial || k.kind == KernelKind::Sigmoid) && !k.scale) k.scale = 1.0 / d;
        k.validate();
        return k;
    }

    void validate() const {
        if (kind == KernelKind::Rbf && rbf_width && !(*rbf_width > 0.0))
            throw ConfigError("RBF width must be positive");
        if (kind == KernelKind::Polynomial && poly_degree < 1) throw ConfigError("polynomial degree must be >= 1");
    }

    /// True when k(x,x) is the same for every x (RBF), which makes the SVDD and
    /// OC-SVM duals differ by a constant only.
    bool constant_diagonal() const { return kind == KernelKind::Rbf; }

    /// Compact label such as "rbf(width=4)".
    std::string label() const {
        char buf[96];
        switch (kind) {
            case KernelKind::Linear: return "linear";
            case KernelKind::Rbf:
                if (!rbf_width) return "rbf";
                std::snprintf(buf, sizeof buf, "rbf(width=%g)", *rbf_width);
                return buf;
            case KernelKind::Polynomial:
                std::snprintf(buf, sizeof buf, "poly(degree=%d)", poly_degree);
                return buf;
            case KernelKind::Sigmoid: return "sigmoid";
        }
        return "";
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = std::string(to_string(kind));
        if (rbf_width) j["rbf_width"] = *rbf_width;
        j["degree"] = poly_degree;
        j["coef0"] = coef0;
        if (scale) j["scale"] = *scale;
        return j;
    }

    static KernelSpec from_json(const nlohmann::json& j) {
        KernelSpec k;
        k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("rbf_width")) k.rbf_width = j.at("rbf_width").get<double>();
        k.poly_degree = j.value("degree", 3);
        k.coef0 = j.value("coef0", 0.0);
        if (j.contains("scale")) k.scale = j.at("scale").get<double>();
        k.validate();
        return k;
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Parses "linear", "rbf", "rbf:WIDTH", "poly", "poly:DEGREE" or "sigmoid".
inline KernelSpec parse_kernel_spec(std::string_view text) {
    const auto colon = text.find(':');
    const auto kind = kernel_kind_from_string(text.substr(0, colon));
    KernelSpec k;
    k.kind = kind;
    if (colon == std::string_view::npos) return k;
    const std::string arg(text.substr(colon + 1));
    std::size_t used = 0;
    try {
        if (kind == KernelKind::Rbf) {
            k.rbf_width = std::stod(arg, &used);
        } else if (kind == KernelKind::Polynomial) {
            k.poly_degree = std::stoi(arg, &used);
        } else {
            throw ConfigError("kernel '" + std::string(text) + "' takes no argument");
        }
    } catch (const std::logic_error&) {
        throw ConfigError("bad kernel argument in '" + std::string(text) + "'");
    }
    if (used != arg.size()) throw ConfigError("bad kernel argument in '" + std::string(text) + "'");
    k.validate();
    return k;
}

namespace detail {

inline double int_pow(double base, int exp) {
    double r = 1.0;
    while (exp > 0) {
        if (exp & 1) r *= base;
        base *= base;
        exp >>= 1;
    }
    return r;
}

}  // namespace detail

/// Kernel value from the inner product and both squared norms. The RBF
/// distance is |x|^2 + |y|^2 - 2<x,y>, clamped at zero.
inline double kernel_from_parts(const KernelSpec& spec, double xy, double xx, double yy, std::size_t dim) {
    switch (spec.kind) {
        case KernelKind::Linear: return xy;
        case KernelKind::Rbf: {
            const double width = spec.rbf_width.value_or(static_cast<double>(dim) / 2.0);
            return std::exp(-std::max(0.0, xx + yy - 2.0 * xy) / width);
        }
        case KernelKind::Polynomial: {
            const double s = spec.scale.value_or(1.0 / static_cast<double>(dim));
            return detail::int_pow(s * xy + spec.coef0, spec.poly_degree);
        }
        case KernelKind::Sigmoid: {
            const double s = spec.scale.value_or(1.0 / static_cast<double>(dim));
            return std::tanh(s * xy + spec.coef0);
        }
    }
    return 0.0;
}

/// k(x,y) for a resolved spec.
inline double eval_kernel(const KernelSpec& spec, const FeatureVector& x, const FeatureVector& y) {
    if (x.dim() != y.dim()) throw ContractViolation("kernel arguments differ in dimension");
    const bool norms = spec.kind == KernelKind::Rbf;
    return kernel_from_parts(spec, dot(x, y), norms ? squared_norm(x) : 0.0, norms ? squared_norm(y) : 0.0, x.dim());
}

/// One query vector scattered into a dense buffer, so that its kernel value
/// against each sparse vector costs one pass over that vector's entries.
/// Results are bit-identical to eval_kernel.
class KernelProbe {
public:
    KernelProbe(const KernelSpec& spec, const FeatureVector& x)
        : spec_(spec), dense_(x.dim(), 0.0), xx_(squared_norm(x)) {
        for (const auto& e : x.entries()) dense_[e.column] = e.value;
    }

    std::size_t dim() const noexcept { return dense_.size(); }

    double operator()(const FeatureVector& y) const {
        if (y.dim() != dense_.size()) throw ContractViolation("kernel arguments differ in dimension");
        double xy = 0.0, yy = 0.0;
        for (const auto& e : y.entries()) {
            xy += e.value * dense_[e.column];
            yy += e.value * e.value;
        }
        return kernel_from_parts(spec_, xy, yy, xx_, dense_.size());
    }

    /// k(x,x).
    double self() const { return kernel_from_parts(spec_, xx_, xx_, xx_, dense_.size()); }

private:
    const KernelSpec& spec_;
    std::vector<double> dense_;
    double xx_;
};

/// Dense symmetric l x l matrix, row-major.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// G[i][j] = k(x_i, x_j), evaluated once per unordered pair.
inline GramMatrix gram_matrix(const KernelSpec& spec, std::span<const FeatureVector> xs) {
    GramMatrix g(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].dim() != xs.front().dim()) throw ContractViolation("training vectors differ in dimension");
        const KernelProbe probe(spec, xs[i]);
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = probe(xs[j]);
            g(i, j) = k;
            g(j, i) = k;
        }
    }
    return g;
}

}  // namespace wtprof
