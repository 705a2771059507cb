#include <gtest/gtest.h>

#include <cmath>

#include "support/qp_oracle.hpp"
#include "wtprof/kernels.hpp"
#include "wtprof/synth.hpp"

using namespace wtprof;

namespace {

FeatureVector random_vector(Rng& rng, std::size_t dim, double density = 0.5) {
    std::vector<double> v(dim, 0.0);
    for (auto& x : v)
        if (rng.uniform() < density) x = rng.uniform();
    return FeatureVector::from_dense(v);
}

std::vector<KernelSpec> all_kernels() {
    return {KernelSpec::linear(), KernelSpec::rbf(), KernelSpec::rbf(0.7), KernelSpec::polynomial(),
            KernelSpec::polynomial(2, 0.5, 1.0), KernelSpec::sigmoid(), KernelSpec::sigmoid(0.3, -0.2)};
}

oracle::KernelParams to_oracle(const KernelSpec& k) {
    oracle::KernelParams p;
    p.kind = static_cast<oracle::Kind>(k.kind);
    p.width = k.rbf_width.value_or(1.0);
    p.scale = k.scale.value_or(1.0);
    p.coef0 = k.coef0;
    p.degree = k.poly_degree;
    return p;
}

}  // namespace

TEST(Kernels, RbfOfIdenticalVectorsIsOne) {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto x = random_vector(rng, 7);
        EXPECT_EQ(eval_kernel(KernelSpec::rbf().resolved(7), x, x), 1.0);
    }
}

TEST(Kernels, LinearOfAggregatedExample) {
    const std::vector<double> dense{1, 1, 0.167, 0.667, 0};
    const auto x = FeatureVector::from_dense(dense);
    EXPECT_NEAR(eval_kernel(KernelSpec::linear(), x, x), 1 + 1 + 0.167 * 0.167 + 0.667 * 0.667, 1e-12);
    EXPECT_NEAR(eval_kernel(KernelSpec::linear(), x, x), 2.4728, 1e-4);
}

TEST(Kernels, ZeroScaleSigmoidIsZero) {
    Rng rng(2);
    const auto k = KernelSpec::sigmoid(0.0, 0.0);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(eval_kernel(k, random_vector(rng, 5), random_vector(rng, 5)), 0.0);
}

TEST(Kernels, DimensionMismatchIsContractViolation) {
    const auto a = FeatureVector::from_dense(std::vector<double>{1, 0});
    const auto b = FeatureVector::from_dense(std::vector<double>{1, 0, 0});
    for (const auto& k : all_kernels()) EXPECT_THROW(eval_kernel(k, a, b), ContractViolation);
}

TEST(Kernels, DefaultsResolveFromDimension) {
    const auto rbf = KernelSpec::rbf().resolved(10);
    EXPECT_DOUBLE_EQ(*rbf.rbf_width, 5.0);
    const auto poly = KernelSpec::polynomial().resolved(8);
    EXPECT_DOUBLE_EQ(*poly.scale, 0.125);
    EXPECT_EQ(poly.poly_degree, 3);
    EXPECT_EQ(poly.coef0, 0.0);
    EXPECT_THROW(KernelSpec::rbf(-1.0).resolved(3), ConfigError);
    EXPECT_THROW(KernelSpec::polynomial(0).resolved(3), ConfigError);
    EXPECT_THROW(kernel_kind_from_string("cosine"), ConfigError);
}

TEST(Kernels, MatchDenseReferenceAndAreSymmetric) {
    Rng rng(3);
    for (const auto& spec : all_kernels()) {
        const auto k = spec.resolved(6);
        const auto ref = to_oracle(k);
        for (int t = 0; t < 30; ++t) {
            const auto x = random_vector(rng, 6);
            const auto y = random_vector(rng, 6);
            const double kxy = eval_kernel(k, x, y);
            EXPECT_EQ(kxy, eval_kernel(k, y, x));
            EXPECT_NEAR(kxy, oracle::dense_kernel(ref, x.dense(), y.dense()), 1e-12);
            if (k.kind == KernelKind::Rbf) {
                EXPECT_GT(kxy, 0.0);
                EXPECT_LE(kxy, 1.0);
            }
        }
    }
}

TEST(Kernels, LinearIsBilinear) {
    Rng rng(4);
    for (int t = 0; t < 30; ++t) {
        const auto x = random_vector(rng, 9), y = random_vector(rng, 9), z = random_vector(rng, 9);
        auto dx = x.dense(), dy = y.dense(), dz = z.dense();
        std::vector<double> mix(9);
        for (std::size_t i = 0; i < 9; ++i) mix[i] = 0.25 * dx[i] + 0.5 * dy[i];
        const auto m = FeatureVector::from_dense(mix);
        const auto lin = KernelSpec::linear();
        EXPECT_NEAR(eval_kernel(lin, m, z), 0.25 * eval_kernel(lin, x, z) + 0.5 * eval_kernel(lin, y, z), 1e-12);
        double explicit_dot = 0.0;
        for (std::size_t i = 0; i < 9; ++i) explicit_dot += dx[i] * dz[i];
        EXPECT_NEAR(eval_kernel(lin, x, z), explicit_dot, 1e-14);
    }
}

TEST(GramMatrix, ShapesAndSymmetry) {
    Rng rng(5);
    const std::vector<FeatureVector> one{random_vector(rng, 4)};
    const auto g1 = gram_matrix(KernelSpec::linear(), one);
    ASSERT_EQ(g1.size(), 1u);
    EXPECT_EQ(g1(0, 0), dot(one[0], one[0]));

    std::vector<FeatureVector> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(random_vector(rng, 12));
    for (const auto& spec : all_kernels()) {
        const auto k = spec.resolved(12);
        const auto g = gram_matrix(k, xs);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                EXPECT_NEAR(g(i, j), g(j, i), 1e-12);
                EXPECT_NEAR(g(i, j), eval_kernel(k, xs[j], xs[i]), 1e-12);
            }
        if (k.kind == KernelKind::Rbf) {
            for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(g(i, i), 1.0);
        }
    }
}

TEST(KernelSpec, JsonRoundTrip) {
    for (const auto& spec : all_kernels()) {
        const auto k = spec.resolved(5);
        EXPECT_EQ(KernelSpec::from_json(k.to_json()), k);
    }
}

TEST(Kernels, ProbeMatchesPairwiseEvaluationExactly) {
    Rng rng(77);
    for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(), KernelSpec::polynomial(2, std::nullopt, 1.0),
                             KernelSpec::sigmoid()}) {
        const auto k = spec.resolved(12);
        std::vector<FeatureVector> xs;
        for (int i = 0; i < 20; ++i) {
            std::vector<FeatureEntry> e;
            for (Column c = 0; c < 12; ++c)
                if (rng.uniform() < 0.4) e.push_back({c, rng.uniform()});
            xs.emplace_back(12, std::move(e));
        }
        for (const auto& x : xs) {
            const KernelProbe probe(k, x);
            EXPECT_EQ(probe.self(), eval_kernel(k, x, x));
            for (const auto& y : xs) EXPECT_EQ(probe(y), eval_kernel(k, y, x));
        }
    }
}
