#pragma once

#include <vector>

#include "wtprof/model.hpp"
#include "wtprof/synth.hpp"

namespace wtprof::testing {

/// Columns [base, base+3) set to 1, columns base+3 and base+4 uniform in [0,1).
inline std::vector<FeatureVector> pattern_windows(Rng& rng, std::size_t n, Column base, std::size_t dim = 10) {
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<FeatureEntry> e{{base, 1.0}, {base + 1, 1.0}, {base + 2, 1.0}};
        e.push_back({base + 3, rng.uniform()});
        e.push_back({base + 4, rng.uniform()});
        out.emplace_back(dim, std::move(e));
    }
    return out;
}

/// Linear OC-SVM whose score is x.sv - rho; rho < 0 accepts every
/// non-negative vector, a huge rho rejects everything.
inline OneClassModel fixed_model(std::size_t dim, double rho) {
    OcSvmModel m;
    m.support_vectors.push_back(FeatureVector(dim, {{0, 1.0}}));
    m.alphas = {1.0};
    m.rho = rho;
    m.kernel = KernelSpec::linear().resolved(dim);
    m.nu = 1.0;
    m.train_size = 1;
    return m;
}

/// Small multi-user synthetic config.
inline SynthConfig small_config(std::size_t users, double weeks, double rate, std::uint64_t seed,
                                double active_fraction = 0.1) {
    SynthConfig cfg;
    cfg.weeks = weeks;
    cfg.n_hosts = 4;
    cfg.rng_seed = seed;
    ProfileOptions po;
    po.n_users = users;
    po.rate_per_min = rate;
    po.active_fraction = active_fraction;
    po.overlap = 0.5;
    po.seed = seed;
    cfg.users = make_profiles(po);
    return cfg;
}

}  // namespace wtprof::testing
