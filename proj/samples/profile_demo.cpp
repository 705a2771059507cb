// Library walk-through: synthesize three users, train one model each, print
// the confusion matrix on their newest records, then identify who uses a
// shared desk.

#include <cstdio>

#include "wtprof/wtprof.hpp"

using namespace wtprof;

int main() {
    SynthConfig cfg;
    cfg.weeks = 1.0;
    cfg.n_hosts = 4;
    cfg.rng_seed = 2024;
    ProfileOptions po;
    po.n_users = 3;
    po.rate_per_min = 3.0;
    po.active_fraction = 0.1;
    po.overlap = 0.5;
    po.seed = 2024;
    cfg.users = make_profiles(po);

    const auto log = generate_synthetic(cfg);
    const auto split = split_oldest(log, 0.75);
    const auto vocab = build_vocabulary(split.train);
    const WindowConfig windows{60, 30, KeyMode::PerUser};
    std::printf("%zu transactions, %zu feature columns\n", log.size(), vocab.total_dim());

    const auto train = training_windows(split.train, vocab, windows, 2000);
    UserModels models;
    for (const auto& [user, xs] : train) {
        models.emplace(user, train_model(Algorithm::OcSvm, xs, 0.05, KernelSpec::rbf()));
        std::printf("%s: %zu windows, %zu support vectors\n", user.c_str(), xs.size(),
                    models.at(user).support_count());
    }

    UserWindows test;
    for (auto& [user, ws] : group_by_key(window_stream(split.test, windows, vocab))) test[user] = vectors_of(ws);
    const auto report = evaluate_pairwise(models, test);
    std::printf("\nacceptance (rows = models, columns = test users)\n");
    for (std::size_t i = 0; i < report.users.size(); ++i) {
        std::printf("%-8s", report.users[i].c_str());
        for (double v : report.per_pair[i]) std::printf(" %6.1f", v);
        std::printf("\n");
    }
    std::printf("ACC_self %.1f  ACC_other %.1f  ACC %.1f\n", report.acc_self, report.acc_other, report.acc);

    // Three users take turns at one desk, 20 minutes each.
    const std::int64_t t0 = cfg.end_time() + 3600;
    const auto desk = generate_host_session(cfg, "desk", {{0, t0, 1200}, {2, t0 + 1200, 1200}, {1, t0 + 2400, 1200}}, 7);
    const WindowConfig host_windows{60, 30, KeyMode::PerHost};
    const auto timeline = score_host_stream(models, window_stream(desk, host_windows, vocab),
                                            window_majority_user(desk, window_spans(desk, host_windows)));
    const auto estimates = smooth_identity(timeline, 10);
    std::printf("\nminute  true      estimate  confidence\n");
    for (std::size_t i = 0; i < timeline.size(); i += 8)
        std::printf("%6lld  %-8s  %-8s  %.2f\n", static_cast<long long>((timeline[i].window_start - t0) / 60),
                    timeline[i].true_user.value_or("-").c_str(), estimates[i].estimated_user.value_or("-").c_str(),
                    estimates[i].confidence);
    return 0;
}
