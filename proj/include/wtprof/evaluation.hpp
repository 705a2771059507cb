#pragma once

// Acceptance metrics, the pairwise confusion matrix and the two-stage grid
// search (window parameters globally, kernel and nu/C per user).

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wtprof/error.hpp"
#include "wtprof/features.hpp"
#include "wtprof/model.hpp"
#include "wtprof/parallel.hpp"

namespace wtprof {

using UserModels = std::map<std::string, OneClassModel>;
using UserWindows = std::map<std::string, std::vector<FeatureVector>>;

/// Percentage of `windows` the model accepts.
inline double acceptance_ratio(const OneClassModel& model, std::span<const FeatureVector> windows) {
    if (windows.empty()) throw UndefinedRatio("acceptance ratio over an empty window list");
    std::size_t accepted = 0;
    for (const auto& w : windows) accepted += model.decide(w).accept;
    return 100.0 * static_cast<double>(accepted) / static_cast<double>(windows.size());
}

struct AcceptanceReport {
    std::vector<std::string> users;             // row (model) and column (test set) order
    std::vector<std::vector<double>> per_pair;  // per_pair[model][test], percent
    double acc_self = 0.0;
    double acc_other = 0.0;  // 0 with other_defined = false for a single user
    double acc = 0.0;
    bool other_defined = true;

    double at(const std::string& model_user, const std::string& test_user) const {
        const auto row = std::find(users.begin(), users.end(), model_user);
        const auto col = std::find(users.begin(), users.end(), test_user);
        if (row == users.end() || col == users.end()) throw ContractViolation("unknown user in report lookup");
        return per_pair[static_cast<std::size_t>(row - users.begin())][static_cast<std::size_t>(col - users.begin())];
    }
};

namespace detail {

/// Fills the ACC summary from the matrix. ACC_other averages every
/// off-diagonal cell.
inline void summarize(AcceptanceReport& r) {
    const std::size_t n = r.users.size();
    double self = 0.0, other = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) (i == j ? self : other) += r.per_pair[i][j];
    r.acc_self = n ? self / static_cast<double>(n) : 0.0;
    r.other_defined = n > 1;
    r.acc_other = r.other_defined ? other / static_cast<double>(n * (n - 1)) : 0.0;
    r.acc = r.acc_self - r.acc_other;
}

}  // namespace detail

/// Feeds every user's test windows to every user's model.
inline AcceptanceReport evaluate_pairwise(const UserModels& models, const UserWindows& tests, std::size_t workers = 1) {
    AcceptanceReport r;
    for (const auto& [user, m] : models) {
        if (!tests.contains(user)) throw DataError("no test windows for user '" + user + "'");
        r.users.push_back(user);
    }
    const std::size_t n = r.users.size();
    r.per_pair.assign(n, std::vector<double>(n, 0.0));
    parallel_for(n * n, workers, [&](std::size_t cell) {
        const auto& model = models.at(r.users[cell / n]);
        const auto& test = tests.at(r.users[cell % n]);
        try {
            r.per_pair[cell / n][cell % n] = acceptance_ratio(model, test);
        } catch (const UndefinedRatio&) {
            throw UndefinedRatio("no test windows for user '" + r.users[cell % n] + "'");
        }
    });
    detail::summarize(r);
    return r;
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace detail

/// Rows are models, columns test sets.
inline void write_confusion_csv(std::ostream& out, const AcceptanceReport& r) {
    out << "model";
    for (const auto& u : r.users) out << ',' << u;
    out << '\n';
    for (std::size_t i = 0; i < r.users.size(); ++i) {
        out << r.users[i];
        for (double v : r.per_pair[i]) out << ',' << detail::fmt(v);
        out << '\n';
    }
}

inline nlohmann::json to_json(const AcceptanceReport& r) {
    nlohmann::json pairs = nlohmann::json::object();
    for (std::size_t i = 0; i < r.users.size(); ++i)
        for (std::size_t j = 0; j < r.users.size(); ++j) pairs[r.users[i]][r.users[j]] = r.per_pair[i][j];
    return {{"acc_self", r.acc_self},
            {"acc_other", r.acc_other},
            {"acc_other_defined", r.other_defined},
            {"acc", r.acc},
            {"users", r.users},
            {"per_pair", pairs}};
}

// ---------------------------------------------------------------------------
// Grid search

/// Keeps at most `cap` windows, evenly spread over the sequence.
inline std::vector<FeatureVector> subsample_evenly(std::vector<FeatureVector> xs, std::size_t cap) {
    if (cap == 0 || xs.size() <= cap) return xs;
    std::vector<FeatureVector> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(std::move(xs[i * xs.size() / cap]));
    return out;
}

struct WindowGridPoint {
    std::int64_t duration = 60;
    std::int64_t shift = 30;

    friend bool operator==(const WindowGridPoint&, const WindowGridPoint&) = default;
};

enum class RankKey { AccSelf, Acc };

inline RankKey rank_key_from_string(std::string_view s) {
    if (s == "acc_self") return RankKey::AccSelf;
    if (s == "acc") return RankKey::Acc;
    throw ConfigError("unknown ranking key '" + std::string(s) + "'");
}

struct EvalOptions {
    std::size_t workers = 1;
    std::size_t max_train_windows = 2000;  // per user; 0 keeps all
    SolverOptions solver;
};

struct WindowGridResult {
    WindowGridPoint point;
    double acc_self = 0.0;
    double acc_other = 0.0;
    double acc = 0.0;
    std::size_t users = 0;
};

/// Per-user training windows of a log, capped as configured.
inline UserWindows training_windows(const TransactionLog& log, const Vocabulary& vocab, const WindowConfig& cfg,
                                    std::size_t cap) {
    UserWindows out;
    for (auto& [user, ws] : group_by_key(window_stream(log, cfg, vocab)))
        out[user] = subsample_evenly(vectors_of(ws), cap);
    return out;
}

/// One model per user with fixed algorithm, kernel and parameter.
inline UserModels train_user_models(Algorithm algo, const UserWindows& train, const KernelSpec& kernel, double param,
                                    const EvalOptions& opt) {
    std::vector<std::string> users;
    for (const auto& [u, ws] : train) users.push_back(u);
    std::vector<std::optional<OneClassModel>> slots(users.size());
    parallel_for(users.size(), opt.workers, [&](std::size_t i) {
        try {
            slots[i] = train_model(algo, train.at(users[i]), param, kernel, opt.solver);
        } catch (const SolverError& e) {
            throw SolverError("user '" + users[i] + "': " + e.what(), e.kkt_gap());
        }
    });
    UserModels out;
    for (std::size_t i = 0; i < users.size(); ++i) out.emplace(users[i], std::move(*slots[i]));
    return out;
}

/// Stage one: every (D,S) pair is scored with one model per user trained on
/// its training windows. Self acceptance is measured on those same windows,
/// other acceptance on the other users' training windows. Results come back
/// ranked by `key` (descending); equal keys keep grid order.
inline std::vector<WindowGridResult> grid_search_window(const TransactionLog& train_log, const Vocabulary& vocab,
                                                        const std::vector<WindowGridPoint>& grid, Algorithm algo,
                                                        const KernelSpec& kernel, double param, RankKey key,
                                                        const EvalOptions& opt = {}) {
    if (train_log.users().size() < 2) throw ConfigError("window grid search needs at least two users");
    if (grid.empty()) throw ConfigError("empty window grid");
    std::vector<WindowGridResult> results;
    for (const auto& p : grid) {
        const WindowConfig cfg{p.duration, p.shift, KeyMode::PerUser};
        cfg.validate();
        const auto train = training_windows(train_log, vocab, cfg, opt.max_train_windows);
        UserModels models;
        try {
            models = train_user_models(algo, train, kernel, param, opt);
        } catch (const SolverError& e) {
            throw SolverError("grid point D=" + std::to_string(p.duration) + " S=" + std::to_string(p.shift) + ": " +
                                  e.what(),
                              e.kkt_gap());
        }
        const auto report = evaluate_pairwise(models, train, opt.workers);
        results.push_back({p, report.acc_self, report.acc_other, report.acc, report.users.size()});
    }
    std::stable_sort(results.begin(), results.end(), [key](const WindowGridResult& a, const WindowGridResult& b) {
        return key == RankKey::AccSelf ? a.acc_self > b.acc_self : a.acc > b.acc;
    });
    return results;
}

struct ModelGridCell {
    KernelSpec kernel;  // as listed in the grid (unresolved)
    double param = 0.0;
    bool ok = false;
    std::string error;
    double acc_self = 0.0;
    double acc_other = 0.0;
    double acc = 0.0;
    std::size_t support_vectors = 0;
};

struct ModelGridResult {
    std::vector<ModelGridCell> cells;  // kernel-major, grid order
    std::size_t best = 0;

    const ModelGridCell& best_cell() const { return cells.at(best); }
};

/// Index of the successful cell with the highest ACC in a kernel-major grid
/// with `params_per_kernel` columns. Ties go to the earlier kernel, then to the
/// larger parameter.
inline std::size_t select_best_cell(const std::vector<ModelGridCell>& cells, std::size_t params_per_kernel) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!cells[c].ok) continue;
        if (!best) {
            best = c;
            continue;
        }
        const auto& b = cells[*best];
        const bool same_kernel = c / params_per_kernel == *best / params_per_kernel;
        if (cells[c].acc > b.acc || (cells[c].acc == b.acc && same_kernel && cells[c].param > b.param)) best = c;
    }
    if (!best) throw SolverError("every model grid cell failed: " + (cells.empty() ? "empty grid" : cells.front().error));
    return *best;
}

/// Stage two for one user: ACC for every (kernel, param) cell. Each kernel's
/// Gram matrix and its cross-kernel matrix against the other users' windows
/// are computed once and shared by all parameter values. The best cell
/// maximizes ACC; ties go to the earlier kernel, then the larger parameter.
inline ModelGridResult grid_search_model(Algorithm algo, std::span<const FeatureVector> user_train,
                                         const std::vector<std::vector<FeatureVector>>& others,
                                         const std::vector<KernelSpec>& kernel_grid,
                                         const std::vector<double>& param_grid, const SolverOptions& solver = {}) {
    if (user_train.empty()) throw ContractViolation("grid search on an empty training set");
    if (kernel_grid.empty() || param_grid.empty()) throw ConfigError("empty model grid");
    const std::size_t l = user_train.size();

    std::vector<const FeatureVector*> flat;
    std::vector<std::size_t> owner;
    for (std::size_t u = 0; u < others.size(); ++u) {
        if (others[u].empty()) throw ContractViolation("other user without windows");
        for (const auto& w : others[u]) {
            flat.push_back(&w);
            owner.push_back(u);
        }
    }

    ModelGridResult result;
    for (const auto& spec : kernel_grid) {
        const auto k = spec.resolved(user_train.front().dim());
        const auto gram = gram_matrix(k, user_train);
        std::vector<double> cross(flat.size() * l);  // cross[o * l + i] = k(x_i, other_o)
        std::vector<double> self_k(flat.size());
        for (std::size_t o = 0; o < flat.size(); ++o) {
            const KernelProbe probe(k, *flat[o]);
            for (std::size_t i = 0; i < l; ++i) cross[o * l + i] = probe(user_train[i]);
            self_k[o] = probe.self();
        }

        for (double param : param_grid) {
            ModelGridCell cell;
            cell.kernel = spec;
            cell.param = param;
            try {
                const auto model = train_model(algo, user_train, gram, param, k, solver);
                const auto& idx = model.support_indices();
                const auto& alpha = model.alphas();
                auto expand = [&](auto kernel_at) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < idx.size(); ++j) s += alpha[j] * kernel_at(idx[j]);
                    return s;
                };
                std::size_t self_ok = 0;
                for (std::size_t t = 0; t < l; ++t) {
                    const double e = expand([&](std::size_t i) { return gram(i, t); });
                    self_ok += model.decide_from_expansion(e, gram(t, t)).accept;
                }
                std::vector<std::size_t> hits(others.size(), 0);
                for (std::size_t o = 0; o < flat.size(); ++o) {
                    const double e = expand([&](std::size_t i) { return cross[o * l + i]; });
                    hits[owner[o]] += model.decide_from_expansion(e, self_k[o]).accept;
                }
                cell.acc_self = 100.0 * static_cast<double>(self_ok) / static_cast<double>(l);
                double other = 0.0;
                for (std::size_t u = 0; u < others.size(); ++u)
                    other += 100.0 * static_cast<double>(hits[u]) / static_cast<double>(others[u].size());
                cell.acc_other = others.empty() ? 0.0 : other / static_cast<double>(others.size());
                cell.acc = cell.acc_self - cell.acc_other;
                cell.support_vectors = model.support_count();
                cell.ok = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            result.cells.push_back(std::move(cell));
        }
    }

    result.best = select_best_cell(result.cells, param_grid.size());
    return result;
}

inline void write_window_grid_csv(std::ostream& out, const std::vector<WindowGridResult>& rs) {
    out << "rank,duration,shift,acc_self,acc_other,acc\n";
    for (std::size_t i = 0; i < rs.size(); ++i)
        out << i + 1 << ',' << rs[i].point.duration << ',' << rs[i].point.shift << ',' << detail::fmt(rs[i].acc_self)
            << ',' << detail::fmt(rs[i].acc_other) << ',' << detail::fmt(rs[i].acc) << '\n';
}

/// Kernel grid entry written back in the syntax parse_kernel_spec accepts.
inline std::string kernel_token(const KernelSpec& k) {
    std::string s(to_string(k.kind));
    if (k.kind == KernelKind::Rbf && k.rbf_width) s += ':' + detail::fmt(*k.rbf_width, "%g");
    if (k.kind == KernelKind::Polynomial && k.poly_degree != 3) s += ':' + std::to_string(k.poly_degree);
    return s;
}

}  // namespace wtprof
