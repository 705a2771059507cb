#pragma once

// Who is at the keyboard: score every host window against every user model,
// then smooth the acceptances over the last k windows.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wtprof/error.hpp"
#include "wtprof/features.hpp"
#include "wtprof/model.hpp"

namespace wtprof {

struct TimelineEntry {
    std::int64_t window_start = 0;
    std::vector<std::string> accepted_models;  // sorted
    std::map<std::string, double> scores;
    std::optional<std::string> true_user;
};

/// One entry per window; `truth`, when given, must align with `host_windows`.
inline std::vector<TimelineEntry> score_host_stream(const std::map<std::string, OneClassModel>& models,
                                                    const std::vector<Window>& host_windows,
                                                    const std::vector<std::optional<std::string>>& truth = {}) {
    if (!truth.empty() && truth.size() != host_windows.size())
        throw ContractViolation("ground truth does not match the window list");
    std::vector<TimelineEntry> out;
    out.reserve(host_windows.size());
    for (std::size_t w = 0; w < host_windows.size(); ++w) {
        TimelineEntry e;
        e.window_start = host_windows[w].start;
        for (const auto& [user, m] : models) {
            if (m.dim() != host_windows[w].vector.dim())
                throw DataError("model '" + user + "' expects dimension " + std::to_string(m.dim()) + ", window has " +
                                std::to_string(host_windows[w].vector.dim()));
            const auto d = m.decide(host_windows[w].vector);
            e.scores[user] = d.score;
            if (d.accept) e.accepted_models.push_back(user);
        }
        if (!truth.empty()) e.true_user = truth[w];
        out.push_back(std::move(e));
    }
    return out;
}

/// Majority user among each window's records; ties go to the user whose
/// records came first.
inline std::vector<std::optional<std::string>> window_majority_user(const TransactionLog& log,
                                                                     const std::vector<WindowSpan>& spans) {
    std::vector<std::optional<std::string>> out;
    for (const auto& s : spans) {
        std::vector<std::pair<std::string, std::size_t>> counts;
        for (auto i : s.records) {
            const auto& u = log[i].user_id;
            auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == u; });
            if (it == counts.end())
                counts.emplace_back(u, 1);
            else
                ++it->second;
        }
        std::optional<std::string> best;
        std::size_t best_n = 0;
        for (const auto& [u, n] : counts)
            if (n > best_n) {
                best = u;
                best_n = n;
            }
        out.push_back(best);
    }
    return out;
}

struct IdentityEstimate {
    std::int64_t window_start = 0;
    std::optional<std::string> estimated_user;
    double confidence = 0.0;
};

/// At each window, the share of the last min(k, elapsed) windows each model
/// accepted. The estimate is the unique maximizer; ties and an all-zero
/// horizon give no estimate.
inline std::vector<IdentityEstimate> smooth_identity(const std::vector<TimelineEntry>& timeline, std::size_t k) {
    if (k == 0) throw ConfigError("smoothing horizon k must be at least 1");
    std::vector<IdentityEstimate> out;
    std::map<std::string, std::size_t> counts;
    for (std::size_t n = 0; n < timeline.size(); ++n) {
        for (const auto& u : timeline[n].accepted_models) ++counts[u];
        if (n >= k)
            for (const auto& u : timeline[n - k].accepted_models) --counts[u];
        const std::size_t horizon = std::min(k, n + 1);

        IdentityEstimate est{timeline[n].window_start, std::nullopt, 0.0};
        std::size_t best = 0;
        bool tie = false;
        for (const auto& [u, c] : counts) {
            if (c > best) {
                best = c;
                est.estimated_user = u;
                tie = false;
            } else if (c == best && c > 0) {
                tie = true;
            }
        }
        if (best == 0 || tie) {
            est.estimated_user.reset();
            est.confidence = 0.0;
        } else {
            est.confidence = static_cast<double>(best) / static_cast<double>(horizon);
        }
        out.push_back(std::move(est));
    }
    return out;
}

/// `window_start,true_user,estimated_user,confidence,accepted`, the last
/// column holding semicolon-joined user keys.
inline void write_timeline_csv(std::ostream& out, const std::vector<TimelineEntry>& timeline,
                               const std::vector<IdentityEstimate>& estimates) {
    if (timeline.size() != estimates.size()) throw ContractViolation("timeline and estimates differ in length");
    out << "window_start,true_user,estimated_user,confidence,accepted\n";
    char buf[32];
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        const auto& e = timeline[i];
        std::snprintf(buf, sizeof buf, "%.4f", estimates[i].confidence);
        out << e.window_start << ',' << e.true_user.value_or("") << ','
            << estimates[i].estimated_user.value_or("") << ',' << buf << ',';
        for (std::size_t a = 0; a < e.accepted_models.size(); ++a) out << (a ? ";" : "") << e.accepted_models[a];
        out << '\n';
    }
}

}  // namespace wtprof
