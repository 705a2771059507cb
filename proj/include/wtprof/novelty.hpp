#pragma once

// Temporal novelty: how much of a user's later behavior was never seen before
// an epoch delimiter t, at the level of field values and of whole windows.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "wtprof/error.hpp"
#include "wtprof/features.hpp"

namespace wtprof {

inline constexpr std::int64_t kSecondsPerWeek = 7 * 24 * 3600;

/// Delimiter `t_weeks` after the first record of `user_log`.
inline std::int64_t epoch_delimiter(const TransactionLog& user_log, double t_weeks) {
    if (user_log.empty()) throw ContractViolation("epoch delimiter of an empty log");
    return user_log[0].timestamp + static_cast<std::int64_t>(std::llround(t_weeks * kSecondsPerWeek));
}

/// Non-empty values of `field` in records before (observed) and from (subsequent) the delimiter.
struct FieldSplit {
    std::set<std::string> observed;
    std::set<std::string> subsequent;
    std::size_t subsequent_records = 0;
};

inline FieldSplit split_field_values(const TransactionLog& user_log, double t_weeks, OpenField field) {
    FieldSplit s;
    if (user_log.empty()) return s;
    const auto t = epoch_delimiter(user_log, t_weeks);
    for (const auto& tx : user_log) {
        auto v = field_value(tx, field);
        if (tx.timestamp >= t) ++s.subsequent_records;
        if (v.empty()) continue;
        (tx.timestamp < t ? s.observed : s.subsequent).insert(std::move(v));
    }
    return s;
}

/// Values seen from the delimiter on that never appeared before it.
inline std::set<std::string> novel_values(const TransactionLog& user_log, double t_weeks, OpenField field) {
    const auto s = split_field_values(user_log, t_weeks, field);
    std::set<std::string> out;
    for (const auto& v : s.subsequent)
        if (!s.observed.contains(v)) out.insert(v);
    return out;
}

/// |values(subsequent) \ values(observed)| / |values(subsequent)|, 0 when the
/// subsequent records carry no value for the field.
inline double novelty_features(const TransactionLog& user_log, double t_weeks, OpenField field) {
    const auto s = split_field_values(user_log, t_weeks, field);
    if (s.subsequent.empty()) return 0.0;
    std::size_t novel = 0;
    for (const auto& v : s.subsequent) novel += !s.observed.contains(v);
    return static_cast<double>(novel) / static_cast<double>(s.subsequent.size());
}

/// Share of subsequent window vectors not exactly equal to any observed one.
inline double novelty_windows(std::span<const FeatureVector> observed, std::span<const FeatureVector> subsequent) {
    if (subsequent.empty()) throw UndefinedRatio("window novelty over an empty subsequent set");
    const std::unordered_set<FeatureVector, FeatureVectorHash> seen(observed.begin(), observed.end());
    std::size_t novel = 0;
    for (const auto& v : subsequent) novel += !seen.contains(v);
    return static_cast<double>(novel) / static_cast<double>(subsequent.size());
}

inline constexpr std::array<OpenField, 3> kNoveltyFields{OpenField::Category, OpenField::Subtype,
                                                         OpenField::ApplicationType};

struct NoveltyPoint {
    int week = 0;
    std::string series;  // field name or "windows"
    double mean = 0.0;
    double variance = 0.0;  // population variance across users
    std::size_t users = 0;  // users contributing to this point
};

/// Mean and variance across users of the field and window novelty ratios at
/// delimiters of 1..max_week weeks. A user contributes to a point only when
/// they have records (windows for the window series) after the delimiter.
inline std::vector<NoveltyPoint> novelty_curve(const TransactionLog& log, const Vocabulary& vocab,
                                               const WindowConfig& window_cfg, int max_week = 21) {
    struct PerUser {
        TransactionLog records;
        std::vector<Window> windows;
    };
    std::vector<PerUser> users;
    const auto grouped = group_by_key(window_stream(log, window_cfg, vocab));
    for (const auto& u : log.users()) {
        auto mine = log.for_user(u);
        auto it = grouped.find(u);
        users.push_back({std::move(mine), it == grouped.end() ? std::vector<Window>{} : it->second});
    }

    auto summarize = [](int week, std::string name, const std::vector<double>& xs) {
        NoveltyPoint p{week, std::move(name)};
        p.users = xs.size();
        if (xs.empty()) return p;
        for (double x : xs) p.mean += x;
        p.mean /= static_cast<double>(xs.size());
        for (double x : xs) p.variance += (x - p.mean) * (x - p.mean);
        p.variance /= static_cast<double>(xs.size());
        return p;
    };

    std::vector<NoveltyPoint> out;
    for (int week = 1; week <= max_week; ++week) {
        for (auto field : kNoveltyFields) {
            std::vector<double> ratios;
            for (const auto& u : users) {
                if (u.records.empty()) continue;
                const auto t = epoch_delimiter(u.records, week);
                if (u.records[u.records.size() - 1].timestamp < t) continue;
                ratios.push_back(novelty_features(u.records, week, field));
            }
            out.push_back(summarize(week, std::string(to_string(field)), ratios));
        }
        std::vector<double> ratios;
        for (const auto& u : users) {
            if (u.records.empty()) continue;
            const auto t = epoch_delimiter(u.records, week);
            std::vector<FeatureVector> before, after;
            for (const auto& w : u.windows) (w.start < t ? before : after).push_back(w.vector);
            if (after.empty()) continue;
            ratios.push_back(novelty_windows(before, after));
        }
        out.push_back(summarize(week, "windows", ratios));
    }
    return out;
}

inline void write_novelty_csv(std::ostream& out, const std::vector<NoveltyPoint>& points) {
    char buf[128];
    out << "t,field,mean,variance,users\n";
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%zu\n", p.week, p.series.c_str(), p.mean, p.variance, p.users);
        out << buf;
    }
}

}  // namespace wtprof
