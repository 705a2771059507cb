#pragma once

// Bag-of-words encoding of transactions and sliding-window aggregation.
//
// Column layout (fixed order):
//   [0,4)   http_action   GET POST CONNECT HEAD
//   [4,6)   uri_scheme    HTTP HTTPS
//   6       public_address_flag (1 = private destination)
//   7       reputation risk      Minimal 0, Medium 0.5, High 1
//   8       reputation verified
//   then category, supertype, subtype and application_type values, each
//   block sorted lexicographically.
//
// Columns 6-8 are averaged when a window is aggregated; every other column is
// a presence bit and aggregates by logical OR.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wtprof/error.hpp"
#include "wtprof/logdata.hpp"

namespace wtprof {

using Column = std::uint32_t;

inline constexpr Column kActionOffset = 0;
inline constexpr Column kSchemeOffset = 4;
inline constexpr Column kPublicFlagColumn = 6;
inline constexpr Column kRiskColumn = 7;
inline constexpr Column kVerifiedColumn = 8;
inline constexpr Column kFixedColumns = 9;

inline constexpr bool is_scalar_column(Column c) {
    return c == kPublicFlagColumn || c == kRiskColumn || c == kVerifiedColumn;
}

struct FeatureEntry {
    Column column = 0;
    double value = 0.0;

    friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Fixed-dimension sparse vector with values in [0,1]. Only non-zero entries
/// are stored, sorted by column.
class FeatureVector {
public:
    FeatureVector() = default;

    FeatureVector(std::size_t dim, std::vector<FeatureEntry> entries) : dim_(dim), entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const FeatureEntry& a, const FeatureEntry& b) { return a.column < b.column; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            if (e.column >= dim_) throw ContractViolation("feature column out of range");
            if (!(e.value >= 0.0 && e.value <= 1.0)) throw ContractViolation("feature value outside [0,1]");
            if (i > 0 && entries_[i - 1].column == e.column) throw ContractViolation("duplicate feature column");
        }
        std::erase_if(entries_, [](const FeatureEntry& e) { return e.value == 0.0; });
    }

    static FeatureVector from_dense(std::span<const double> values) {
        std::vector<FeatureEntry> entries;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] != 0.0) entries.push_back({static_cast<Column>(i), values[i]});
        return FeatureVector(values.size(), std::move(entries));
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    const std::vector<FeatureEntry>& entries() const noexcept { return entries_; }

    double operator[](Column c) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                                   [](const FeatureEntry& e, Column col) { return e.column < col; });
        return (it != entries_.end() && it->column == c) ? it->value : 0.0;
    }

    std::vector<double> dense() const {
        std::vector<double> out(dim_, 0.0);
        for (const auto& e : entries_) out[e.column] = e.value;
        return out;
    }

    /// Exact equality, scalar columns compared bit for bit.
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<FeatureEntry> entries_;
};

inline double dot(const FeatureVector& a, const FeatureVector& b) {
    if (a.dim() != b.dim()) throw ContractViolation("dimension mismatch");
    const auto& x = a.entries();
    const auto& y = b.entries();
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].column == y[j].column)
            sum += x[i++].value * y[j++].value;
        else if (x[i].column < y[j].column)
            ++i;
        else
            ++j;
    }
    return sum;
}

inline double squared_norm(const FeatureVector& a) {
    double sum = 0.0;
    for (const auto& e : a.entries()) sum += e.value * e.value;
    return sum;
}

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.dim() != b.dim()) throw ContractViolation("dimension mismatch");
    const auto& x = a.entries();
    const auto& y = b.entries();
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        double d;
        if (j == y.size() || (i < x.size() && x[i].column < y[j].column)) {
            d = x[i++].value;
        } else if (i == x.size() || y[j].column < x[i].column) {
            d = y[j++].value;
        } else {
            d = x[i++].value - y[j++].value;
        }
        sum += d * d;
    }
    return sum;
}

struct FeatureVectorHash {
    std::size_t operator()(const FeatureVector& v) const noexcept {
        std::size_t h = std::hash<std::size_t>{}(v.dim());
        for (const auto& e : v.entries()) {
            h ^= std::hash<Column>{}(e.column) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= std::hash<double>{}(e.value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// ---------------------------------------------------------------------------

/// Splits at the first '/': "video/mp4" -> ("video", "mp4").
inline std::pair<std::string, std::string> split_media_type(std::string_view media) {
    const auto slash = media.find('/');
    if (slash == std::string_view::npos) return {std::string(media), std::string()};
    return {std::string(media.substr(0, slash)), std::string(media.substr(slash + 1))};
}

struct ReputationFeatures {
    double verified = 0.0;
    double risk = 0.0;
};

inline constexpr ReputationFeatures map_reputation(Reputation r) {
    switch (r) {
        case Reputation::Minimal: return {1.0, 0.0};
        case Reputation::Medium: return {1.0, 0.5};
        case Reputation::High: return {1.0, 1.0};
        case Reputation::Unverified: return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

enum class OpenField { Category, Supertype, Subtype, ApplicationType };

inline constexpr std::string_view to_string(OpenField f) {
    switch (f) {
        case OpenField::Category: return "category";
        case OpenField::Supertype: return "supertype";
        case OpenField::Subtype: return "subtype";
        case OpenField::ApplicationType: return "application_type";
    }
    return "";
}

/// Value of an open (vocabulary-backed) field of a transaction.
inline std::string field_value(const Transaction& tx, OpenField f) {
    switch (f) {
        case OpenField::Category: return tx.category;
        case OpenField::Supertype: return split_media_type(tx.media_type).first;
        case OpenField::Subtype: return split_media_type(tx.media_type).second;
        case OpenField::ApplicationType: return tx.application_type;
    }
    return {};
}

inline constexpr std::array<OpenField, 4> kOpenFields{OpenField::Category, OpenField::Supertype, OpenField::Subtype,
                                                      OpenField::ApplicationType};

/// Value -> column maps fixing the feature-space layout.
class Vocabulary {
public:
    Vocabulary() { rebuild_offsets(); }

    /// Builds from per-field value sets; empty strings are ignored.
    explicit Vocabulary(const std::array<std::vector<std::string>, 4>& values) {
        for (std::size_t f = 0; f < 4; ++f) {
            auto v = values[f];
            std::erase(v, std::string());
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            values_[f] = std::move(v);
        }
        rebuild_offsets();
    }

    std::size_t total_dim() const noexcept { return total_dim_; }
    std::size_t size(OpenField f) const noexcept { return values_[index(f)].size(); }
    const std::vector<std::string>& values(OpenField f) const noexcept { return values_[index(f)]; }
    Column offset(OpenField f) const noexcept { return offsets_[index(f)]; }

    std::optional<Column> column(OpenField f, std::string_view value) const {
        if (value.empty()) return std::nullopt;
        const auto& v = values_[index(f)];
        auto it = std::lower_bound(v.begin(), v.end(), value);
        if (it == v.end() || *it != value) return std::nullopt;
        return offsets_[index(f)] + static_cast<Column>(it - v.begin());
    }

    /// Human-readable column label, e.g. "http_action=GET" or "category=Games".
    std::string column_name(Column c) const {
        if (c < kSchemeOffset) return "http_action=" + std::string(kHttpActionNames[c]);
        if (c < kPublicFlagColumn) return "uri_scheme=" + std::string(kUriSchemeNames[c - kSchemeOffset]);
        if (c == kPublicFlagColumn) return "public_address_flag";
        if (c == kRiskColumn) return "reputation";
        if (c == kVerifiedColumn) return "reputation_verified";
        for (auto f : kOpenFields) {
            if (c >= offset(f) && c < offset(f) + size(f))
                return std::string(to_string(f)) + "=" + values(f)[c - offset(f)];
        }
        throw ContractViolation("column out of range");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        for (auto f : kOpenFields) j[std::string(to_string(f))] = values(f);
        j["total_dim"] = total_dim_;
        return j;
    }

    static Vocabulary from_json(const nlohmann::json& j) {
        std::array<std::vector<std::string>, 4> v;
        for (auto f : kOpenFields) v[index(f)] = j.at(std::string(to_string(f))).get<std::vector<std::string>>();
        Vocabulary vocab(v);
        if (j.contains("total_dim") && j.at("total_dim").get<std::size_t>() != vocab.total_dim())
            throw DataError("vocabulary total_dim does not match its value lists");
        return vocab;
    }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.values_ == b.values_; }

private:
    static constexpr std::size_t index(OpenField f) { return static_cast<std::size_t>(f); }

    void rebuild_offsets() {
        Column next = kFixedColumns;
        for (std::size_t f = 0; f < 4; ++f) {
            offsets_[f] = next;
            next += static_cast<Column>(values_[f].size());
        }
        total_dim_ = next;
    }

    std::array<std::vector<std::string>, 4> values_;
    std::array<Column, 4> offsets_{};
    std::size_t total_dim_ = kFixedColumns;
};

/// Every distinct non-empty category/supertype/subtype/application_type in the log.
inline Vocabulary build_vocabulary(const TransactionLog& log) {
    std::array<std::vector<std::string>, 4> values;
    for (const auto& tx : log)
        for (auto f : kOpenFields) values[static_cast<std::size_t>(f)].push_back(field_value(tx, f));
    return Vocabulary(values);
}

/// One transaction as presence bits plus the three scalar columns. Values
/// missing from the vocabulary produce no column.
inline FeatureVector encode_transaction(const Transaction& tx, const Vocabulary& vocab) {
    std::vector<FeatureEntry> e;
    e.reserve(9);
    e.push_back({kActionOffset + static_cast<Column>(tx.http_action), 1.0});
    e.push_back({kSchemeOffset + static_cast<Column>(tx.uri_scheme), 1.0});
    e.push_back({kPublicFlagColumn, tx.is_private_destination ? 1.0 : 0.0});
    const auto rep = map_reputation(tx.reputation);
    e.push_back({kRiskColumn, rep.risk});
    e.push_back({kVerifiedColumn, rep.verified});
    const auto [super, sub] = split_media_type(tx.media_type);
    if (auto c = vocab.column(OpenField::Category, tx.category)) e.push_back({*c, 1.0});
    if (auto c = vocab.column(OpenField::Supertype, super)) e.push_back({*c, 1.0});
    if (auto c = vocab.column(OpenField::Subtype, sub)) e.push_back({*c, 1.0});
    if (auto c = vocab.column(OpenField::ApplicationType, tx.application_type)) e.push_back({*c, 1.0});
    return FeatureVector(vocab.total_dim(), std::move(e));
}

/// OR over presence columns, arithmetic mean over the scalar columns.
inline FeatureVector aggregate(std::span<const FeatureVector> vectors) {
    if (vectors.empty()) throw ContractViolation("aggregate of an empty window");
    const auto dim = vectors.front().dim();
    std::map<Column, double> acc;
    for (const auto& v : vectors) {
        if (v.dim() != dim) throw ContractViolation("dimension mismatch in aggregate");
        for (const auto& e : v.entries()) {
            auto& slot = acc[e.column];
            slot = is_scalar_column(e.column) ? slot + e.value : std::max(slot, e.value);
        }
    }
    const double n = static_cast<double>(vectors.size());
    std::vector<FeatureEntry> out;
    out.reserve(acc.size());
    for (const auto& [c, v] : acc) out.push_back({c, is_scalar_column(c) ? std::min(1.0, v / n) : v});
    return FeatureVector(dim, std::move(out));
}

// ---------------------------------------------------------------------------
// Windowing

enum class KeyMode { PerUser, PerHost };

struct WindowConfig {
    std::int64_t duration = 60;  // D, seconds
    std::int64_t shift = 30;     // S, seconds
    KeyMode key_mode = KeyMode::PerUser;

    void validate() const {
        if (shift <= 0 || duration <= 0) throw ConfigError("window duration and shift must be positive");
        if (shift > duration) throw ConfigError("window shift must not exceed its duration");
    }
};

struct Window {
    std::string key;
    std::int64_t start = 0;
    FeatureVector vector;
    std::size_t tx_count = 0;
};

/// A non-empty window: the log indices of the key's records inside it.
struct WindowSpan {
    std::string key;
    std::int64_t start = 0;
    std::vector<std::size_t> records;  // indices into the log, time-ordered
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace detail

/// Enumerates the non-empty windows of every key. Keys come out in
/// lexicographic order and each key's windows in ascending start order. A key's
/// windows start at t0 + k*S, t0 being its first timestamp, and cover
/// [start, start + D).
inline std::vector<WindowSpan> window_spans(const TransactionLog& log, const WindowConfig& cfg) {
    cfg.validate();
    std::map<std::string, std::vector<std::size_t>> by_key;
    for (std::size_t i = 0; i < log.size(); ++i)
        by_key[cfg.key_mode == KeyMode::PerUser ? log[i].user_id : log[i].host_id].push_back(i);

    std::vector<WindowSpan> out;
    for (const auto& [key, idx] : by_key) {
        const auto ts = [&](std::size_t k) { return log[idx[k]].timestamp; };
        const std::int64_t t0 = ts(0);
        std::size_t lo = 0;  // first record with ts >= start
        std::size_t hi = 0;  // first record with ts >= start + D
        std::int64_t k = 0;
        while (lo < idx.size()) {
            const std::int64_t start = t0 + k * cfg.shift;
            while (lo < idx.size() && ts(lo) < start) ++lo;
            if (lo == idx.size()) break;
            if (hi < lo) hi = lo;
            while (hi < idx.size() && ts(hi) < start + cfg.duration) ++hi;
            if (hi == lo) {
                // Jump to the first window that contains record `lo`.
                k = std::max(k + 1, detail::floor_div(ts(lo) - t0 - cfg.duration, cfg.shift) + 1);
                continue;
            }
            WindowSpan span{key, start, {}};
            span.records.assign(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                idx.begin() + static_cast<std::ptrdiff_t>(hi));
            out.push_back(std::move(span));
            ++k;
        }
    }
    return out;
}

/// Aggregated feature vector of every non-empty window.
inline std::vector<Window> window_stream(const TransactionLog& log, const WindowConfig& cfg, const Vocabulary& vocab) {
    const auto spans = window_spans(log, cfg);
    std::vector<FeatureVector> encoded;
    encoded.reserve(log.size());
    for (const auto& tx : log) encoded.push_back(encode_transaction(tx, vocab));

    std::vector<Window> out;
    out.reserve(spans.size());
    std::vector<FeatureVector> members;
    for (const auto& s : spans) {
        members.clear();
        for (auto i : s.records) members.push_back(encoded[i]);
        out.push_back({s.key, s.start, aggregate(members), s.records.size()});
    }
    return out;
}

/// Windows of one key, split out of a window_stream result.
inline std::map<std::string, std::vector<Window>> group_by_key(std::vector<Window> windows) {
    std::map<std::string, std::vector<Window>> out;
    for (auto& w : windows) out[w.key].push_back(std::move(w));
    return out;
}

inline std::vector<FeatureVector> vectors_of(const std::vector<Window>& windows) {
    std::vector<FeatureVector> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(w.vector);
    return out;
}

/// Debug dump: `key,start,tx_count,col:value,...` per window.
inline void write_window_dump(std::ostream& out, const std::vector<Window>& windows) {
    char buf[64];
    for (const auto& w : windows) {
        out << w.key << ',' << w.start << ',' << w.tx_count;
        for (const auto& e : w.vector.entries()) {
            std::snprintf(buf, sizeof buf, "%.17g", e.value);
            out << ',' << e.column << ':' << buf;
        }
        out << '\n';
    }
}

}  // namespace wtprof
