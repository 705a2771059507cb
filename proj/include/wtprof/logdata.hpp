#pragma once

// Web-transaction records: CSV ingestion, per-user filtering and the
// oldest-first train/test split.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wtprof/error.hpp"

namespace wtprof {

enum class HttpAction : std::uint8_t { Get, Post, Connect, Head };
enum class UriScheme : std::uint8_t { Http, Https };
enum class Reputation : std::uint8_t { Minimal, Medium, High, Unverified };

inline constexpr std::array<std::string_view, 4> kHttpActionNames{"GET", "POST", "CONNECT", "HEAD"};
inline constexpr std::array<std::string_view, 2> kUriSchemeNames{"HTTP", "HTTPS"};
inline constexpr std::array<std::string_view, 4> kReputationNames{"Minimal", "Medium", "High",
                                                                  "Unverified"};

inline std::string_view to_string(HttpAction a) { return kHttpActionNames[static_cast<std::size_t>(a)]; }
inline std::string_view to_string(UriScheme s) { return kUriSchemeNames[static_cast<std::size_t>(s)]; }
inline std::string_view to_string(Reputation r) { return kReputationNames[static_cast<std::size_t>(r)]; }

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from_string(std::string_view text, const std::array<std::string_view, N>& names) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

struct Transaction {
    std::int64_t timestamp = 0;  // epoch seconds, UTC
    std::string user_id;
    std::string host_id;
    HttpAction http_action = HttpAction::Get;
    UriScheme uri_scheme = UriScheme::Http;
    std::string category;
    std::string media_type;  // "super/sub", may be empty
    std::string application_type;
    Reputation reputation = Reputation::Unverified;
    bool is_private_destination = false;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Records sorted ascending by timestamp; ties keep input order.
class TransactionLog {
public:
    TransactionLog() = default;

    explicit TransactionLog(std::vector<Transaction> records) : records_(std::move(records)) {
        std::stable_sort(records_.begin(), records_.end(),
                         [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
    }

    const std::vector<Transaction>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    auto begin() const noexcept { return records_.begin(); }
    auto end() const noexcept { return records_.end(); }
    const Transaction& operator[](std::size_t i) const { return records_[i]; }

    /// Distinct user ids in lexicographic order.
    std::vector<std::string> users() const {
        std::vector<std::string> out;
        for (const auto& r : records_) out.push_back(r.user_id);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Records of one user (still time-ordered).
    TransactionLog for_user(std::string_view user) const {
        std::vector<Transaction> out;
        for (const auto& r : records_)
            if (r.user_id == user) out.push_back(r);
        return TransactionLog(std::move(out));
    }

    TransactionLog for_host(std::string_view host) const {
        std::vector<Transaction> out;
        for (const auto& r : records_)
            if (r.host_id == host) out.push_back(r);
        return TransactionLog(std::move(out));
    }

    friend bool operator==(const TransactionLog&, const TransactionLog&) = default;

private:
    std::vector<Transaction> records_;
};

inline constexpr std::string_view kLogHeader =
    "timestamp,user_id,host_id,http_action,uri_scheme,category,media_type,application_type,reputation,"
    "is_private";

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(',', pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

inline Transaction parse_line(std::string_view line, std::size_t line_no) {
    static constexpr std::array<std::string_view, 10> kColumns{
        "timestamp", "user_id",          "host_id",    "http_action", "uri_scheme",
        "category",  "media_type", "application_type", "reputation",  "is_private"};

    const auto cols = split_commas(line);
    if (cols.size() != kColumns.size()) {
        // Too few: name the first missing column. Too many: blame the trailing one.
        const std::string field = cols.size() < kColumns.size() ? std::string(kColumns[cols.size()]) : "is_private";
        throw ParseError(line_no, field, "expected 10 columns, found " + std::to_string(cols.size()));
    }

    Transaction tx;
    const auto ts = cols[0];
    const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), tx.timestamp);
    if (ts.empty() || ec != std::errc{} || ptr != ts.data() + ts.size() || tx.timestamp < 0)
        throw ParseError(line_no, "timestamp", "not a non-negative integer: '" + std::string(ts) + "'");

    tx.user_id = std::string(cols[1]);
    if (tx.user_id.empty()) throw ParseError(line_no, "user_id", "empty");
    tx.host_id = std::string(cols[2]);
    if (tx.host_id.empty()) throw ParseError(line_no, "host_id", "empty");

    if (auto a = enum_from_string<HttpAction>(cols[3], kHttpActionNames))
        tx.http_action = *a;
    else
        throw ParseError(line_no, "http_action", "unknown value '" + std::string(cols[3]) + "'");

    if (auto s = enum_from_string<UriScheme>(cols[4], kUriSchemeNames))
        tx.uri_scheme = *s;
    else
        throw ParseError(line_no, "uri_scheme", "unknown value '" + std::string(cols[4]) + "'");

    tx.category = std::string(cols[5]);
    tx.media_type = std::string(cols[6]);
    tx.application_type = std::string(cols[7]);

    if (auto r = enum_from_string<Reputation>(cols[8], kReputationNames))
        tx.reputation = *r;
    else
        throw ParseError(line_no, "reputation", "unknown value '" + std::string(cols[8]) + "'");

    if (cols[9] == "0")
        tx.is_private_destination = false;
    else if (cols[9] == "1")
        tx.is_private_destination = true;
    else
        throw ParseError(line_no, "is_private", "expected 0 or 1, found '" + std::string(cols[9]) + "'");
    return tx;
}

}  // namespace detail

/// Parses the 10-column log CSV. A header line is optional and blank lines are
/// ignored. Throws ParseError on the first malformed line.
inline TransactionLog parse_log(std::istream& in) {
    std::vector<Transaction> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == kLogHeader) continue;
        records.push_back(detail::parse_line(line, line_no));
    }
    return TransactionLog(std::move(records));
}

inline TransactionLog parse_log(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_log(in);
}

inline void write_transaction(std::ostream& out, const Transaction& tx) {
    out << tx.timestamp << ',' << tx.user_id << ',' << tx.host_id << ',' << to_string(tx.http_action) << ','
        << to_string(tx.uri_scheme) << ',' << tx.category << ',' << tx.media_type << ',' << tx.application_type
        << ',' << to_string(tx.reputation) << ',' << (tx.is_private_destination ? '1' : '0') << '\n';
}

/// Writes the log with a header line; parse_log reads it back unchanged.
inline void serialize_log(std::ostream& out, const TransactionLog& log) {
    out << kLogHeader << '\n';
    for (const auto& tx : log) write_transaction(out, tx);
}

inline std::string serialize_log(const TransactionLog& log) {
    std::ostringstream out;
    serialize_log(out, log);
    return out.str();
}

/// Keeps the records of users having at least `min_tx` records.
inline TransactionLog filter_users(const TransactionLog& log, std::size_t min_tx) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : log) ++counts[r.user_id];
    std::vector<Transaction> kept;
    kept.reserve(log.size());
    for (const auto& r : log)
        if (counts[r.user_id] >= min_tx) kept.push_back(r);
    return TransactionLog(std::move(kept));
}

/// Number of records a user with `count` records contributes to training.
inline std::size_t train_count(std::size_t count, double train_fraction) {
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(count) + 1e-9));
}

struct LogSplit {
    TransactionLog train;
    TransactionLog test;
};

/// Per user, the floor(fraction * count) oldest records go to `train` and the rest to `test`.
inline LogSplit split_oldest(const TransactionLog& log, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ContractViolation("split fraction must lie in (0,1)");

    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : log) ++counts[r.user_id];

    std::unordered_map<std::string, std::size_t> seen;
    std::vector<Transaction> train;
    std::vector<Transaction> test;
    for (const auto& r : log) {
        auto& n = seen[r.user_id];
        if (n < train_count(counts[r.user_id], train_fraction))
            train.push_back(r);
        else
            test.push_back(r);
        ++n;
    }
    return {TransactionLog(std::move(train)), TransactionLog(std::move(test))};
}

}  // namespace wtprof
