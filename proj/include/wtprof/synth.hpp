#pragma once

// Seeded generator of synthetic web-transaction logs. Every user draws field
// values from private categorical distributions and emits transactions as a
// Poisson process inside alternating active/idle periods. Hosts are handed out
// per time slot so a device serves several users over time, one at a time
// whenever there are at least as many hosts as users.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wtprof/error.hpp"
#include "wtprof/logdata.hpp"

namespace wtprof {

/// Portable random source: mt19937_64 has a standardized output sequence, and
/// the helpers below avoid the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    /// Index drawn proportionally to `weights` (non-negative, positive sum).
    template <typename Range>
    std::size_t categorical(const Range& weights, double total) {
        double u = uniform() * total;
        std::size_t i = 0;
        std::size_t last_positive = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last_positive = i;
                if (u < w) return i;
                u -= w;
            }
            ++i;
        }
        return last_positive;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Weighted value list. No entries means the field is always left empty.
struct ValueDistribution {
    std::vector<std::pair<std::string, double>> entries;

    double total() const {
        double t = 0.0;
        for (const auto& e : entries) t += e.second;
        return t;
    }
};

struct UserProfile {
    std::string user_id;
    double rate_per_min = 1.0;         // Poisson rate while active
    double active_fraction = 1.0;      // long-run share of time spent active
    double session_minutes = 30.0;     // mean length of an active period
    std::array<double, 4> action_weights{0.8, 0.1, 0.08, 0.02};
    std::array<double, 2> scheme_weights{0.4, 0.6};
    std::array<double, 4> reputation_weights{0.85, 0.08, 0.02, 0.05};
    double private_prob = 0.05;
    ValueDistribution category;
    ValueDistribution media_type;
    ValueDistribution application_type;
};

struct SynthConfig {
    std::size_t n_hosts = 1;
    double weeks = 1.0;
    std::int64_t start_time = 1432857600;  // 2015-05-29 00:00:00 UTC
    std::int64_t host_slot_seconds = 3600;
    std::uint64_t rng_seed = 42;
    std::vector<UserProfile> users;

    std::size_t n_users() const { return users.size(); }
    std::int64_t end_time() const {
        return start_time + static_cast<std::int64_t>(std::llround(weeks * 7.0 * 86400.0));
    }
};

namespace detail {

template <typename Range>
void check_weights(const Range& weights, const std::string& what) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError(what + ": weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigError(what + ": weights sum to zero");
}

inline void check_distribution(const ValueDistribution& d, const std::string& what) {
    if (d.entries.empty()) return;
    std::vector<double> w;
    for (const auto& e : d.entries) {
        if (e.first.find(',') != std::string::npos || e.first.find('\n') != std::string::npos)
            throw ConfigError(what + ": value '" + e.first + "' contains a separator");
        w.push_back(e.second);
    }
    check_weights(w, what);
}

inline const std::string& draw_value(Rng& rng, const ValueDistribution& d, double total) {
    static const std::string kEmpty;
    if (d.entries.empty()) return kEmpty;
    double u = rng.uniform() * total;
    for (const auto& e : d.entries) {
        if (e.second > 0.0) {
            if (u < e.second) return e.first;
            u -= e.second;
        }
    }
    for (auto it = d.entries.rbegin(); it != d.entries.rend(); ++it)
        if (it->second > 0.0) return it->first;
    return kEmpty;
}

/// Draws the record fields (all but timestamp/user/host) from a profile.
class RecordSampler {
public:
    explicit RecordSampler(const UserProfile& p)
        : p_(p),
          action_total_(std::accumulate(p.action_weights.begin(), p.action_weights.end(), 0.0)),
          scheme_total_(std::accumulate(p.scheme_weights.begin(), p.scheme_weights.end(), 0.0)),
          reputation_total_(std::accumulate(p.reputation_weights.begin(), p.reputation_weights.end(), 0.0)),
          category_total_(p.category.total()),
          media_total_(p.media_type.total()),
          app_total_(p.application_type.total()) {}

    void fill(Rng& rng, Transaction& tx) const {
        tx.http_action = static_cast<HttpAction>(rng.categorical(p_.action_weights, action_total_));
        tx.uri_scheme = static_cast<UriScheme>(rng.categorical(p_.scheme_weights, scheme_total_));
        tx.category = draw_value(rng, p_.category, category_total_);
        tx.media_type = draw_value(rng, p_.media_type, media_total_);
        tx.application_type = draw_value(rng, p_.application_type, app_total_);
        tx.reputation = static_cast<Reputation>(rng.categorical(p_.reputation_weights, reputation_total_));
        tx.is_private_destination = rng.uniform() < p_.private_prob;
    }

private:
    const UserProfile& p_;
    double action_total_, scheme_total_, reputation_total_, category_total_, media_total_, app_total_;
};

/// Emits arrival times in [begin, end) for one user: Poisson arrivals inside
/// exponentially distributed active periods separated by idle gaps.
template <typename Emit>
void arrivals(Rng& rng, const UserProfile& p, double begin, double end, Emit&& emit) {
    const double rate = p.rate_per_min / 60.0;
    const bool always_on = p.active_fraction >= 1.0;
    const double on_mean = p.session_minutes * 60.0;
    const double off_mean = always_on ? 0.0 : on_mean * (1.0 - p.active_fraction) / p.active_fraction;

    double t = begin;
    if (!always_on) t += rng.exponential(1.0 / off_mean) * rng.uniform();
    while (t < end) {
        const double period_end = always_on ? end : std::min(end, t + rng.exponential(1.0 / on_mean));
        double a = t + rng.exponential(rate);
        while (a < period_end) {
            emit(a);
            a += rng.exponential(rate);
        }
        t = period_end;
        if (!always_on) t += rng.exponential(1.0 / off_mean);
    }
}

}  // namespace detail

inline void validate(const SynthConfig& cfg) {
    if (cfg.users.empty()) throw ConfigError("synthetic config needs at least one user");
    if (cfg.n_hosts == 0) throw ConfigError("synthetic config needs at least one host");
    if (!(cfg.weeks > 0.0)) throw ConfigError("weeks must be positive");
    if (cfg.host_slot_seconds <= 0) throw ConfigError("host slot length must be positive");
    for (const auto& u : cfg.users) {
        const std::string who = "user '" + u.user_id + "'";
        if (u.user_id.empty() || u.user_id.find(',') != std::string::npos)
            throw ConfigError("user ids must be non-empty and comma-free");
        if (!(u.rate_per_min > 0.0)) throw ConfigError(who + ": rate must be positive");
        if (!(u.active_fraction > 0.0 && u.active_fraction <= 1.0))
            throw ConfigError(who + ": active fraction must lie in (0,1]");
        if (!(u.session_minutes > 0.0)) throw ConfigError(who + ": session length must be positive");
        if (!(u.private_prob >= 0.0 && u.private_prob <= 1.0))
            throw ConfigError(who + ": private probability must lie in [0,1]");
        detail::check_weights(u.action_weights, who + " http_action");
        detail::check_weights(u.scheme_weights, who + " uri_scheme");
        detail::check_weights(u.reputation_weights, who + " reputation");
        detail::check_distribution(u.category, who + " category");
        detail::check_distribution(u.media_type, who + " media_type");
        detail::check_distribution(u.application_type, who + " application_type");
    }
}

inline std::string host_name(std::size_t index) { return "host_" + std::to_string(index + 1); }

/// Host index used by `user` during host slot `slot`.
inline std::size_t assigned_host(const SynthConfig& cfg, std::int64_t slot, std::size_t user) {
    Rng rng(mix_seed(cfg.rng_seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(slot)));
    std::vector<std::size_t> hosts(cfg.n_hosts);
    std::iota(hosts.begin(), hosts.end(), std::size_t{0});
    rng.shuffle(hosts);
    return hosts[user % cfg.n_hosts];
}

/// Deterministic under a fixed config: same seed, byte-identical serialized output.
inline TransactionLog generate_synthetic(const SynthConfig& cfg) {
    validate(cfg);
    const double begin = static_cast<double>(cfg.start_time);
    const double end = static_cast<double>(cfg.end_time());

    std::vector<Transaction> records;
    auto host_for = [&](std::int64_t ts, std::size_t user) {
        const auto slot = (ts - cfg.start_time) / cfg.host_slot_seconds;
        return assigned_host(cfg, slot, user);
    };

    for (std::size_t u = 0; u < cfg.users.size(); ++u) {
        const auto& profile = cfg.users[u];
        Rng rng(mix_seed(cfg.rng_seed, u));
        detail::RecordSampler sampler(profile);
        std::int64_t cached_slot = -1;
        std::string cached_host;
        detail::arrivals(rng, profile, begin, end, [&](double t) {
            Transaction tx;
            tx.timestamp = static_cast<std::int64_t>(std::floor(t));
            tx.user_id = profile.user_id;
            const auto slot = (tx.timestamp - cfg.start_time) / cfg.host_slot_seconds;
            if (slot != cached_slot) {
                cached_slot = slot;
                cached_host = host_name(host_for(tx.timestamp, u));
            }
            tx.host_id = cached_host;
            sampler.fill(rng, tx);
            records.push_back(std::move(tx));
        });
    }
    return TransactionLog(std::move(records));
}

/// One user's turn on a device during a scripted host session.
struct SessionSegment {
    std::size_t user_index = 0;
    std::int64_t start = 0;
    std::int64_t duration = 0;  // seconds
};

/// Generates the traffic of a single device used by the given users in turn.
/// Within a segment the user is continuously active at their profile rate.
inline TransactionLog generate_host_session(const SynthConfig& cfg, const std::string& host_id,
                                            const std::vector<SessionSegment>& segments, std::uint64_t seed) {
    validate(cfg);
    std::vector<Transaction> records;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.user_index >= cfg.users.size()) throw ConfigError("session segment names an unknown user");
        auto profile = cfg.users[seg.user_index];
        profile.active_fraction = 1.0;
        Rng rng(mix_seed(seed, s));
        detail::RecordSampler sampler(profile);
        detail::arrivals(rng, profile, static_cast<double>(seg.start), static_cast<double>(seg.start + seg.duration),
                         [&](double t) {
                             Transaction tx;
                             tx.timestamp = static_cast<std::int64_t>(std::floor(t));
                             tx.user_id = profile.user_id;
                             tx.host_id = host_id;
                             sampler.fill(rng, tx);
                             records.push_back(std::move(tx));
                         });
    }
    return TransactionLog(std::move(records));
}

// ---------------------------------------------------------------------------
// Profile construction

struct ProfileOptions {
    std::size_t n_users = 5;
    std::size_t categories_per_user = 8;
    std::size_t media_types_per_user = 6;
    std::size_t applications_per_user = 8;
    double overlap = 0.3;       // share of each user's values taken from a common pool
    double rate_per_min = 1.0;  // mean rate; individual users vary by +-50%
    double active_fraction = 1.0;
    double session_minutes = 30.0;
    double zipf_exponent = 1.0;
    std::uint64_t seed = 42;
};

namespace detail {

inline std::vector<std::string> value_pool(const std::vector<std::string>& named, const std::string& prefix,
                                           std::size_t min_size) {
    std::vector<std::string> pool = named;
    for (std::size_t i = pool.size(); i < min_size; ++i) pool.push_back(prefix + std::to_string(i + 1));
    return pool;
}

inline const std::vector<std::string>& category_names() {
    static const std::vector<std::string> v{
        "Search Engines", "Games",        "Messaging",        "News",          "Shopping",
        "Social Networking", "Streaming Media", "Business",   "Education",     "Finance",
        "Travel",         "Sports",       "Entertainment",    "Health",        "Restaurants",
        "Technical Information", "Blogs", "Government",       "Job Search",    "Real Estate",
        "Auctions",       "Web Mail",     "Online Storage",   "Software Downloads", "Gambling",
        "Forum",          "Fashion",      "Motor Vehicles",   "Pets",          "Photo Search",
        "Reference",      "Religion",     "Parked Domain",    "Internet Services", "Marketing",
        "Media Sharing",  "Personal Pages", "Recreation",     "Humor",         "Art"};
    return v;
}

inline const std::vector<std::string>& media_names() {
    static const std::vector<std::string> v{
        "text/html",        "text/plain",        "text/css",           "text/javascript", "image/png",
        "image/jpeg",       "image/gif",         "image/webp",         "image/svg+xml",   "video/mp4",
        "video/webm",       "audio/wav",         "audio/mpeg",         "audio/ogg",       "application/json",
        "application/xml",  "application/pdf",   "application/zip",    "application/javascript",
        "application/octet-stream", "application/x-shockwave-flash", "application/vnd.ms-excel",
        "application/msword", "font/woff2",      "font/ttf",           "multipart/form-data",
        "image/x-icon",     "video/x-flv",       "audio/aac",          "text/csv"};
    return v;
}

inline const std::vector<std::string>& application_names() {
    static const std::vector<std::string> v{
        "Rhapsody",   "CloudFlare", "Speedyshare", "Facebook",  "YouTube",  "Gmail",     "Dropbox",
        "Skype",      "Spotify",    "Netflix",     "Twitter",   "LinkedIn", "Office365", "Slack",
        "GitHub",     "Wikipedia",  "Amazon",      "eBay",      "Reddit",   "Instagram", "WhatsApp",
        "Telegram",   "Zoom",       "Salesforce",  "Box",       "Evernote", "Pinterest", "Tumblr",
        "Vimeo",      "SoundCloud", "Steam",       "Twitch",    "Akamai",   "Fastly",    "OneDrive",
        "Yahoo Mail", "Bing",       "Outlook",     "Flickr",    "WeTransfer"};
    return v;
}

/// `count` values for one user: the common share from the front of the pool,
/// the rest drawn without replacement from the remaining values while possible.
inline ValueDistribution pick_values(Rng& rng, const std::vector<std::string>& pool, std::size_t count,
                                     std::size_t common, std::vector<std::size_t>& unused, double zipf) {
    std::vector<std::string> chosen;
    for (std::size_t i = 0; i < common && i < pool.size(); ++i) chosen.push_back(pool[i]);
    while (chosen.size() < count) {
        std::size_t idx;
        if (!unused.empty()) {
            const auto k = rng.below(unused.size());
            idx = unused[k];
            unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
            idx = common + rng.below(pool.size() - common);
        }
        if (std::find(chosen.begin(), chosen.end(), pool[idx]) == chosen.end()) chosen.push_back(pool[idx]);
    }
    rng.shuffle(chosen);
    ValueDistribution d;
    for (std::size_t r = 0; r < chosen.size(); ++r)
        d.entries.emplace_back(chosen[r], 1.0 / std::pow(static_cast<double>(r + 1), zipf));
    return d;
}

}  // namespace detail

/// Builds `n_users` profiles whose value supports overlap by roughly `overlap`.
inline std::vector<UserProfile> make_profiles(const ProfileOptions& opt) {
    if (opt.n_users == 0) throw ConfigError("need at least one user");
    if (!(opt.overlap >= 0.0 && opt.overlap <= 1.0)) throw ConfigError("overlap must lie in [0,1]");

    Rng rng(mix_seed(opt.seed, 0xC0FFEE));
    const auto common = [&](std::size_t k) {
        return static_cast<std::size_t>(std::llround(opt.overlap * static_cast<double>(k)));
    };
    const auto pool_size = [&](std::size_t k) { return common(k) + opt.n_users * (k - common(k)); };

    const auto categories = detail::value_pool(detail::category_names(), "Category ", pool_size(opt.categories_per_user));
    auto media = detail::media_names();
    for (std::size_t i = media.size(); i < pool_size(opt.media_types_per_user); ++i)
        media.push_back("application/x-custom-" + std::to_string(i + 1));
    const auto apps = detail::value_pool(detail::application_names(), "App ", pool_size(opt.applications_per_user));

    auto unused_of = [](std::size_t from, std::size_t to) {
        std::vector<std::size_t> v;
        for (std::size_t i = from; i < to; ++i) v.push_back(i);
        return v;
    };
    auto unused_cat = unused_of(common(opt.categories_per_user), categories.size());
    auto unused_media = unused_of(common(opt.media_types_per_user), media.size());
    auto unused_app = unused_of(common(opt.applications_per_user), apps.size());

    std::vector<UserProfile> out;
    for (std::size_t u = 0; u < opt.n_users; ++u) {
        UserProfile p;
        p.user_id = "user_" + std::to_string(u + 1);
        p.rate_per_min = opt.rate_per_min * (0.5 + rng.uniform());
        p.active_fraction = opt.active_fraction;
        p.session_minutes = opt.session_minutes;
        const double get = 0.6 + 0.3 * rng.uniform();
        const double post = (1.0 - get) * (0.3 + 0.5 * rng.uniform());
        const double connect = (1.0 - get - post) * (0.5 + 0.5 * rng.uniform());
        p.action_weights = {get, post, connect, std::max(0.0, 1.0 - get - post - connect)};
        const double https = 0.2 + 0.7 * rng.uniform();
        p.scheme_weights = {1.0 - https, https};
        const double minimal = 0.75 + 0.2 * rng.uniform();
        const double unverified = (1.0 - minimal) * rng.uniform();
        p.reputation_weights = {minimal, (1.0 - minimal - unverified) * 0.8, (1.0 - minimal - unverified) * 0.2,
                                unverified};
        p.private_prob = 0.15 * rng.uniform();
        p.category = detail::pick_values(rng, categories, opt.categories_per_user, common(opt.categories_per_user),
                                         unused_cat, opt.zipf_exponent);
        p.media_type = detail::pick_values(rng, media, opt.media_types_per_user, common(opt.media_types_per_user),
                                           unused_media, opt.zipf_exponent);
        p.application_type = detail::pick_values(rng, apps, opt.applications_per_user,
                                                 common(opt.applications_per_user), unused_app, opt.zipf_exponent);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace wtprof
