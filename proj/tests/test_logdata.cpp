#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "wtprof/logdata.hpp"
#include "wtprof/synth.hpp"

using namespace wtprof;

namespace {

Transaction tx(std::int64_t ts, std::string user, std::string host = "h") {
    Transaction t;
    t.timestamp = ts;
    t.user_id = std::move(user);
    t.host_id = std::move(host);
    t.category = "News";
    t.media_type = "text/html";
    return t;
}

}  // namespace

TEST(ParseLog, ExampleRecord) {
    const auto log = parse_log("1432875904,user_9,host_3,GET,HTTP,Games,text/html,,Minimal,0\n");
    ASSERT_EQ(log.size(), 1u);
    const auto& r = log[0];
    EXPECT_EQ(r.timestamp, 1432875904);
    EXPECT_EQ(r.user_id, "user_9");
    EXPECT_EQ(r.host_id, "host_3");
    EXPECT_EQ(r.http_action, HttpAction::Get);
    EXPECT_EQ(r.uri_scheme, UriScheme::Http);
    EXPECT_EQ(r.category, "Games");
    EXPECT_EQ(r.media_type, "text/html");
    EXPECT_EQ(r.application_type, "");
    EXPECT_EQ(r.reputation, Reputation::Minimal);
    EXPECT_FALSE(r.is_private_destination);
}

TEST(ParseLog, EmptyInputIsEmptyLog) {
    EXPECT_TRUE(parse_log("").empty());
    EXPECT_TRUE(parse_log(std::string(kLogHeader) + "\n").empty());
}

TEST(ParseLog, UnknownActionNamesField) {
    try {
        parse_log("1,u,h,GET,HTTP,,,,Minimal,0\n2,u,h,PATCH,HTTP,,,,Minimal,0\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.field(), "http_action");
    }
}

TEST(ParseLog, RejectsBadColumns) {
    auto field_of = [](const std::string& text) {
        try {
            parse_log(text);
        } catch (const ParseError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of("1,u,h,GET,FTP,,,,Minimal,0"), "uri_scheme");
    EXPECT_EQ(field_of("1,u,h,GET,HTTP,,,,Low,0"), "reputation");
    EXPECT_EQ(field_of("1,u,h,GET,HTTP,,,,Minimal,2"), "is_private");
    EXPECT_EQ(field_of("-5,u,h,GET,HTTP,,,,Minimal,0"), "timestamp");
    EXPECT_EQ(field_of("12a,u,h,GET,HTTP,,,,Minimal,0"), "timestamp");
    EXPECT_EQ(field_of("1,,h,GET,HTTP,,,,Minimal,0"), "user_id");
    EXPECT_EQ(field_of("1,u,,GET,HTTP,,,,Minimal,0"), "host_id");
    EXPECT_EQ(field_of("1,u,h,GET,HTTP,a,b,c,Minimal,0,extra"), "is_private");
    EXPECT_EQ(field_of("1,u,h,GET,HTTP,a,b,c,Minimal"), "is_private");
    EXPECT_EQ(field_of("1,u,h,GET"), "uri_scheme");
}

TEST(ParseLog, SortsStablyByTimestamp) {
    const auto log = parse_log(
        "5,a,h,GET,HTTP,,,,Minimal,0\n"
        "3,b,h,GET,HTTP,,,,Minimal,0\n"
        "5,c,h,GET,HTTP,,,,Minimal,0\n"
        "\r\n"
        "3,d,h,POST,HTTPS,,,,High,1\r\n");
    ASSERT_EQ(log.size(), 4u);
    EXPECT_EQ(log[0].user_id, "b");
    EXPECT_EQ(log[1].user_id, "d");
    EXPECT_EQ(log[2].user_id, "a");
    EXPECT_EQ(log[3].user_id, "c");
    EXPECT_TRUE(log[1].is_private_destination);
}

TEST(ParseLog, RoundTripsSyntheticLogs) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SynthConfig cfg;
        cfg.weeks = 0.02;
        cfg.n_hosts = 3;
        cfg.rng_seed = seed;
        ProfileOptions po;
        po.n_users = 3;
        po.seed = seed;
        cfg.users = make_profiles(po);
        const auto log = generate_synthetic(cfg);
        ASSERT_FALSE(log.empty());
        EXPECT_EQ(parse_log(serialize_log(log)), log);
    }
}

TEST(FilterUsers, ThresholdIdentityAndVacuous) {
    std::vector<Transaction> recs;
    for (int i = 0; i < 2000; ++i) recs.push_back(tx(i, "A"));
    for (int i = 0; i < 100; ++i) recs.push_back(tx(i * 3, "B"));
    const TransactionLog log(recs);

    const auto only_a = filter_users(log, 1500);
    EXPECT_EQ(only_a.size(), 2000u);
    EXPECT_EQ(only_a.users(), std::vector<std::string>{"A"});

    EXPECT_EQ(filter_users(log, 0), log);
    EXPECT_TRUE(filter_users(log, 5000).empty());
    EXPECT_EQ(filter_users(only_a, 1500), only_a);  // idempotent
}

TEST(SplitOldest, ExactArithmetic) {
    const TransactionLog four({tx(1, "u"), tx(2, "u"), tx(3, "u"), tx(4, "u")});
    auto s = split_oldest(four, 0.75);
    ASSERT_EQ(s.train.size(), 3u);
    ASSERT_EQ(s.test.size(), 1u);
    EXPECT_EQ(s.test[0].timestamp, 4);

    const TransactionLog one({tx(7, "u")});
    s = split_oldest(one, 0.75);
    EXPECT_EQ(s.train.size(), 0u);
    EXPECT_EQ(s.test.size(), 1u);

    EXPECT_THROW(split_oldest(one, 1.0), ContractViolation);
    EXPECT_THROW(split_oldest(one, 0.0), ContractViolation);
}

TEST(SplitOldest, InterleavedUsersMatchBruteForcePartition) {
    Rng rng(9);
    std::vector<Transaction> recs;
    for (int i = 0; i < 300; ++i)
        recs.push_back(tx(static_cast<std::int64_t>(rng.below(1000)), "u" + std::to_string(rng.below(4))));
    const TransactionLog log(recs);
    const auto split = split_oldest(log, 0.75);

    // Brute force: per user, sort by (timestamp, original order) and cut.
    for (const auto& user : log.users()) {
        std::vector<Transaction> mine;
        for (const auto& r : log) if (r.user_id == user) mine.push_back(r);
        const std::size_t cut = static_cast<std::size_t>(std::floor(0.75 * static_cast<double>(mine.size())));
        const std::vector<Transaction> want_train(mine.begin(), mine.begin() + static_cast<long>(cut));
        const std::vector<Transaction> want_test(mine.begin() + static_cast<long>(cut), mine.end());
        EXPECT_EQ(split.train.for_user(user).records(), want_train);
        EXPECT_EQ(split.test.for_user(user).records(), want_test);
        if (!want_train.empty() && !want_test.empty()) {
            EXPECT_LE(want_train.back().timestamp, want_test.front().timestamp);
        }
    }
    EXPECT_EQ(split.train.size() + split.test.size(), log.size());
    EXPECT_TRUE(std::is_sorted(split.train.begin(), split.train.end(),
                               [](auto& a, auto& b) { return a.timestamp < b.timestamp; }));
    EXPECT_TRUE(std::is_sorted(split.test.begin(), split.test.end(),
                               [](auto& a, auto& b) { return a.timestamp < b.timestamp; }));
}
