#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wtprof/wtprof.hpp"

namespace fs = std::filesystem;
using namespace wtprof;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::size_t line_count(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Scratch directory per test, removed afterwards.
class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("wtprof_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        if (!HasFailure()) fs::remove_all(dir_);
    }

    int run(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" WTPROF_CLI_PATH "' " + args + " >>cli.log 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path path(const std::string& rel) const { return dir_ / rel; }

    /// Three users, about a quarter week, low enough min-tx for all of them.
    void small_log(const std::string& name = "log.csv", const std::string& extra = "") {
        ASSERT_EQ(run("synth --log " + name + " --users 3 --weeks 0.25 --rate 3 --active-fraction 0.2 " + extra), 0);
    }

    static std::string common(int cap = 300) {
        return "--log log.csv --min-tx 200 --max-train-windows " + std::to_string(cap) + " ";
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthIsDeterministic) {
    small_log("a.csv");
    small_log("b.csv");
    small_log("c.csv", "--seed 43");
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
    const auto log = parse_log(slurp(path("a.csv")));
    EXPECT_EQ(log.users().size(), 3u);
}

TEST_F(Cli, SynthManyUsers) {
    ASSERT_EQ(run("synth --log log.csv --users 25 --weeks 0.05 --rate 2 --active-fraction 1"), 0);
    EXPECT_EQ(parse_log(slurp(path("log.csv"))).users().size(), 25u);
}

TEST_F(Cli, SynthLongSpan) {
    ASSERT_EQ(run("synth --log log.csv --users 1 --weeks 26 --rate 0.002 --active-fraction 1"), 0);
    const auto log = parse_log(slurp(path("log.csv")));
    ASSERT_GT(log.size(), 100u);
    const auto span = log[log.size() - 1].timestamp - log[0].timestamp;
    EXPECT_GT(span, 25 * kSecondsPerWeek);
    EXPECT_LE(span, 26 * kSecondsPerWeek);
}

TEST_F(Cli, TrainSingleUser) {
    ASSERT_EQ(run("synth --log log.csv --users 1 --weeks 0.2 --rate 3 --active-fraction 0.3"), 0);
    ASSERT_EQ(run("train " + common() + "--out out"), 0);
    EXPECT_TRUE(fs::exists(path("out/models/user_1.json")));
    ASSERT_EQ(run("evaluate " + common() + "--out out"), 0);
    const auto j = json_file(path("out/evaluation.json"));
    EXPECT_FALSE(j.at("acc_other_defined").get<bool>());
    EXPECT_EQ(j.at("acc_other").get<double>(), 0.0);
}

TEST_F(Cli, TrainListsFilteredUsers) {
    small_log();
    const auto log = parse_log(slurp(path("log.csv")));
    std::vector<std::pair<std::size_t, std::string>> counts;
    for (const auto& u : log.users()) counts.emplace_back(log.for_user(u).size(), u);
    std::sort(counts.begin(), counts.end());
    const auto threshold = counts[1].first;  // keeps the two busiest users
    ASSERT_EQ(run("train --log log.csv --out out --max-train-windows 300 --min-tx " + std::to_string(threshold)), 0);
    const auto s = json_file(path("out/train_summary.json"));
    EXPECT_EQ(s.at("filtered_out"), nlohmann::json::array({counts[0].second}));
    EXPECT_EQ(s.at("users").size(), 2u);
    EXPECT_FALSE(s.at("users").contains(counts[0].second));
}

TEST_F(Cli, SummaryMatchesModelFiles) {
    small_log();
    ASSERT_EQ(run("train " + common() + "--out out --algo svdd --cost 0.05 --kernel rbf:4"), 0);
    const auto s = json_file(path("out/train_summary.json"));
    EXPECT_EQ(s.at("algo"), "svdd");
    const auto vocab = Vocabulary::from_json(json_file(path("out/vocab.json")));
    EXPECT_EQ(s.at("dim").get<std::size_t>(), vocab.total_dim());
    for (const auto& [user, u] : s.at("users").items()) {
        EXPECT_EQ(u.at("kernel"), "rbf:4");
        EXPECT_LE(u.at("windows").get<std::size_t>(), 300u);
        const auto m = load_model(path("out/" + u.at("model_file").get<std::string>()).string());
        EXPECT_EQ(m.algorithm(), Algorithm::Svdd);
        EXPECT_EQ(m.support_count(), u.at("support_vectors").get<std::size_t>());
        EXPECT_EQ(m.dim(), vocab.total_dim());
    }
}

TEST_F(Cli, GridSearchOutputs) {
    small_log();
    ASSERT_EQ(run("gridsearch " + common(120) + "--out g --param-grid 0.5,0.2,0.05"), 0);
    EXPECT_EQ(line_count(path("g/gridsearch_windows.csv")), 7u);  // header + 6 grid points
    EXPECT_EQ(line_count(path("g/gridsearch_models.csv")), 1u + 3u * 4u * 3u);
    const auto best = json_file(path("g/best_params.json"));
    EXPECT_EQ(best.at("users").size(), 3u);

    std::ifstream in(path("g/gridsearch_windows.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "rank,duration,shift,acc_self,acc_other,acc");
    std::getline(in, line);
    const auto top = line.substr(line.find(',') + 1);
    EXPECT_EQ(top.substr(0, top.find(',', top.find(',') + 1)),
              std::to_string(best.at("duration").get<int>()) + "," + std::to_string(best.at("shift").get<int>()));

    // training from the chosen parameters adopts them
    ASSERT_EQ(run("train " + common() + "--out g --params g/best_params.json"), 0);
    const auto s = json_file(path("g/train_summary.json"));
    EXPECT_EQ(s.at("duration"), best.at("duration"));
    for (const auto& [user, u] : best.at("users").items()) {
        EXPECT_EQ(s.at("users").at(user).at("kernel"), u.at("kernel"));
        EXPECT_EQ(s.at("users").at(user).at("param"), u.at("param"));
    }
}

TEST_F(Cli, TrainSplitEvaluationMatchesWindowGrid) {
    small_log();
    ASSERT_EQ(run("gridsearch " + common() + "--out g --window-grid 120:60 --kernel-grid rbf --param-grid 0.1"), 0);
    ASSERT_EQ(run("train " + common() + "--out t --duration 120 --shift 60"), 0);
    ASSERT_EQ(run("evaluate " + common() + "--out t --eval-on train"), 0);
    std::ifstream in(path("g/gridsearch_windows.csv"));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const auto j = json_file(path("t/evaluation.json"));
    char expected[64];
    std::snprintf(expected, sizeof expected, "1,120,60,%.4f,%.4f,", j.at("acc_self").get<double>(),
                  j.at("acc_other").get<double>());
    EXPECT_EQ(line.rfind(expected, 0), 0u) << line;
}

TEST_F(Cli, EvaluateWritesConfusion) {
    small_log();
    ASSERT_EQ(run("train " + common() + "--out out"), 0);
    ASSERT_EQ(run("evaluate " + common() + "--out out"), 0);
    EXPECT_EQ(line_count(path("out/confusion.csv")), 4u);
    const auto j = json_file(path("out/evaluation.json"));
    EXPECT_EQ(j.at("evaluated_on"), "test");
    EXPECT_NEAR(j.at("acc").get<double>(), j.at("acc_self").get<double>() - j.at("acc_other").get<double>(), 1e-9);
}

TEST_F(Cli, IdentifyTimeline) {
    small_log();
    ASSERT_EQ(run("train " + common() + "--out out"), 0);
    ASSERT_EQ(run("identify " + common() + "--out out --host host_1 --k 5"), 0);
    std::ifstream in(path("out/timeline_host_1.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "window_start,true_user,estimated_user,confidence,accepted");
    const auto log = parse_log(slurp(path("log.csv"))).for_host("host_1");
    EXPECT_EQ(line_count(path("out/timeline_host_1.csv")), 1 + window_spans(log, {60, 30, KeyMode::PerHost}).size());
    EXPECT_EQ(run("identify " + common() + "--out out --host nowhere"), 3);
    EXPECT_EQ(run("identify " + common() + "--out out"), 2);
}

TEST_F(Cli, NoveltyCurve) {
    ASSERT_EQ(run("synth --log log.csv --users 2 --weeks 3 --rate 0.5 --active-fraction 0.05"), 0);
    ASSERT_EQ(run("novelty --log log.csv --out out --min-tx 10 --max-week 4"), 0);
    EXPECT_EQ(line_count(path("out/novelty.csv")), 1u + 4u * 4u);
}

TEST_F(Cli, ExitCodes) {
    small_log();
    EXPECT_EQ(run("train " + common() + "--out o --duration 30 --shift 60"), 2);
    EXPECT_EQ(run("train " + common() + "--out o --kernel cubic"), 2);
    EXPECT_EQ(run("train " + common() + "--out o --nu 0"), 2);
    EXPECT_EQ(run("train --no-such-flag"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("train --log missing.csv --out o"), 3);
    {
        std::ofstream bad(path("bad.csv"));
        bad << "timestamp,user_id\n1,2\n";
    }
    EXPECT_EQ(run("train --log bad.csv --out o"), 3);
    EXPECT_EQ(run("evaluate " + common() + "--out empty_dir"), 3);
    EXPECT_EQ(run("train " + common() + "--out o --algo svdd --cost 0.0001"), 4);
    // partial artifacts are still written
    EXPECT_EQ(json_file(path("o/train_summary.json")).at("users").begin()->at("status"), "failed");
}

TEST_F(Cli, ConfigFileAndOverride) {
    small_log();
    {
        std::ofstream cfg(path("run.ini"));
        cfg << "log=log.csv\nout=cfg_out\nmin-tx=200\nduration=120\nshift=60\nmax-train-windows=100\n";
    }
    ASSERT_EQ(run("train --config run.ini --shift 120"), 0);
    const auto s = json_file(path("cfg_out/train_summary.json"));
    EXPECT_EQ(s.at("duration"), 120);
    EXPECT_EQ(s.at("shift"), 120);
    EXPECT_EQ(s.at("max_train_windows"), 100);
    {
        std::ofstream cfg(path("typo.ini"));
        cfg << "log=log.csv\nmin_tx=200\n";
    }
    EXPECT_EQ(run("train --config typo.ini"), 2);
}

TEST_F(Cli, TimestampIsOptIn) {
    small_log();
    ASSERT_EQ(run("train " + common() + "--out plain"), 0);
    ASSERT_EQ(run("train " + common() + "--out stamped --timestamp"), 0);
    EXPECT_FALSE(json_file(path("plain/train_summary.json")).contains("generated_at"));
    EXPECT_TRUE(json_file(path("stamped/train_summary.json")).contains("generated_at"));
}

TEST_F(Cli, RerunsAreByteIdentical) {
    small_log();
    const std::string base = common(100);
    for (const char* out : {"r1", "r2"}) {
        const std::string o = std::string("--out ") + out + " ";
        ASSERT_EQ(run("gridsearch " + base + o + "--param-grid 0.3,0.1 --window-grid 60:30,120:60"), 0);
        ASSERT_EQ(run("train " + base + o + "--params " + out + "/best_params.json --workers 2"), 0);
        ASSERT_EQ(run("evaluate " + base + o), 0);
        ASSERT_EQ(run("identify " + base + o + "--host host_2"), 0);
        ASSERT_EQ(run("novelty " + base + o + "--max-week 1"), 0);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(path("r1"))) {
        if (!e.is_regular_file()) continue;
        const auto twin = path("r2") / fs::relative(e.path(), path("r1"));
        ASSERT_TRUE(fs::exists(twin)) << twin;
        EXPECT_EQ(slurp(e.path()), slurp(twin)) << e.path();
        ++compared;
    }
    EXPECT_GE(compared, 10u);
}
