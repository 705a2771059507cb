#pragma once

// The command layer behind the wtprof tool: run configuration, file layout and
// one function per subcommand. Every command is deterministic for a fixed
// configuration; a generation timestamp is only written when requested.

#include <cctype>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wtprof/evaluation.hpp"
#include "wtprof/identify.hpp"
#include "wtprof/novelty.hpp"
#include "wtprof/synth.hpp"

namespace wtprof {

struct RunConfig {
    std::string log_path;
    std::string out_dir = "out";

    Algorithm algo = Algorithm::OcSvm;
    std::int64_t duration = 60;
    std::int64_t shift = 30;
    std::string kernel = "rbf";
    double nu = 0.1;
    double cost = 0.1;
    double split = 0.75;
    std::size_t min_tx = 1500;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::size_t max_train_windows = 2000;
    double tol = 1e-3;

    std::string window_grid = "60:6,60:30,300:60,600:60,1800:300,3600:300";
    std::string kernel_grid = "linear,poly,rbf,sigmoid";
    std::string param_grid = "0.999,0.99,0.95,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1,0.05,0.01,0.001";
    std::string rank_by = "acc_self";
    std::string params_file;  // per-user kernel/param chosen by gridsearch

    std::string eval_on = "test";
    std::string host;
    std::size_t k = 10;
    int max_week = 21;
    bool timestamp = false;

    // synth
    std::size_t n_users = 5;
    std::size_t n_hosts = 8;
    double weeks = 1.0;
    double rate = 3.0;
    double overlap = 0.5;
    double active_fraction = 0.1;
    double session_minutes = 30.0;

    /// nu for OC-SVM, C for SVDD.
    double param() const { return algo == Algorithm::OcSvm ? nu : cost; }

    WindowConfig window(KeyMode mode = KeyMode::PerUser) const { return {duration, shift, mode}; }

    EvalOptions eval_options() const {
        EvalOptions o;
        o.workers = workers;
        o.max_train_windows = max_train_windows;
        o.solver.tol = tol;
        return o;
    }

    void validate() const {
        window().validate();
        if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must lie in (0,1)");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (k == 0) throw ConfigError("k must be at least 1");
        if (max_week < 1) throw ConfigError("max-week must be at least 1");
        if (eval_on != "train" && eval_on != "test") throw ConfigError("eval-on must be 'train' or 'test'");
        rank_key_from_string(rank_by);
        parse_kernel_spec(kernel);
    }
};

// ---------------------------------------------------------------------------
// Parsing helpers for grid strings

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::logic_error&) {
        throw ConfigError("bad number '" + s + "' in " + what);
    }
    if (used != s.size()) throw ConfigError("bad number '" + s + "' in " + what);
    return v;
}

}  // namespace detail

/// "60:6,60:30" -> {(60,6), (60,30)}.
inline std::vector<WindowGridPoint> parse_window_grid(const std::string& s) {
    std::vector<WindowGridPoint> out;
    for (const auto& item : detail::split_list(s)) {
        const auto parts = detail::split_list(item, ':');
        if (parts.size() != 2) throw ConfigError("window grid entries look like D:S, got '" + item + "'");
        const auto d = detail::parse_double(parts[0], "window grid");
        const auto sh = detail::parse_double(parts[1], "window grid");
        WindowGridPoint p{static_cast<std::int64_t>(d), static_cast<std::int64_t>(sh)};
        if (static_cast<double>(p.duration) != d || static_cast<double>(p.shift) != sh)
            throw ConfigError("window grid values must be whole seconds");
        WindowConfig{p.duration, p.shift}.validate();
        out.push_back(p);
    }
    if (out.empty()) throw ConfigError("empty window grid");
    return out;
}

inline std::vector<KernelSpec> parse_kernel_grid(const std::string& s) {
    std::vector<KernelSpec> out;
    for (const auto& item : detail::split_list(s)) out.push_back(parse_kernel_spec(item));
    if (out.empty()) throw ConfigError("empty kernel grid");
    return out;
}

inline std::vector<double> parse_param_grid(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : detail::split_list(s)) {
        const double v = detail::parse_double(item, "parameter grid");
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("parameter grid values must lie in (0,1]");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty parameter grid");
    return out;
}

// ---------------------------------------------------------------------------
// Files

namespace detail {

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out_dir) / name;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

inline std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// CSV with an optional `# generated_at=` first line.
inline void write_csv(const RunConfig& cfg, const std::filesystem::path& path, const std::string& body) {
    write_text(path, (cfg.timestamp ? "# generated_at=" + utc_now() + "\n" : std::string()) + body);
}

inline void write_json(const RunConfig& cfg, const std::filesystem::path& path, nlohmann::json j) {
    if (cfg.timestamp) j["generated_at"] = utc_now();
    write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline TransactionLog read_log(const RunConfig& cfg) {
    if (cfg.log_path.empty()) throw ConfigError("no input log given (--log)");
    std::ifstream in(cfg.log_path);
    if (!in) throw DataError("cannot read log " + cfg.log_path);
    return parse_log(in);
}

/// Key usable as a file name: characters outside [A-Za-z0-9_.-] become '_'.
inline std::string safe_name(const std::string& key) {
    std::string s = key;
    for (auto& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) c = '_';
    return s;
}

inline std::string model_file_name(const std::string& user) { return "models/" + safe_name(user) + ".json"; }

template <typename T>
std::string render(const T& value, void (*writer)(std::ostream&, const T&)) {
    std::ostringstream out;
    writer(out, value);
    return out.str();
}

struct PreparedData {
    TransactionLog log;  // after the min_tx filter
    LogSplit split;
    Vocabulary vocab;  // from the training split only
    std::vector<std::string> dropped_users;
};

inline PreparedData prepare(const RunConfig& cfg) {
    PreparedData d;
    const auto raw = read_log(cfg);
    d.log = filter_users(raw, cfg.min_tx);
    const auto kept = d.log.users();
    for (const auto& u : raw.users())
        if (!std::binary_search(kept.begin(), kept.end(), u)) d.dropped_users.push_back(u);
    if (d.log.empty()) throw DataError("no user has at least " + std::to_string(cfg.min_tx) + " transactions");
    d.split = split_oldest(d.log, cfg.split);
    d.vocab = build_vocabulary(d.split.train);
    return d;
}

struct UserChoice {
    KernelSpec kernel;
    double param = 0.0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// synth

inline SynthConfig synth_config(const RunConfig& cfg) {
    if (cfg.n_users == 0) throw ConfigError("synth needs at least one user");
    SynthConfig s;
    s.n_hosts = cfg.n_hosts;
    s.weeks = cfg.weeks;
    s.rng_seed = cfg.seed;
    ProfileOptions po;
    po.n_users = cfg.n_users;
    po.overlap = cfg.overlap;
    po.rate_per_min = cfg.rate;
    po.active_fraction = cfg.active_fraction;
    po.session_minutes = cfg.session_minutes;
    po.seed = cfg.seed;
    s.users = make_profiles(po);
    return s;
}

/// Writes a synthetic log to cfg.log_path.
inline std::size_t cmd_synth(const RunConfig& cfg) {
    if (cfg.log_path.empty()) throw ConfigError("synth writes to the path given by --log");
    const auto log = generate_synthetic(synth_config(cfg));
    detail::write_text(cfg.log_path, serialize_log(log));
    return log.size();
}

// ---------------------------------------------------------------------------
// train

struct TrainOutcome {
    std::size_t trained = 0;
    std::size_t failed = 0;
};

inline TrainOutcome cmd_train(const RunConfig& cfg) {
    cfg.validate();
    auto d = detail::prepare(cfg);

    auto window = cfg.window();
    std::map<std::string, detail::UserChoice> choices;
    if (!cfg.params_file.empty()) {
        const auto j = detail::read_json(cfg.params_file);
        window.duration = j.at("duration").get<std::int64_t>();
        window.shift = j.at("shift").get<std::int64_t>();
        if (algorithm_from_string(j.at("algo").get<std::string>()) != cfg.algo)
            throw ConfigError("parameter file was produced for a different algorithm");
        for (const auto& [user, c] : j.at("users").items())
            choices[user] = {parse_kernel_spec(c.at("kernel").get<std::string>()), c.at("param").get<double>()};
    }
    const auto default_kernel = parse_kernel_spec(cfg.kernel);

    const auto train = training_windows(d.split.train, d.vocab, window, cfg.max_train_windows);
    std::vector<std::string> users;
    for (const auto& [u, ws] : train) users.push_back(u);

    struct Slot {
        std::optional<OneClassModel> model;
        detail::UserChoice choice;
        std::string error;
    };
    std::vector<Slot> slots(users.size());
    parallel_for(users.size(), cfg.workers, [&](std::size_t i) {
        auto& s = slots[i];
        const auto it = choices.find(users[i]);
        s.choice = it != choices.end() ? it->second : detail::UserChoice{default_kernel, cfg.param()};
        try {
            SolverOptions opt;
            opt.tol = cfg.tol;
            s.model = train_model(cfg.algo, train.at(users[i]), s.choice.param, s.choice.kernel, opt);
        } catch (const SolverError& e) {
            s.error = e.what();
        }
    });

    nlohmann::json summary;
    summary["algo"] = std::string(to_string(cfg.algo));
    summary["duration"] = window.duration;
    summary["shift"] = window.shift;
    summary["split"] = cfg.split;
    summary["min_tx"] = cfg.min_tx;
    summary["max_train_windows"] = cfg.max_train_windows;
    summary["dim"] = d.vocab.total_dim();
    summary["filtered_out"] = d.dropped_users;
    summary["users"] = nlohmann::json::object();

    detail::write_json(cfg, detail::out_path(cfg, "vocab.json"), d.vocab.to_json());
    TrainOutcome outcome;
    for (std::size_t i = 0; i < users.size(); ++i) {
        auto& s = slots[i];
        nlohmann::json u;
        u["windows"] = train.at(users[i]).size();
        u["kernel"] = kernel_token(s.choice.kernel);
        u["param"] = s.choice.param;
        if (s.model) {
            const auto file = detail::model_file_name(users[i]);
            detail::write_text(detail::out_path(cfg, file), s.model->to_json().dump(1) + "\n");
            u["status"] = "ok";
            u["model_file"] = file;
            u["support_vectors"] = s.model->support_count();
            ++outcome.trained;
        } else {
            u["status"] = "failed";
            u["error"] = s.error;
            ++outcome.failed;
        }
        summary["users"][users[i]] = u;
    }
    detail::write_json(cfg, detail::out_path(cfg, "train_summary.json"), summary);
    if (outcome.failed > 0)
        throw SolverError(std::to_string(outcome.failed) + " user model(s) failed to train; see train_summary.json");
    return outcome;
}

// ---------------------------------------------------------------------------
// Loading trained artifacts

struct TrainedSet {
    nlohmann::json summary;
    Vocabulary vocab;
    UserModels models;

    WindowConfig window(KeyMode mode) const {
        return {summary.at("duration").get<std::int64_t>(), summary.at("shift").get<std::int64_t>(), mode};
    }
};

inline TrainedSet load_trained(const RunConfig& cfg) {
    TrainedSet t;
    t.summary = detail::read_json(detail::out_path(cfg, "train_summary.json"));
    try {
        t.vocab = Vocabulary::from_json(detail::read_json(detail::out_path(cfg, "vocab.json")));
        for (const auto& [user, u] : t.summary.at("users").items()) {
            if (u.at("status") != "ok") continue;
            t.models.emplace(user, load_model(detail::out_path(cfg, u.at("model_file").get<std::string>()).string()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed training artifacts: ") + e.what());
    }
    for (const auto& [user, m] : t.models)
        if (m.dim() != t.vocab.total_dim()) throw DataError("model '" + user + "' does not match the vocabulary");
    return t;
}

// ---------------------------------------------------------------------------
// evaluate

inline AcceptanceReport cmd_evaluate(const RunConfig& cfg) {
    cfg.validate();
    const auto t = load_trained(cfg);
    if (t.models.empty()) throw DataError("no trained models in " + cfg.out_dir);
    RunConfig c = cfg;
    c.min_tx = t.summary.at("min_tx").get<std::size_t>();
    c.split = t.summary.at("split").get<double>();
    const auto raw = detail::read_log(c);
    const auto split = split_oldest(filter_users(raw, c.min_tx), c.split);
    const auto window = t.window(KeyMode::PerUser);

    UserWindows sets;
    if (cfg.eval_on == "train") {
        sets = training_windows(split.train, t.vocab, window, t.summary.at("max_train_windows").get<std::size_t>());
    } else {
        for (auto& [u, ws] : group_by_key(window_stream(split.test, window, t.vocab))) sets[u] = vectors_of(ws);
    }
    const auto report = evaluate_pairwise(t.models, sets, cfg.workers);

    detail::write_csv(cfg, detail::out_path(cfg, "confusion.csv"), detail::render(report, &write_confusion_csv));
    auto j = to_json(report);
    j["evaluated_on"] = cfg.eval_on;
    j["algo"] = t.summary.at("algo");
    detail::write_json(cfg, detail::out_path(cfg, "evaluation.json"), j);
    return report;
}

// ---------------------------------------------------------------------------
// gridsearch

struct GridSearchOutcome {
    std::vector<WindowGridResult> windows;
    std::map<std::string, ModelGridResult> models;
};

inline GridSearchOutcome cmd_gridsearch(const RunConfig& cfg) {
    cfg.validate();
    const auto d = detail::prepare(cfg);
    const auto wgrid = parse_window_grid(cfg.window_grid);
    const auto kgrid = parse_kernel_grid(cfg.kernel_grid);
    const auto pgrid = parse_param_grid(cfg.param_grid);
    const auto opt = cfg.eval_options();

    GridSearchOutcome out;
    out.windows = grid_search_window(d.split.train, d.vocab, wgrid, cfg.algo, parse_kernel_spec(cfg.kernel),
                                     cfg.param(), rank_key_from_string(cfg.rank_by), opt);
    const auto best_window = out.windows.front().point;

    const auto train = training_windows(d.split.train, d.vocab, {best_window.duration, best_window.shift},
                                        cfg.max_train_windows);
    std::vector<std::string> users;
    for (const auto& [u, ws] : train) users.push_back(u);
    std::vector<std::optional<ModelGridResult>> slots(users.size());
    parallel_for(users.size(), cfg.workers, [&](std::size_t i) {
        std::vector<std::vector<FeatureVector>> others;
        for (const auto& [v, ws] : train)
            if (v != users[i]) others.push_back(ws);
        slots[i] = grid_search_model(cfg.algo, train.at(users[i]), others, kgrid, pgrid, opt.solver);
    });

    std::ostringstream csv;
    csv << "user,kernel,param,acc_self,acc_other,acc,support_vectors,status\n";
    nlohmann::json best;
    best["algo"] = std::string(to_string(cfg.algo));
    best["duration"] = best_window.duration;
    best["shift"] = best_window.shift;
    best["users"] = nlohmann::json::object();
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto& r = *slots[i];
        for (const auto& c : r.cells) {
            csv << users[i] << ',' << kernel_token(c.kernel) << ',' << detail::fmt(c.param, "%g") << ',';
            if (c.ok)
                csv << detail::fmt(c.acc_self) << ',' << detail::fmt(c.acc_other) << ',' << detail::fmt(c.acc) << ','
                    << c.support_vectors << ",ok\n";
            else
                csv << ",,,,failed\n";
        }
        const auto& b = r.best_cell();
        best["users"][users[i]] = {{"kernel", kernel_token(b.kernel)},
                                   {"param", b.param},
                                   {"acc_self", b.acc_self},
                                   {"acc_other", b.acc_other},
                                   {"acc", b.acc}};
        out.models.emplace(users[i], r);
    }

    detail::write_csv(cfg, detail::out_path(cfg, "gridsearch_windows.csv"),
                      detail::render(out.windows, &write_window_grid_csv));
    detail::write_csv(cfg, detail::out_path(cfg, "gridsearch_models.csv"), csv.str());
    detail::write_json(cfg, detail::out_path(cfg, "best_params.json"), best);
    return out;
}

// ---------------------------------------------------------------------------
// identify

struct IdentifyOutcome {
    std::vector<TimelineEntry> timeline;
    std::vector<IdentityEstimate> estimates;
};

inline IdentifyOutcome cmd_identify(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.host.empty()) throw ConfigError("identify needs --host");
    const auto t = load_trained(cfg);
    const auto host_log = detail::read_log(cfg).for_host(cfg.host);
    if (host_log.empty()) throw DataError("no records for host '" + cfg.host + "'");
    const auto window = t.window(KeyMode::PerHost);
    const auto spans = window_spans(host_log, window);
    const auto windows = window_stream(host_log, window, t.vocab);

    IdentifyOutcome out;
    out.timeline = score_host_stream(t.models, windows, window_majority_user(host_log, spans));
    out.estimates = smooth_identity(out.timeline, cfg.k);
    std::ostringstream csv;
    write_timeline_csv(csv, out.timeline, out.estimates);
    detail::write_csv(cfg, detail::out_path(cfg, "timeline_" + detail::safe_name(cfg.host) + ".csv"), csv.str());
    return out;
}

// ---------------------------------------------------------------------------
// novelty

inline std::vector<NoveltyPoint> cmd_novelty(const RunConfig& cfg) {
    cfg.validate();
    const auto log = filter_users(detail::read_log(cfg), cfg.min_tx);
    if (log.empty()) throw DataError("no user has at least " + std::to_string(cfg.min_tx) + " transactions");
    const auto points = novelty_curve(log, build_vocabulary(log), cfg.window(), cfg.max_week);
    detail::write_csv(cfg, detail::out_path(cfg, "novelty.csv"), detail::render(points, &write_novelty_csv));
    return points;
}

}  // namespace wtprof
