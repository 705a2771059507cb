// wtprof: profile users from web-transaction logs with one-class models.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wtprof/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kSolver = 4 };

void add_options(CLI::App& app, wtprof::RunConfig& cfg, std::string& algo) {
    app.set_config("--config", "", "Flat key=value configuration file; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);

    app.add_option("--log", cfg.log_path, "Transaction log CSV (written by synth, read by the others)");
    app.add_option("--out", cfg.out_dir, "Output directory for models and reports")->capture_default_str();
    app.add_option("--algo", algo, "One-class model: ocsvm or svdd")
        ->check(CLI::IsMember({"ocsvm", "svdd"}))
        ->capture_default_str();
    app.add_option("--duration", cfg.duration, "Window duration D in seconds")->capture_default_str();
    app.add_option("--shift", cfg.shift, "Window shift S in seconds")->capture_default_str();
    app.add_option("--nu", cfg.nu, "OC-SVM nu")->capture_default_str();
    app.add_option("--cost", cfg.cost, "SVDD weight C")->capture_default_str();
    app.add_option("--kernel", cfg.kernel, "linear, poly[:DEGREE], rbf[:WIDTH] or sigmoid")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--workers", cfg.workers, "Concurrent tasks")->capture_default_str();
    app.add_option("--min-tx", cfg.min_tx, "Drop users with fewer transactions")->capture_default_str();
    app.add_option("--split", cfg.split, "Share of each user's oldest records used for training")
        ->capture_default_str();
    app.add_option("--max-train-windows", cfg.max_train_windows, "Per-user training window cap (0 = none)")
        ->capture_default_str();
    app.add_option("--tol", cfg.tol, "Solver KKT tolerance")->capture_default_str();

    app.add_option("--window-grid", cfg.window_grid, "Grid search: D:S pairs")->capture_default_str();
    app.add_option("--kernel-grid", cfg.kernel_grid, "Grid search: kernels")->capture_default_str();
    app.add_option("--param-grid", cfg.param_grid, "Grid search: nu or C values")->capture_default_str();
    app.add_option("--rank-by", cfg.rank_by, "Window ranking key: acc_self or acc")->capture_default_str();
    app.add_option("--params", cfg.params_file, "best_params.json from gridsearch, used by train");

    app.add_option("--eval-on", cfg.eval_on, "evaluate: test or train split")->capture_default_str();
    app.add_option("--host", cfg.host, "identify: host to analyse");
    app.add_option("--k", cfg.k, "identify: smoothing horizon in windows")->capture_default_str();
    app.add_option("--max-week", cfg.max_week, "novelty: last epoch delimiter in weeks")->capture_default_str();
    app.add_flag("--timestamp", cfg.timestamp, "Stamp reports with the generation time");

    app.add_option("--users", cfg.n_users, "synth: number of users")->capture_default_str();
    app.add_option("--hosts", cfg.n_hosts, "synth: number of hosts")->capture_default_str();
    app.add_option("--weeks", cfg.weeks, "synth: simulated span in weeks")->capture_default_str();
    app.add_option("--rate", cfg.rate, "synth: mean transactions per active minute")->capture_default_str();
    app.add_option("--overlap", cfg.overlap, "synth: share of field values common to all users")
        ->capture_default_str();
    app.add_option("--active-fraction", cfg.active_fraction, "synth: share of time a user is active")
        ->capture_default_str();
    app.add_option("--session-minutes", cfg.session_minutes, "synth: mean active period in minutes")
        ->capture_default_str();
}

int run(const std::string& command, const wtprof::RunConfig& cfg) {
    using namespace wtprof;
    if (command == "synth") {
        const auto n = cmd_synth(cfg);
        std::cout << "wrote " << n << " transactions to " << cfg.log_path << '\n';
    } else if (command == "train") {
        const auto r = cmd_train(cfg);
        std::cout << "trained " << r.trained << " user model(s) into " << cfg.out_dir << '\n';
    } else if (command == "gridsearch") {
        const auto r = cmd_gridsearch(cfg);
        const auto& w = r.windows.front();
        std::cout << "best window D=" << w.point.duration << " S=" << w.point.shift << '\n';
        for (const auto& [user, g] : r.models)
            std::cout << user << ": " << kernel_token(g.best_cell().kernel) << ' ' << g.best_cell().param
                      << " ACC=" << g.best_cell().acc << '\n';
    } else if (command == "evaluate") {
        const auto r = cmd_evaluate(cfg);
        std::cout << "ACC_self=" << r.acc_self << " ACC_other=" << r.acc_other << " ACC=" << r.acc << '\n';
    } else if (command == "identify") {
        const auto r = cmd_identify(cfg);
        std::cout << "scored " << r.timeline.size() << " windows of host " << cfg.host << '\n';
    } else if (command == "novelty") {
        const auto r = cmd_novelty(cfg);
        std::cout << "wrote " << r.size() << " novelty points\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    wtprof::RunConfig cfg;
    std::string algo = "ocsvm";

    CLI::App app{"User profiling from web-transaction logs"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    add_options(app, cfg, algo);
    app.add_subcommand("synth", "Generate a synthetic transaction log");
    app.add_subcommand("train", "Train one model per user on the oldest records");
    app.add_subcommand("gridsearch", "Window grid, then per-user kernel and parameter grid");
    app.add_subcommand("evaluate", "Confusion matrix of every model against every user's windows");
    app.add_subcommand("identify", "Timeline of model acceptances for one host");
    app.add_subcommand("novelty", "Novelty curves over epoch delimiters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        cfg.algo = wtprof::algorithm_from_string(algo);
        return run(app.get_subcommands().front()->get_name(), cfg);
    } catch (const wtprof::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const wtprof::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const wtprof::Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
}
