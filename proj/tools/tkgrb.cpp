#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tkgrb/commands.hpp"

namespace {

struct CliState {
    tkgrb::RunConfig cfg;
    std::string mode = "single";
    std::string split = "test";
    std::string tie;
    std::string params_file;
};

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--dataset", st.cfg.dataset_dir,
                    "Dataset directory with train.txt, valid.txt, test.txt")
        ->required();
    cmd->add_option("--out", st.cfg.out_dir, "Output directory (default: current directory)");
    cmd->add_option("--workers", st.cfg.workers,
                    "Worker threads, 0 = hardware concurrency (default 0)");
}

void add_seeded(CLI::App* cmd, CliState& st) {
    cmd->add_option("--seed", st.cfg.seed, "Master seed for tie breaking (default 0)");
    cmd->add_option("--tie", st.tie, "Tie protocol")
        ->check(CLI::IsMember({"random", "expected"}));
}

void add_mode(CLI::App* cmd, CliState& st) {
    cmd->add_option("--mode", st.mode, "Evaluation mode (default single)")
        ->check(CLI::IsMember({"single", "multi"}));
}

void add_grids(CLI::App* cmd, CliState& st) {
    cmd->add_option("--lambda-grid", st.cfg.lambda_grid, "Comma-separated lambda values")
        ->delimiter(',');
    cmd->add_option("--alpha-grid", st.cfg.alpha_grid, "Comma-separated alpha values")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrency baselines for temporal knowledge graph forecasting"};
    app.require_subcommand(1);
    CliState st;

    CLI::App* stats = app.add_subcommand("stats", "Dataset statistics (counts, Rec, DRec)");
    add_common(stats, st);

    CLI::App* tune = app.add_subcommand(
        "tune", "Per-relation (lambda, alpha) grid search by validation MRR");
    add_common(tune, st);
    add_seeded(tune, st);
    add_grids(tune, st);
    tune->add_flag("--pool-directions", st.cfg.pool_directions,
                   "Share one (lambda, alpha) across tail and head directions");

    CLI::App* eval = app.add_subcommand("eval", "Time-aware filtered ranking evaluation");
    add_common(eval, st);
    add_seeded(eval, st);
    add_mode(eval, st);
    eval->add_option("--split", st.split, "Split to evaluate (default test)")
        ->check(CLI::IsMember({"valid", "test"}));
    eval->add_option("--params", st.params_file, "Params file written by tune");
    eval->add_option("--default-lambda", st.cfg.default_lambda,
                     "Global lambda when no params file is given");
    eval->add_option("--default-alpha", st.cfg.default_alpha,
                     "Global alpha when no params file is given");
    eval->add_option("--force-alpha", st.cfg.force_alpha,
                     "Override alpha for all relations (1 = strict only, 0 = relaxed only)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Global (lambda, alpha) sensitivity sweep over the test split");
    add_common(sweep, st);
    add_seeded(sweep, st);
    add_mode(sweep, st);
    add_grids(sweep, st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    }

    st.cfg.mode = st.mode == "multi" ? tkgrb::Mode::multi_step : tkgrb::Mode::single_step;
    st.cfg.split = st.split == "valid" ? tkgrb::Split::valid : tkgrb::Split::test;
    if (st.tie == "random") st.cfg.tie = tkgrb::TieKind::random;
    if (st.tie == "expected") st.cfg.tie = tkgrb::TieKind::expected;
    if (!st.params_file.empty()) st.cfg.params_file = st.params_file;

    try {
        if (stats->parsed()) tkgrb::cmd_stats(st.cfg);
        if (tune->parsed()) tkgrb::cmd_tune(st.cfg);
        if (eval->parsed()) tkgrb::cmd_eval(st.cfg);
        if (sweep->parsed()) tkgrb::cmd_sweep(st.cfg);
    } catch (const tkgrb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const tkgrb::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
