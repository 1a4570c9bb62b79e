#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tkgrb/dataset.hpp"
#include "tkgrb/evaluation.hpp"
#include "tkgrb/report_io.hpp"
#include "tkgrb/tuning.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

// The stats / tune / eval / sweep commands behind the CLI. Each command
// loads the dataset directory, runs its pipeline stage and writes its
// outputs under out_dir; console output is a single summary line.

struct RunConfig {
    std::filesystem::path dataset_dir;
    std::filesystem::path out_dir = ".";
    Mode mode = Mode::single_step;
    Split split = Split::test;
    std::uint64_t seed = 0;
    std::optional<TieKind> tie;  // default: random for eval/sweep, expected for tune
    std::optional<std::filesystem::path> params_file;
    std::optional<double> default_lambda;
    std::optional<double> default_alpha;
    std::optional<double> force_alpha;
    std::vector<double> lambda_grid;  // empty = default grid
    std::vector<double> alpha_grid;   // empty = default grid (sweep: {1})
    unsigned workers = 0;
    bool pool_directions = false;
    bool quiet = false;
};

namespace detail {

inline void ensure_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir))
        throw ConfigError("cannot create output directory: " + dir.string());
}

}  // namespace detail

struct StatsOutput {
    DatasetStats stats;
    std::filesystem::path json_path;
    std::filesystem::path csv_path;
};

inline StatsOutput cmd_stats(const RunConfig& cfg) {
    const Dataset ds = load_dataset(cfg.dataset_dir);
    const DatasetStats stats = compute_stats(ds);
    detail::ensure_out_dir(cfg.out_dir);

    StatsOutput out;
    out.stats = stats;
    out.json_path = cfg.out_dir / (ds.name + "_stats.json");
    out.csv_path = cfg.out_dir / (ds.name + "_stats.csv");
    write_text_file(out.json_path, stats_to_json(ds, stats).dump(2) + "\n");
    write_text_file(out.csv_path, stats_to_csv(ds, stats));

    if (!cfg.quiet) {
        std::printf("%s nodes=%zu rels=%zu train=%zu valid=%zu test=%zu ts=%zu/%zu/%zu "
                    "drec=%.1f%% rec=%.1f%%\n",
                    ds.name.c_str(), stats.num_nodes, stats.num_rels, stats.num_train,
                    stats.num_valid, stats.num_test, ds.num_train_timesteps,
                    ds.num_valid_timesteps, ds.num_test_timesteps, 100.0 * stats.drec,
                    100.0 * stats.rec);
    }
    return out;
}

struct TuneOutput {
    TuningResult result;
    std::filesystem::path params_path;
    double seconds = 0.0;
};

inline TuneOutput cmd_tune(const RunConfig& cfg) {
    const Dataset ds = load_dataset(cfg.dataset_dir);
    LambdaGrid lambda_grid = LambdaGrid::defaults();
    AlphaGrid alpha_grid = AlphaGrid::defaults();
    if (!cfg.lambda_grid.empty()) lambda_grid.values = cfg.lambda_grid;
    if (!cfg.alpha_grid.empty()) alpha_grid.values = cfg.alpha_grid;

    TuneOptions opt;
    opt.tie = {cfg.tie.value_or(TieKind::expected), cfg.seed};
    opt.pool_directions = cfg.pool_directions;
    opt.workers = cfg.workers;

    const auto start = std::chrono::steady_clock::now();
    TuneOutput out;
    out.result = tune(ds, lambda_grid, alpha_grid, opt);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    detail::ensure_out_dir(cfg.out_dir);
    out.params_path = cfg.out_dir / (ds.name + "_params.json");
    write_text_file(out.params_path, params_to_json(out.result).dump(2) + "\n");

    if (!cfg.quiet) {
        std::printf("%s tuned %llu relation-directions (%zu settings each) in %.2f s -> %s\n",
                    ds.name.c_str(),
                    static_cast<unsigned long long>(out.result.relations_tuned),
                    out.result.settings_per_relation, out.seconds, out.params_path.c_str());
    }
    return out;
}

struct EvalOutput {
    EvalReport report;
    std::filesystem::path json_path;
    std::filesystem::path csv_path;
};

inline EvalOutput cmd_eval(const RunConfig& cfg) {
    const Dataset ds = load_dataset(cfg.dataset_dir);

    RelationParams params;
    if (cfg.params_file) {
        params = load_params_file(*cfg.params_file, ds.num_relations);
        if (cfg.default_lambda && cfg.default_alpha)
            params.set_fallback({*cfg.default_lambda, *cfg.default_alpha});
    } else if (cfg.default_lambda && cfg.default_alpha) {
        params.set_fallback({*cfg.default_lambda, *cfg.default_alpha});
    } else {
        throw ConfigError(
            "eval needs --params FILE or both --default-lambda and --default-alpha");
    }
    if (cfg.force_alpha) {
        if (!(*cfg.force_alpha >= 0.0 && *cfg.force_alpha <= 1.0))
            throw ConfigError("--force-alpha must lie in [0, 1]");
        params.force_alpha(*cfg.force_alpha);
    }

    EvalOptions opt;
    opt.mode = cfg.mode;
    opt.tie = {cfg.tie.value_or(TieKind::random), cfg.seed};
    opt.workers = cfg.workers;

    EvalOutput out;
    out.report = evaluate(ds, cfg.split, params, opt);

    detail::ensure_out_dir(cfg.out_dir);
    const std::string stem =
        ds.name + "_" + to_string(cfg.split) + "_" + to_string(cfg.mode) + "_report";
    out.json_path = cfg.out_dir / (stem + ".json");
    out.csv_path = cfg.out_dir / (stem + ".csv");
    write_text_file(out.json_path, report_to_json(out.report, ds.relation_labels).dump(2) + "\n");
    write_text_file(out.csv_path, report_to_csv(out.report, ds.relation_labels));

    if (!cfg.quiet) {
        const MetricRow& m = out.report.aggregate;
        std::printf("%s %s %s MRR=%.4f H@1=%.4f H@3=%.4f H@10=%.4f (%llu queries) -> %s\n",
                    ds.name.c_str(), to_string(cfg.split), to_string(cfg.mode), m.mrr, m.h1, m.h3,
                    m.h10, static_cast<unsigned long long>(m.count), out.json_path.c_str());
    }
    return out;
}

struct SweepOutput {
    std::vector<SweepRow> rows;
    std::filesystem::path csv_path;
};

inline SweepOutput cmd_sweep(const RunConfig& cfg) {
    const Dataset ds = load_dataset(cfg.dataset_dir);
    const std::vector<double> lambdas =
        cfg.lambda_grid.empty() ? LambdaGrid::defaults().values : cfg.lambda_grid;
    const std::vector<double> alphas =
        cfg.alpha_grid.empty() ? std::vector<double>{1.0} : cfg.alpha_grid;

    EvalOptions opt;
    opt.mode = cfg.mode;
    opt.tie = {cfg.tie.value_or(TieKind::random), cfg.seed};
    opt.workers = cfg.workers;

    SweepOutput out;
    out.rows = sweep_fixed(ds, lambdas, alphas, opt);

    detail::ensure_out_dir(cfg.out_dir);
    out.csv_path = cfg.out_dir / (ds.name + "_sweep_" + to_string(cfg.mode) + ".csv");
    write_text_file(out.csv_path, sweep_to_csv(ds.name, out.rows));

    if (!cfg.quiet) {
        std::printf("%s wrote %zu sweep rows -> %s\n", ds.name.c_str(), out.rows.size(),
                    out.csv_path.c_str());
    }
    return out;
}

}  // namespace tkgrb
