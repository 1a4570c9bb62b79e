#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tkgrb/dataset.hpp"
#include "tkgrb/evaluation.hpp"
#include "tkgrb/tuning.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

// File formats for stats, params, evaluation reports and sweeps. CSV doubles
// use %.17g so the values round-trip exactly and match the JSON numbers.

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

// ---- dataset statistics ----

inline nlohmann::json stats_to_json(const Dataset& ds, const DatasetStats& stats) {
    return {
        {"dataset", ds.name},
        {"num_nodes", stats.num_nodes},
        {"num_rels", stats.num_rels},
        {"num_train", stats.num_train},
        {"num_valid", stats.num_valid},
        {"num_test", stats.num_test},
        {"num_train_timesteps", ds.num_train_timesteps},
        {"num_valid_timesteps", ds.num_valid_timesteps},
        {"num_test_timesteps", ds.num_test_timesteps},
        {"drec", stats.drec},
        {"rec", stats.rec},
    };
}

inline std::string stats_to_csv(const Dataset& ds, const DatasetStats& stats) {
    std::ostringstream out;
    out << "dataset,nodes,rels,train,valid,test,drec,rec\n";
    out << ds.name << ',' << stats.num_nodes << ',' << stats.num_rels << ',' << stats.num_train
        << ',' << stats.num_valid << ',' << stats.num_test << ',' << fmt_double(stats.drec) << ','
        << fmt_double(stats.rec) << '\n';
    return out.str();
}

// ---- params files ----

// Top-level JSON array, one entry per relation-direction.
inline nlohmann::json params_to_json(const TuningResult& result) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RelationTuning& row : result.per_relation) {
        nlohmann::json entry = {
            {"relation_id", row.relation_id},
            {"direction", to_string(row.direction)},
            {"lambda", row.lambda},
            {"alpha", row.alpha},
            {"count", row.count},
        };
        if (std::isnan(row.valid_mrr))
            entry["valid_mrr"] = nullptr;
        else
            entry["valid_mrr"] = row.valid_mrr;
        arr.push_back(std::move(entry));
    }
    return arr;
}

inline RelationParams params_from_json(const nlohmann::json& doc, std::size_t num_relations) {
    if (!doc.is_array()) throw ConfigError("params file: expected a top-level JSON array");
    RelationParams params;
    for (const auto& entry : doc) {
        const std::uint64_t forward = entry.at("relation_id").get<std::uint64_t>();
        if (forward >= num_relations)
            throw ConfigError("params file: relation_id " + std::to_string(forward) +
                              " outside vocabulary of size " + std::to_string(num_relations));
        const std::string direction = entry.at("direction").get<std::string>();
        if (direction != "tail" && direction != "head")
            throw ConfigError("params file: direction must be \"tail\" or \"head\"");
        const RelationId canonical =
            direction == "tail"
                ? static_cast<RelationId>(forward)
                : inverse_relation(static_cast<RelationId>(forward), num_relations);
        ScoreParams p;
        p.lambda = entry.at("lambda").get<double>();
        p.alpha = entry.at("alpha").get<double>();
        if (!(p.lambda >= 0.0))
            throw ConfigError("params file: lambda must be >= 0");
        if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
            throw ConfigError("params file: alpha must lie in [0, 1]");
        params.set(canonical, p);
    }
    return params;
}

inline RelationParams load_params_file(const std::filesystem::path& path,
                                       std::size_t num_relations) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("params file " + path.string() + ": " + e.what());
    }
    try {
        return params_from_json(doc, num_relations);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("params file " + path.string() + ": " + e.what());
    }
}

// ---- evaluation reports ----

inline std::string relation_label(const std::vector<std::string>& labels, RelationId id) {
    return id < labels.size() ? labels[id] : std::string{};
}

inline nlohmann::json report_to_json(const EvalReport& report,
                                     const std::vector<std::string>& labels) {
    nlohmann::json metrics_json = [](const MetricRow& m) {
        return nlohmann::json{
            {"count", m.count}, {"mrr", m.mrr}, {"h1", m.h1}, {"h3", m.h3}, {"h10", m.h10}};
    }(report.aggregate);

    nlohmann::json per_relation = nlohmann::json::array();
    for (const RelationRow& row : report.per_relation) {
        nlohmann::json entry = {
            {"relation_id", row.relation_id}, {"direction", to_string(row.direction)},
            {"count", row.metrics.count},     {"mrr", row.metrics.mrr},
            {"h1", row.metrics.h1},           {"h3", row.metrics.h3},
            {"h10", row.metrics.h10},
        };
        const std::string label = relation_label(labels, row.relation_id);
        if (!label.empty()) entry["relation_label"] = label;
        per_relation.push_back(std::move(entry));
    }

    return {
        {"dataset", report.dataset},
        {"split", to_string(report.split)},
        {"mode", to_string(report.mode)},
        {"tie", to_string(report.tie.kind)},
        {"seed", report.tie.seed},
        {"num_entities", report.num_entities},
        {"aggregate", std::move(metrics_json)},
        {"per_relation", std::move(per_relation)},
    };
}

// One row per relation-direction plus a trailing AGGREGATE row
// (relation_id -1, direction "all").
inline std::string report_to_csv(const EvalReport& report,
                                 const std::vector<std::string>& labels) {
    std::ostringstream out;
    out << "relation_id,relation_label,direction,count,mrr,h1,h3,h10\n";
    const auto metric_cells = [&](const MetricRow& m) {
        return std::to_string(m.count) + ',' + fmt_double(m.mrr) + ',' + fmt_double(m.h1) + ',' +
               fmt_double(m.h3) + ',' + fmt_double(m.h10);
    };
    for (const RelationRow& row : report.per_relation) {
        out << row.relation_id << ',' << relation_label(labels, row.relation_id) << ','
            << to_string(row.direction) << ',' << metric_cells(row.metrics) << '\n';
    }
    out << "-1,AGGREGATE,all," << metric_cells(report.aggregate) << '\n';
    return out.str();
}

// ---- sensitivity sweeps ----

inline std::string sweep_to_csv(const std::string& dataset, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "dataset,mode,lambda,alpha,count,mrr,h1,h3,h10\n";
    for (const SweepRow& row : rows) {
        out << dataset << ',' << to_string(row.mode) << ',' << fmt_double(row.lambda) << ','
            << fmt_double(row.alpha) << ',' << row.aggregate.count << ','
            << fmt_double(row.aggregate.mrr) << ',' << fmt_double(row.aggregate.h1) << ','
            << fmt_double(row.aggregate.h3) << ',' << fmt_double(row.aggregate.h10) << '\n';
    }
    return out.str();
}

}  // namespace tkgrb
