#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tkgrb/temporal_kg.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

enum class Split { valid, test };

inline const char* to_string(Split s) { return s == Split::valid ? "valid" : "test"; }

// A quadruple as it appears on disk: raw ids and raw (un-densified)
// timestamps, e.g. hour offsets in 24h steps.
struct RawQuadruple {
    std::int64_t s = 0;
    std::int64_t r = 0;
    std::int64_t o = 0;
    std::int64_t t = 0;

    friend bool operator==(const RawQuadruple&, const RawQuadruple&) = default;
};

// A benchmark dataset after timestep densification. Splits hold forward
// quadruples only; inverse augmentation happens when histories are built.
struct Dataset {
    std::string name;
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;  // forward relations only
    std::vector<Quadruple> train, valid, test;
    std::size_t num_train_timesteps = 0;
    std::size_t num_valid_timesteps = 0;
    std::size_t num_test_timesteps = 0;
    std::vector<std::string> entity_labels;    // empty when no dictionary file
    std::vector<std::string> relation_labels;  // empty when no dictionary file

    const std::vector<Quadruple>& split(Split s) const {
        return s == Split::valid ? valid : test;
    }
};

struct DatasetStats {
    std::size_t num_nodes = 0;
    std::size_t num_rels = 0;
    std::size_t num_train = 0;
    std::size_t num_valid = 0;
    std::size_t num_test = 0;
    double rec = 0.0;   // fraction of test triples seen at any earlier timestep
    double drec = 0.0;  // fraction seen at exactly the previous timestep
};

namespace detail {

inline bool parse_int(std::string_view token, std::int64_t& value) {
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

template <typename OnToken>
void for_each_token(std::string_view line, OnToken&& on_token) {
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) on_token(line.substr(i, j - i));
        i = j;
    }
}

}  // namespace detail

// Parses one split file: whitespace-separated integer lines with 4 or 5
// columns (s r o t [ignored]). Blank lines are skipped; anything else is a
// DataError naming the file and line.
inline std::vector<RawQuadruple> load_split(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open split file: " + file.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<RawQuadruple> out;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line(content.data() + pos,
                              (eol == std::string::npos ? content.size() : eol) - pos);
        pos = (eol == std::string::npos) ? content.size() + 1 : eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::int64_t cols[5];
        int count = 0;
        bool bad = false;
        detail::for_each_token(line, [&](std::string_view token) {
            if (bad) return;
            if (count >= 5) {
                bad = true;
                return;
            }
            if (!detail::parse_int(token, cols[count])) {
                bad = true;
                return;
            }
            ++count;
        });
        if (count == 0 && !bad) continue;  // blank line
        if (bad || count < 4) {
            throw DataError(file.string() + ":" + std::to_string(lineno) +
                            ": expected 4 or 5 integer columns");
        }
        if (cols[0] < 0 || cols[1] < 0 || cols[2] < 0 || cols[3] < 0) {
            throw DataError(file.string() + ":" + std::to_string(lineno) +
                            ": negative id or timestamp");
        }
        out.push_back({cols[0], cols[1], cols[2], cols[3]});
    }
    return out;
}

// Appends, for each forward quadruple (s, r, o, t), the inverse
// (o, r + num_relations, s, t) right after it. Dropping every second element
// recovers the input.
inline std::vector<Quadruple> augment_inverses(const std::vector<Quadruple>& quads,
                                               std::size_t num_relations) {
    std::vector<Quadruple> out;
    out.reserve(quads.size() * 2);
    for (const Quadruple& q : quads) {
        if (q.r >= num_relations)
            throw std::invalid_argument("augment_inverses: relation id " + std::to_string(q.r) +
                                        " is already an inverse (num_relations = " +
                                        std::to_string(num_relations) + ")");
        out.push_back(q);
        out.push_back({q.o, inverse_relation(q.r, num_relations), q.s, q.t});
    }
    return out;
}

// Maps the sorted distinct raw timestamps of all three splits onto 0,1,2,...
// and checks vocabulary bounds and split ordering. Vocabulary sizes default
// to max id + 1 over all splits.
inline Dataset densify_timesteps(std::string name, const std::vector<RawQuadruple>& raw_train,
                                 const std::vector<RawQuadruple>& raw_valid,
                                 const std::vector<RawQuadruple>& raw_test,
                                 std::optional<std::size_t> num_entities = std::nullopt,
                                 std::optional<std::size_t> num_relations = std::nullopt) {
    if (raw_train.empty()) throw DataError(name + ": train split is empty");
    if (raw_test.empty()) throw DataError(name + ": test split is empty");

    std::vector<std::int64_t> stamps;
    stamps.reserve(raw_train.size() + raw_valid.size() + raw_test.size());
    std::int64_t max_entity = -1, max_relation = -1;
    const auto scan = [&](const std::vector<RawQuadruple>& raw) {
        for (const RawQuadruple& q : raw) {
            stamps.push_back(q.t);
            max_entity = std::max({max_entity, q.s, q.o});
            max_relation = std::max(max_relation, q.r);
        }
    };
    scan(raw_train);
    scan(raw_valid);
    scan(raw_test);
    std::sort(stamps.begin(), stamps.end());
    stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());

    Dataset ds;
    ds.name = std::move(name);
    ds.num_entities = num_entities.value_or(static_cast<std::size_t>(max_entity + 1));
    ds.num_relations = num_relations.value_or(static_cast<std::size_t>(max_relation + 1));
    if (max_entity >= static_cast<std::int64_t>(ds.num_entities))
        throw DataError(ds.name + ": entity id " + std::to_string(max_entity) +
                        " outside vocabulary of size " + std::to_string(ds.num_entities));
    if (max_relation >= static_cast<std::int64_t>(ds.num_relations))
        throw DataError(ds.name + ": relation id " + std::to_string(max_relation) +
                        " outside vocabulary of size " + std::to_string(ds.num_relations));
    if (max_entity > std::numeric_limits<EntityId>::max() ||
        max_relation > std::numeric_limits<EntityId>::max())
        throw DataError(ds.name + ": id does not fit 32 bits");

    const auto densify = [&](const std::vector<RawQuadruple>& raw, std::vector<Quadruple>& out,
                             std::size_t& num_timesteps) {
        out.reserve(raw.size());
        std::vector<TimeIndex> seen;
        for (const RawQuadruple& q : raw) {
            const auto it = std::lower_bound(stamps.begin(), stamps.end(), q.t);
            const TimeIndex dense = static_cast<TimeIndex>(it - stamps.begin());
            out.push_back({static_cast<EntityId>(q.s), static_cast<RelationId>(q.r),
                           static_cast<EntityId>(q.o), dense});
            seen.push_back(dense);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        num_timesteps = seen.size();
    };
    densify(raw_train, ds.train, ds.num_train_timesteps);
    densify(raw_valid, ds.valid, ds.num_valid_timesteps);
    densify(raw_test, ds.test, ds.num_test_timesteps);

    const auto time_range = [](const std::vector<Quadruple>& quads) {
        TimeIndex lo = std::numeric_limits<TimeIndex>::max();
        TimeIndex hi = std::numeric_limits<TimeIndex>::min();
        for (const Quadruple& q : quads) {
            lo = std::min(lo, q.t);
            hi = std::max(hi, q.t);
        }
        return std::pair<TimeIndex, TimeIndex>{lo, hi};
    };
    const auto [train_lo, train_hi] = time_range(ds.train);
    const auto [test_lo, test_hi] = time_range(ds.test);
    if (!ds.valid.empty()) {
        const auto [valid_lo, valid_hi] = time_range(ds.valid);
        if (train_hi >= valid_lo || valid_hi >= test_lo)
            throw DataError(ds.name + ": split timesteps overlap (expected train < valid < test)");
    } else if (train_hi >= test_lo) {
        throw DataError(ds.name + ": split timesteps overlap (expected train < test)");
    }
    return ds;
}

namespace detail {

// "label<ws>id" per line; entries with out-of-range ids are ignored.
inline std::vector<std::string> load_labels(const std::filesystem::path& file, std::size_t n) {
    std::vector<std::string> labels(n);
    std::ifstream in(file);
    if (!in) return {};
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        const std::size_t cut = line.find_last_of(" \t");
        if (cut == std::string::npos) continue;
        std::int64_t id = -1;
        if (!parse_int(std::string_view(line).substr(cut + 1), id)) continue;
        if (id < 0 || id >= static_cast<std::int64_t>(n)) continue;
        std::size_t end = cut;
        while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
        labels[static_cast<std::size_t>(id)] = line.substr(0, end);
    }
    return labels;
}

}  // namespace detail

// Loads a dataset directory: train.txt, valid.txt, test.txt, plus optional
// stat.txt ("num_entities num_relations") and entity2id.txt/relation2id.txt
// label dictionaries.
inline Dataset load_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw DataError("dataset directory not found: " + dir.string());
    std::string missing;
    for (const char* f : {"train.txt", "valid.txt", "test.txt"})
        if (!std::filesystem::exists(dir / f)) missing += missing.empty() ? f : std::string(", ") + f;
    if (!missing.empty())
        throw DataError("dataset directory " + dir.string() + " is missing: " + missing);

    std::optional<std::size_t> num_entities, num_relations;
    if (std::filesystem::exists(dir / "stat.txt")) {
        std::ifstream stat(dir / "stat.txt");
        std::int64_t e = 0, r = 0;
        if (stat >> e >> r && e > 0 && r > 0) {
            num_entities = static_cast<std::size_t>(e);
            num_relations = static_cast<std::size_t>(r);
        }
    }

    Dataset ds = densify_timesteps(dir.filename().string(), load_split(dir / "train.txt"),
                                   load_split(dir / "valid.txt"), load_split(dir / "test.txt"),
                                   num_entities, num_relations);
    if (std::filesystem::exists(dir / "entity2id.txt"))
        ds.entity_labels = detail::load_labels(dir / "entity2id.txt", ds.num_entities);
    if (std::filesystem::exists(dir / "relation2id.txt"))
        ds.relation_labels = detail::load_labels(dir / "relation2id.txt", ds.num_relations);
    return ds;
}

// Recurrency degree (rec): fraction of test quadruples (s, r, o, t+) whose
// triple occurs at some k < t+ in train, valid, or an earlier test timestep.
// Direct recurrency degree (drec): fraction whose triple occurs at exactly
// t+ - 1. Computed on forward quadruples only.
inline DatasetStats compute_stats(const Dataset& ds) {
    TemporalKG kg;
    kg.insert_all(ds.train);
    kg.insert_all(ds.valid);
    kg.insert_all(ds.test);

    std::size_t rec_hits = 0, drec_hits = 0;
    for (const Quadruple& q : ds.test) {
        const auto* times = kg.occurrence_list(q.s, q.r, q.o);
        if (!times) continue;
        const auto it = std::lower_bound(times->begin(), times->end(), q.t);
        if (it != times->begin()) {
            ++rec_hits;
            if (*std::prev(it) == q.t - 1) ++drec_hits;
        }
    }

    DatasetStats stats;
    stats.num_nodes = ds.num_entities;
    stats.num_rels = ds.num_relations;
    stats.num_train = ds.train.size();
    stats.num_valid = ds.valid.size();
    stats.num_test = ds.test.size();
    if (!ds.test.empty()) {
        stats.rec = static_cast<double>(rec_hits) / static_cast<double>(ds.test.size());
        stats.drec = static_cast<double>(drec_hits) / static_cast<double>(ds.test.size());
    }
    return stats;
}

}  // namespace tkgrb
