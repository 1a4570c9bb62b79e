#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tkgrb/dataset.hpp"
#include "tkgrb/parallel.hpp"
#include "tkgrb/rng.hpp"
#include "tkgrb/scoring.hpp"
#include "tkgrb/temporal_kg.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

// Time-aware filtered ranking and the single-step / multi-step drivers.
//
// Single-step: after scoring all queries of a test timestep, its ground
// truth (and inverses) is inserted into the history before moving on.
// Multi-step: the history is never extended with split facts.

enum class Mode { single_step, multi_step };

inline const char* to_string(Mode m) {
    return m == Mode::single_step ? "single-step" : "multi-step";
}

enum class TieKind { random, expected };

inline const char* to_string(TieKind k) {
    return k == TieKind::random ? "random" : "expected";
}

// How tied candidate scores resolve into a rank. "random" draws one uniform
// position inside the tie group (one draw per query, reused for all
// metrics); "expected" takes the tie-group midpoint, which is deterministic.
struct TieProtocol {
    TieKind kind = TieKind::random;
    std::uint64_t seed = 0;
};

struct RankOutcome {
    double rank = 0.0;           // >= 1; integer-valued under the random protocol
    std::uint32_t num_tied = 0;  // candidates != gold sharing the gold score
};

// Entities that are also correct answers for the query's (subject, relation)
// at the same timestep: everything in gold_facts_at_t matching the canonical
// pattern except the gold itself. Ascending, duplicate-free.
inline std::vector<EntityId> filter_set(const std::vector<Quadruple>& gold_facts_at_t,
                                        const Query& query) {
    std::vector<EntityId> out;
    for (const Quadruple& f : gold_facts_at_t) {
        if (f.s == query.subject && f.r == query.relation && f.t == query.target_t &&
            f.o != query.gold)
            out.push_back(f.o);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Rank of the gold entity among all non-excluded entities. Entities absent
// from the score vector share score 0; when the gold itself scores 0 they
// count toward its tie group. excluded must be ascending and must not
// contain the gold.
inline RankOutcome rank_gold(const ScoreVector& scores, EntityId gold,
                             const std::vector<EntityId>& excluded, std::size_t num_entities,
                             const TieProtocol& tie, SplitMix64& rng) {
    if (std::binary_search(excluded.begin(), excluded.end(), gold))
        throw std::invalid_argument("rank_gold: gold entity is excluded");

    const double gold_score = score_of(scores, gold);
    std::size_t higher = 0, ties = 0, excluded_scored = 0;
    for (const ScoreEntry& e : scores) {
        if (e.entity == gold) continue;
        if (std::binary_search(excluded.begin(), excluded.end(), e.entity)) {
            ++excluded_scored;
            continue;
        }
        if (e.score > gold_score)
            ++higher;
        else if (e.score == gold_score)
            ++ties;
    }
    if (gold_score == 0.0) {
        // stored scores are strictly positive, so the gold is not in the
        // vector and every entity outside it ties with the gold at 0
        const std::size_t unscored = num_entities - scores.size();
        ties += unscored - 1 - (excluded.size() - excluded_scored);
    }

    RankOutcome out;
    out.num_tied = static_cast<std::uint32_t>(ties);
    if (tie.kind == TieKind::expected)
        out.rank = static_cast<double>(higher) + 1.0 + static_cast<double>(ties) * 0.5;
    else
        out.rank = static_cast<double>(higher) + 1.0 +
                   (ties == 0 ? 0.0 : static_cast<double>(rng.bounded(ties + 1)));
    return out;
}

struct MetricRow {
    std::uint64_t count = 0;
    double mrr = 0.0;
    double h1 = 0.0;
    double h3 = 0.0;
    double h10 = 0.0;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct RelationRow {
    RelationId relation_id = 0;  // forward id
    Direction direction = Direction::tail;
    MetricRow metrics;

    friend bool operator==(const RelationRow&, const RelationRow&) = default;
};

struct EvalReport {
    std::string dataset;
    Split split = Split::test;
    Mode mode = Mode::single_step;
    TieProtocol tie;
    std::size_t num_entities = 0;
    MetricRow aggregate;
    std::vector<RelationRow> per_relation;  // sorted by (relation_id, tail < head)

    friend bool operator==(const EvalReport& a, const EvalReport& b) {
        return a.dataset == b.dataset && a.split == b.split && a.mode == b.mode &&
               a.tie.kind == b.tie.kind && a.tie.seed == b.tie.seed &&
               a.num_entities == b.num_entities && a.aggregate == b.aggregate &&
               a.per_relation == b.per_relation;
    }
};

struct EvalOptions {
    Mode mode = Mode::single_step;
    TieProtocol tie;
    unsigned workers = 0;  // 0 = hardware concurrency
};

namespace detail {

struct MetricAccum {
    std::uint64_t count = 0;
    std::uint64_t h1 = 0, h3 = 0, h10 = 0;
    double rr_sum = 0.0;

    void add(double rank) {
        ++count;
        rr_sum += 1.0 / rank;
        if (rank <= 1.0) ++h1;
        if (rank <= 3.0) ++h3;
        if (rank <= 10.0) ++h10;
    }

    MetricRow row() const {
        MetricRow r;
        r.count = count;
        if (count > 0) {
            const double n = static_cast<double>(count);
            r.mrr = rr_sum / n;
            r.h1 = static_cast<double>(h1) / n;
            r.h3 = static_cast<double>(h3) / n;
            r.h10 = static_cast<double>(h10) / n;
        }
        return r;
    }
};

// Ground-truth answers of one timestep keyed by canonical (subject,
// relation); backs the time-aware filter.
class GoldIndex {
public:
    void add(EntityId s, RelationId r, EntityId gold) { cells_[key(s, r)].push_back(gold); }

    void finalize() {
        for (auto& [k, golds] : cells_) {
            std::sort(golds.begin(), golds.end());
            golds.erase(std::unique(golds.begin(), golds.end()), golds.end());
        }
    }

    // Other true answers for (s, r) minus the query's own gold; ascending.
    std::vector<EntityId> excluded_for(EntityId s, RelationId r, EntityId gold) const {
        std::vector<EntityId> out;
        const auto it = cells_.find(key(s, r));
        if (it == cells_.end()) return out;
        out.reserve(it->second.size());
        for (const EntityId e : it->second)
            if (e != gold) out.push_back(e);
        return out;
    }

private:
    static std::uint64_t key(EntityId s, RelationId r) {
        return (static_cast<std::uint64_t>(s) << 32) | r;
    }

    std::unordered_map<std::uint64_t, std::vector<EntityId>> cells_;
};

// Relaxed score vectors per relation, reused across timesteps. A relation's
// vector is a pure function of its object counts, and those change only when
// a fact with that relation is inserted, so the total count doubles as a
// cache key. Rebuilds happen between timesteps from a single thread.
class RelaxedCache {
public:
    const ScoreVector* get(const TemporalKG& kg, RelationId r) {
        Entry& e = entries_[r];
        const std::uint64_t count = kg.relation_count(r);
        if (e.built_at != count) {
            relaxed_score_into(kg, r, e.vec);
            e.built_at = count;
        }
        return &e.vec;
    }

private:
    struct Entry {
        std::uint64_t built_at = std::numeric_limits<std::uint64_t>::max();
        ScoreVector vec;
    };
    std::unordered_map<RelationId, Entry> entries_;  // pointers stay valid across inserts
};

// Per-timestep caches over a frozen history: strict denominators per lambda
// and relaxed vectors per relation. Prewarm from one thread, then score from
// any number of threads.
class TimestepScorer {
public:
    TimestepScorer(const TemporalKG& kg, TimeIndex t_plus, RelaxedCache& relaxed_cache)
        : kg_(kg), t_plus_(t_plus), relaxed_cache_(relaxed_cache) {}

    void add_lambda(double lambda) {
        const std::uint64_t key = bits(lambda);
        if (denominators_.find(key) == denominators_.end())
            denominators_.emplace(key, strict_denominator(kg_, t_plus_, lambda));
    }

    void add_relation(RelationId r) {
        auto [it, fresh] = relaxed_.try_emplace(r, nullptr);
        if (fresh) it->second = relaxed_cache_.get(kg_, r);
    }

    double denominator(double lambda) const {
        const auto it = denominators_.find(bits(lambda));
        if (it == denominators_.end())
            throw std::logic_error("TimestepScorer: lambda not prewarmed");
        return it->second;
    }

    const ScoreVector& relaxed(RelationId r) const {
        const auto it = relaxed_.find(r);
        if (it == relaxed_.end()) throw std::logic_error("TimestepScorer: relation not prewarmed");
        return *it->second;
    }

    void strict_into(EntityId subject, RelationId relation, double lambda,
                     ScoreVector& out) const {
        strict_score_into(kg_, subject, relation, t_plus_, lambda, denominator(lambda), out);
    }

    // Combined score of one query with per-query scratch buffers.
    void score_into(EntityId subject, RelationId relation, const ScoreParams& p,
                    ScoreVector& strict_buf, ScoreVector& out) const {
        strict_buf.clear();
        if (p.alpha > 0.0) strict_into(subject, relation, p.lambda, strict_buf);
        combine_into(strict_buf, p.alpha < 1.0 ? relaxed(relation) : empty_, p.alpha, out);
    }

    const TemporalKG& kg() const { return kg_; }
    TimeIndex t_plus() const { return t_plus_; }

private:
    static std::uint64_t bits(double lambda) { return std::bit_cast<std::uint64_t>(lambda); }

    const TemporalKG& kg_;
    TimeIndex t_plus_;
    RelaxedCache& relaxed_cache_;
    std::unordered_map<std::uint64_t, double> denominators_;
    std::unordered_map<RelationId, const ScoreVector*> relaxed_;
    const ScoreVector empty_;
};

// Split quadruples expanded into canonical queries (tail then head per
// fact), with stable global indices that seed per-query rng streams.
struct QueryPlan {
    std::vector<Query> queries;          // index = global query index
    std::vector<std::uint32_t> order;    // query indices sorted by (timestep, index)
    std::vector<std::size_t> batch_end;  // exclusive ends of per-timestep runs in `order`
    std::vector<std::vector<std::uint32_t>> batch_quads;  // split quad indices per timestep

    static QueryPlan build(const std::vector<Quadruple>& split_quads, std::size_t num_relations) {
        QueryPlan plan;
        plan.queries.reserve(split_quads.size() * 2);
        for (const Quadruple& q : split_quads) {
            plan.queries.push_back({q.s, q.r, q.o, q.t, Direction::tail});
            plan.queries.push_back(
                {q.o, inverse_relation(q.r, num_relations), q.s, q.t, Direction::head});
        }
        plan.order.resize(plan.queries.size());
        std::iota(plan.order.begin(), plan.order.end(), 0u);
        std::stable_sort(plan.order.begin(), plan.order.end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                             return plan.queries[a].target_t < plan.queries[b].target_t;
                         });

        std::map<TimeIndex, std::vector<std::uint32_t>> quads_by_t;
        for (std::uint32_t i = 0; i < split_quads.size(); ++i)
            quads_by_t[split_quads[i].t].push_back(i);

        std::size_t pos = 0;
        for (auto& [t, quad_ids] : quads_by_t) {
            pos += quad_ids.size() * 2;
            plan.batch_end.push_back(pos);
            plan.batch_quads.push_back(std::move(quad_ids));
        }
        return plan;
    }
};

}  // namespace detail

// Scores and ranks every split quadruple in both directions against a
// history that starts strictly before the split (train for valid,
// train + valid for test), inverse-augmented. Deterministic for fixed
// (dataset, params, mode, seed) regardless of worker count.
inline EvalReport evaluate(const Dataset& ds, Split split, const RelationParams& params,
                           const EvalOptions& opt) {
    const auto& split_quads = ds.split(split);
    if (split_quads.empty())
        throw DataError(ds.name + ": " + to_string(split) + " split is empty");

    const std::size_t num_canonical = ds.num_relations * 2;
    const auto plan = detail::QueryPlan::build(split_quads, ds.num_relations);

    // resolve hyperparameters for every queried relation up front
    std::vector<ScoreParams> relation_params(num_canonical);
    std::vector<bool> relation_used(num_canonical, false);
    for (const Query& q : plan.queries) {
        if (!relation_used[q.relation]) {
            const ScoreParams* p = params.find(q.relation);
            if (!p)
                throw ConfigError("no hyperparameters for relation " +
                                  std::to_string(forward_relation(q.relation, ds.num_relations)) +
                                  " (" + to_string(direction_of(q.relation, ds.num_relations)) +
                                  ") and no default given");
            relation_params[q.relation] = *p;
            relation_used[q.relation] = true;
        }
    }

    TemporalKG history;
    const auto insert_with_inverse = [&](const Quadruple& q) {
        history.insert(q);
        history.insert({q.o, inverse_relation(q.r, ds.num_relations), q.s, q.t});
    };
    for (const Quadruple& q : ds.train) insert_with_inverse(q);
    if (split == Split::test)
        for (const Quadruple& q : ds.valid) insert_with_inverse(q);

    detail::MetricAccum aggregate;
    std::map<RelationId, detail::MetricAccum> by_relation;
    std::vector<RankOutcome> outcomes;
    detail::RelaxedCache relaxed_cache;

    std::size_t batch_begin = 0;
    for (std::size_t batch = 0; batch < plan.batch_end.size(); ++batch) {
        const std::size_t batch_end = plan.batch_end[batch];
        const std::size_t batch_size = batch_end - batch_begin;
        const TimeIndex t_plus = plan.queries[plan.order[batch_begin]].target_t;

        detail::GoldIndex golds;
        detail::TimestepScorer scorer(history, t_plus, relaxed_cache);
        for (std::size_t i = batch_begin; i < batch_end; ++i) {
            const Query& q = plan.queries[plan.order[i]];
            golds.add(q.subject, q.relation, q.gold);
            const ScoreParams& p = relation_params[q.relation];
            if (p.alpha > 0.0) scorer.add_lambda(p.lambda);
            if (p.alpha < 1.0) scorer.add_relation(q.relation);
        }
        golds.finalize();

        outcomes.assign(batch_size, RankOutcome{});
        parallel_chunks(batch_size, opt.workers, [&](std::size_t chunk_begin, std::size_t chunk_end) {
            ScoreVector strict_buf, scores;
            for (std::size_t j = chunk_begin; j < chunk_end; ++j) {
                const std::uint32_t query_index = plan.order[batch_begin + j];
                const Query& q = plan.queries[query_index];
                scorer.score_into(q.subject, q.relation, relation_params[q.relation], strict_buf,
                                  scores);
                const auto excluded = golds.excluded_for(q.subject, q.relation, q.gold);
                SplitMix64 rng(derive_stream(opt.tie.seed, query_index));
                outcomes[j] = rank_gold(scores, q.gold, excluded, ds.num_entities, opt.tie, rng);
            }
        });

        for (std::size_t j = 0; j < batch_size; ++j) {
            const Query& q = plan.queries[plan.order[batch_begin + j]];
            aggregate.add(outcomes[j].rank);
            by_relation[q.relation].add(outcomes[j].rank);
        }

        if (opt.mode == Mode::single_step)
            for (const std::uint32_t quad_id : plan.batch_quads[batch])
                insert_with_inverse(split_quads[quad_id]);

        batch_begin = batch_end;
    }

    EvalReport report;
    report.dataset = ds.name;
    report.split = split;
    report.mode = opt.mode;
    report.tie = opt.tie;
    report.num_entities = ds.num_entities;
    report.aggregate = aggregate.row();
    for (const auto& [canonical, accum] : by_relation) {
        RelationRow row;
        row.relation_id = forward_relation(canonical, ds.num_relations);
        row.direction = direction_of(canonical, ds.num_relations);
        row.metrics = accum.row();
        report.per_relation.push_back(row);
    }
    std::sort(report.per_relation.begin(), report.per_relation.end(),
              [](const RelationRow& a, const RelationRow& b) {
                  if (a.relation_id != b.relation_id) return a.relation_id < b.relation_id;
                  return a.direction < b.direction;
              });
    return report;
}

}  // namespace tkgrb
