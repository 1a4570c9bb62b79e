#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tkgrb/dataset.hpp"
#include "tkgrb/evaluation.hpp"
#include "tkgrb/parallel.hpp"
#include "tkgrb/rng.hpp"
#include "tkgrb/scoring.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

// Per-relation grid search by validation MRR: lambda first with the strict
// score alone, then alpha with lambda fixed, |L| + |A| settings per relation
// rather than a cross product. Relations tune independently; ties in MRR
// break toward the earliest grid entry.

struct LambdaGrid {
    std::vector<double> values;

    static LambdaGrid defaults() {
        return {{0.0, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.5, 0.9,
                 1.0001}};
    }
};

struct AlphaGrid {
    std::vector<double> values;

    static AlphaGrid defaults() {
        return {{0.0, 0.00001, 0.0001, 0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999,
                 1.0}};
    }
};

inline void validate_lambda_grid(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("lambda grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
            throw ConfigError("lambda grid values must be finite and >= 0");
        if (i > 0 && !(values[i - 1] < values[i]))
            throw ConfigError("lambda grid must be strictly ascending");
    }
}

inline void validate_alpha_grid(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("alpha grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw ConfigError("alpha grid values must lie in [0, 1]");
        if (i > 0 && !(values[i - 1] < values[i]))
            throw ConfigError("alpha grid must be strictly ascending");
    }
}

struct RelationTuning {
    RelationId relation_id = 0;  // forward id
    Direction direction = Direction::tail;
    double lambda = 0.0;
    double alpha = 0.0;
    double valid_mrr = std::numeric_limits<double>::quiet_NaN();  // NaN when count == 0
    std::uint64_t count = 0;  // validation queries for this relation-direction
};

struct TuningResult {
    RelationParams params;                    // entry per canonical id in [0, 2R)
    std::vector<RelationTuning> per_relation;  // sorted by (relation_id, tail < head)
    std::size_t settings_per_relation = 0;     // |L| + |A|
    std::uint64_t relations_tuned = 0;         // relation-directions with >= 1 validation query
};

struct TuneOptions {
    TieProtocol tie{TieKind::expected, 0};  // deterministic by default
    bool pool_directions = false;           // share one (lambda, alpha) across tail and head
    unsigned workers = 0;
};

namespace detail {

// Reusable per-thread buffers for grid scoring.
struct TuneScratch {
    ScoreVector strict_buf;
    ScoreVector scores;
    const ScoreVector empty;
};

// Walks the validation split in single-step mode over a train-only history.
// For every query, score_query fills one reciprocal rank per grid point into
// a slot array; slots are folded sequentially in (timestep, query) order, so
// results do not depend on the worker count.
template <typename Prewarm, typename ScoreQuery, typename Fold>
void walk_validation(const Dataset& ds, const QueryPlan& plan, std::size_t grid_size,
                     unsigned workers, Prewarm&& prewarm, ScoreQuery&& score_query, Fold&& fold) {
    TemporalKG history;
    const auto insert_with_inverse = [&](const Quadruple& q) {
        history.insert(q);
        history.insert({q.o, inverse_relation(q.r, ds.num_relations), q.s, q.t});
    };
    for (const Quadruple& q : ds.train) insert_with_inverse(q);

    std::vector<double> rr_slots;
    RelaxedCache relaxed_cache;
    std::size_t batch_begin = 0;
    for (std::size_t batch = 0; batch < plan.batch_end.size(); ++batch) {
        const std::size_t batch_end = plan.batch_end[batch];
        const std::size_t batch_size = batch_end - batch_begin;
        const TimeIndex t_plus = plan.queries[plan.order[batch_begin]].target_t;

        GoldIndex golds;
        for (std::size_t i = batch_begin; i < batch_end; ++i) {
            const Query& q = plan.queries[plan.order[i]];
            golds.add(q.subject, q.relation, q.gold);
        }
        golds.finalize();

        TimestepScorer scorer(history, t_plus, relaxed_cache);
        prewarm(scorer, batch_begin, batch_end);

        rr_slots.assign(batch_size * grid_size, 0.0);
        parallel_chunks(batch_size, workers, [&](std::size_t chunk_begin, std::size_t chunk_end) {
            TuneScratch scratch;
            for (std::size_t j = chunk_begin; j < chunk_end; ++j) {
                const std::uint32_t query_index = plan.order[batch_begin + j];
                const Query& q = plan.queries[query_index];
                const auto excluded = golds.excluded_for(q.subject, q.relation, q.gold);
                score_query(scorer, q, query_index, excluded, scratch, &rr_slots[j * grid_size]);
            }
        });

        for (std::size_t j = 0; j < batch_size; ++j)
            fold(plan.queries[plan.order[batch_begin + j]], &rr_slots[j * grid_size]);

        for (const std::uint32_t quad_id : plan.batch_quads[batch])
            insert_with_inverse(ds.valid[quad_id]);

        batch_begin = batch_end;
    }
}

// earliest index attaining the maximum sum
inline std::size_t argmax_earliest(const double* sums, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < n; ++g)
        if (sums[g] > sums[best]) best = g;
    return best;
}

}  // namespace detail

inline TuningResult tune(const Dataset& ds, const LambdaGrid& lambda_grid,
                         const AlphaGrid& alpha_grid, const TuneOptions& opt) {
    validate_lambda_grid(lambda_grid.values);
    validate_alpha_grid(alpha_grid.values);
    if (ds.valid.empty()) throw DataError(ds.name + ": validation split is empty, cannot tune");

    const std::size_t num_canonical = ds.num_relations * 2;
    const std::size_t num_lambda = lambda_grid.values.size();
    const std::size_t num_alpha = alpha_grid.values.size();
    const auto plan = detail::QueryPlan::build(ds.valid, ds.num_relations);

    // canonical id -> accumulator bucket (forward id when pooling directions)
    const auto bucket_of = [&](RelationId canonical) {
        return opt.pool_directions ? forward_relation(canonical, ds.num_relations) : canonical;
    };

    std::vector<std::uint64_t> count_canonical(num_canonical, 0);
    std::vector<std::uint64_t> count_bucket(num_canonical, 0);

    // ---- pass 1: lambda with the strict score alone (alpha = 1) ----
    std::vector<double> lambda_rr(num_canonical * num_lambda, 0.0);
    detail::walk_validation(
        ds, plan, num_lambda, opt.workers,
        [&](detail::TimestepScorer& scorer, std::size_t, std::size_t) {
            for (const double lambda : lambda_grid.values) scorer.add_lambda(lambda);
        },
        [&](const detail::TimestepScorer& scorer, const Query& q, std::uint32_t query_index,
            const std::vector<EntityId>& excluded, detail::TuneScratch& scratch, double* rr_out) {
            for (std::size_t g = 0; g < num_lambda; ++g) {
                scorer.strict_into(q.subject, q.relation, lambda_grid.values[g], scratch.scores);
                SplitMix64 rng(derive_stream(opt.tie.seed, query_index, (1ull << 32) | g));
                rr_out[g] = 1.0 / rank_gold(scratch.scores, q.gold, excluded, ds.num_entities,
                                            opt.tie, rng)
                                      .rank;
            }
        },
        [&](const Query& q, const double* rr) {
            const RelationId bucket = bucket_of(q.relation);
            ++count_canonical[q.relation];
            ++count_bucket[bucket];
            for (std::size_t g = 0; g < num_lambda; ++g)
                lambda_rr[bucket * num_lambda + g] += rr[g];
        });

    std::vector<double> chosen_lambda(num_canonical, ScoreParams{}.lambda);
    for (std::size_t b = 0; b < num_canonical; ++b) {
        if (count_bucket[b] == 0) continue;
        chosen_lambda[b] =
            lambda_grid.values[detail::argmax_earliest(&lambda_rr[b * num_lambda], num_lambda)];
    }

    // ---- pass 2: alpha with the chosen lambda fixed ----
    const bool need_relaxed =
        !alpha_grid.values.empty() && alpha_grid.values.front() < 1.0;
    std::vector<double> alpha_rr(num_canonical * num_alpha, 0.0);
    detail::walk_validation(
        ds, plan, num_alpha, opt.workers,
        [&](detail::TimestepScorer& scorer, std::size_t batch_begin, std::size_t batch_end) {
            for (std::size_t i = batch_begin; i < batch_end; ++i) {
                const Query& q = plan.queries[plan.order[i]];
                scorer.add_lambda(chosen_lambda[bucket_of(q.relation)]);
                if (need_relaxed) scorer.add_relation(q.relation);
            }
        },
        [&](const detail::TimestepScorer& scorer, const Query& q, std::uint32_t query_index,
            const std::vector<EntityId>& excluded, detail::TuneScratch& scratch, double* rr_out) {
            scorer.strict_into(q.subject, q.relation, chosen_lambda[bucket_of(q.relation)],
                               scratch.strict_buf);
            const ScoreVector& relaxed =
                need_relaxed ? scorer.relaxed(q.relation) : scratch.empty;
            for (std::size_t g = 0; g < num_alpha; ++g) {
                combine_into(scratch.strict_buf, relaxed, alpha_grid.values[g], scratch.scores);
                SplitMix64 rng(derive_stream(opt.tie.seed, query_index, (2ull << 32) | g));
                rr_out[g] = 1.0 / rank_gold(scratch.scores, q.gold, excluded, ds.num_entities,
                                            opt.tie, rng)
                                      .rank;
            }
        },
        [&](const Query& q, const double* rr) {
            const RelationId bucket = bucket_of(q.relation);
            for (std::size_t g = 0; g < num_alpha; ++g)
                alpha_rr[bucket * num_alpha + g] += rr[g];
        });

    TuningResult result;
    result.settings_per_relation = num_lambda + num_alpha;
    result.per_relation.reserve(num_canonical);
    for (RelationId forward = 0; forward < ds.num_relations; ++forward) {
        for (const Direction dir : {Direction::tail, Direction::head}) {
            const RelationId canonical =
                dir == Direction::tail ? forward
                                       : inverse_relation(forward, ds.num_relations);
            const RelationId bucket = bucket_of(canonical);
            RelationTuning row;
            row.relation_id = forward;
            row.direction = dir;
            row.count = count_canonical[canonical];
            ScoreParams params;  // defaults for relations absent from validation
            if (count_bucket[bucket] > 0) {
                const std::size_t alpha_idx =
                    detail::argmax_earliest(&alpha_rr[bucket * num_alpha], num_alpha);
                params.lambda = chosen_lambda[bucket];
                params.alpha = alpha_grid.values[alpha_idx];
                row.valid_mrr = alpha_rr[bucket * num_alpha + alpha_idx] /
                                static_cast<double>(count_bucket[bucket]);
                ++result.relations_tuned;
            }
            row.lambda = params.lambda;
            row.alpha = params.alpha;
            result.params.set(canonical, params);
            result.per_relation.push_back(row);
        }
    }
    return result;
}

// One full test evaluation per (lambda, alpha) pair applied globally to all
// relations; reproduces the sensitivity tables.
struct SweepRow {
    double lambda = 0.0;
    double alpha = 0.0;
    Mode mode = Mode::single_step;
    MetricRow aggregate;
};

inline std::vector<SweepRow> sweep_fixed(const Dataset& ds, const std::vector<double>& lambdas,
                                         const std::vector<double>& alphas,
                                         const EvalOptions& opt) {
    for (const double lambda : lambdas)
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw ConfigError("sweep lambda values must be finite and >= 0");
    for (const double alpha : alphas)
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw ConfigError("sweep alpha values must lie in [0, 1]");

    std::vector<SweepRow> rows;
    rows.reserve(lambdas.size() * alphas.size());
    for (const double lambda : lambdas) {
        for (const double alpha : alphas) {
            const RelationParams params{ScoreParams{lambda, alpha}};
            SweepRow row;
            row.lambda = lambda;
            row.alpha = alpha;
            row.mode = opt.mode;
            row.aggregate = evaluate(ds, Split::test, params, opt).aggregate;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace tkgrb
