#pragma once

// Brute-force reference scorers that scan a raw quadruple list. They avoid
// TemporalKG and its indices entirely, so they can stand as independent
// oracles for the indexed implementation paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <tuple>
#include <vector>

#include "tkgrb/dataset.hpp"
#include "tkgrb/evaluation.hpp"
#include "tkgrb/rng.hpp"
#include "tkgrb/types.hpp"

namespace oracle {

using tkgrb::EntityId;
using tkgrb::Quadruple;
using tkgrb::RelationId;
using tkgrb::TimeIndex;

inline std::vector<TimeIndex> occurrences(const std::vector<Quadruple>& quads, EntityId s,
                                          RelationId r, EntityId o, TimeIndex before_t) {
    std::vector<TimeIndex> out;
    for (const Quadruple& q : quads)
        if (q.s == s && q.r == r && q.o == o && q.t < before_t) out.push_back(q.t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::set<EntityId> candidates(const std::vector<Quadruple>& quads, EntityId s,
                                     RelationId r) {
    std::set<EntityId> out;
    for (const Quadruple& q : quads)
        if (q.s == s && q.r == r) out.insert(q.o);
    return out;
}

template <typename WeightFn>
double phi_last(const std::vector<Quadruple>& quads, EntityId s, RelationId r, EntityId o,
                TimeIndex t_plus, WeightFn&& weight) {
    const auto times = occurrences(quads, s, r, o, t_plus);
    return times.empty() ? 0.0 : weight(t_plus, times.back());
}

template <typename WeightFn>
double psi_weighted(const std::vector<Quadruple>& quads, EntityId s, RelationId r, EntityId o,
                    TimeIndex t_plus, WeightFn&& weight) {
    if (quads.empty()) return 0.0;
    TimeIndex lo = std::numeric_limits<TimeIndex>::max();
    TimeIndex hi = std::numeric_limits<TimeIndex>::min();
    for (const Quadruple& q : quads) {
        lo = std::min(lo, q.t);
        hi = std::max(hi, q.t);
    }
    double denom = 0.0;
    for (TimeIndex i = lo; i <= hi; ++i) denom += weight(t_plus, i);
    double num = 0.0;
    for (const TimeIndex k : occurrences(quads, s, r, o, t_plus)) num += weight(t_plus, k);
    return denom > 0.0 ? num / denom : 0.0;
}

inline double psi_lambda(const std::vector<Quadruple>& quads, EntityId s, RelationId r, EntityId o,
                         TimeIndex t_plus, double lambda) {
    return psi_weighted(quads, s, r, o, t_plus, [lambda](TimeIndex t, TimeIndex k) {
        return std::exp2(lambda * static_cast<double>(k - t));
    });
}

inline double xi(const std::vector<Quadruple>& quads, RelationId r, EntityId o) {
    std::size_t num = 0, denom = 0;
    for (const Quadruple& q : quads) {
        if (q.r != r) continue;
        ++denom;
        if (q.o == o) ++num;
    }
    return denom == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(denom);
}

inline std::size_t occurrence_count(const std::vector<Quadruple>& quads, EntityId s, RelationId r,
                                    EntityId o, TimeIndex before_t) {
    return occurrences(quads, s, r, o, before_t).size();
}

inline TimeIndex last_occurrence(const std::vector<Quadruple>& quads, EntityId s, RelationId r,
                                 EntityId o, TimeIndex before_t) {
    const auto times = occurrences(quads, s, r, o, before_t);
    return times.empty() ? std::numeric_limits<TimeIndex>::min() : times.back();
}

// Expected rank of `gold` over dense per-entity scores, skipping excluded
// entities: 1 + #higher + #tied / 2.
inline double expected_rank(const std::vector<double>& scores_by_entity, EntityId gold,
                            const std::set<EntityId>& excluded) {
    const double g = scores_by_entity[gold];
    double higher = 0.0, tied = 0.0;
    for (std::size_t e = 0; e < scores_by_entity.size(); ++e) {
        if (e == gold || excluded.count(static_cast<EntityId>(e))) continue;
        if (scores_by_entity[e] > g) higher += 1.0;
        if (scores_by_entity[e] == g) tied += 1.0;
    }
    return higher + 1.0 + tied / 2.0;
}

// Dense, scan-based re-implementation of the full evaluation protocol with
// expected ties and one global (lambda, alpha). Quadratic in everything;
// tiny datasets only. rank_by_counts ranks by raw occurrence counts instead
// of the decayed score (the psi_1 ordering).
inline double evaluate_expected_mrr(const tkgrb::Dataset& ds, tkgrb::Split split, double lambda,
                                    double alpha, tkgrb::Mode mode, bool rank_by_counts = false) {
    using namespace tkgrb;
    std::vector<Quadruple> history;
    const auto add = [&](const Quadruple& q) {
        const Quadruple inv{q.o, inverse_relation(q.r, ds.num_relations), q.s, q.t};
        if (std::find(history.begin(), history.end(), q) == history.end()) history.push_back(q);
        if (std::find(history.begin(), history.end(), inv) == history.end())
            history.push_back(inv);
    };
    for (const Quadruple& q : ds.train) add(q);
    if (split == Split::test)
        for (const Quadruple& q : ds.valid) add(q);

    const auto& quads = ds.split(split);
    std::set<TimeIndex> timesteps;
    for (const Quadruple& q : quads) timesteps.insert(q.t);

    double rr_sum = 0.0;
    std::size_t count = 0;
    for (const TimeIndex t : timesteps) {
        std::vector<Query> queries;
        for (const Quadruple& q : quads) {
            if (q.t != t) continue;
            queries.push_back({q.s, q.r, q.o, t, Direction::tail});
            queries.push_back(
                {q.o, inverse_relation(q.r, ds.num_relations), q.s, t, Direction::head});
        }
        for (const Query& query : queries) {
            std::vector<double> scores(ds.num_entities, 0.0);
            for (std::size_t e = 0; e < ds.num_entities; ++e) {
                const EntityId entity = static_cast<EntityId>(e);
                if (rank_by_counts) {
                    scores[e] = static_cast<double>(
                        occurrence_count(history, query.subject, query.relation, entity, t));
                } else {
                    scores[e] =
                        alpha * psi_lambda(history, query.subject, query.relation, entity, t,
                                           lambda) +
                        (1.0 - alpha) * xi(history, query.relation, entity);
                }
            }
            std::set<EntityId> excluded;
            for (const Query& other : queries)
                if (other.subject == query.subject && other.relation == query.relation)
                    excluded.insert(other.gold);
            excluded.erase(query.gold);
            rr_sum += 1.0 / expected_rank(scores, query.gold, excluded);
            ++count;
        }
        if (mode == Mode::single_step)
            for (const Quadruple& q : quads)
                if (q.t == t) add(q);
    }
    return count == 0 ? 0.0 : rr_sum / static_cast<double>(count);
}

// Small random temporal KGs for the ranking-equivalence properties.
// Timesteps start at 1 so weightings like k stay strictly positive.
struct RandomKG {
    std::vector<Quadruple> quads;
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;
    TimeIndex t_plus = 0;
};

inline RandomKG random_kg(tkgrb::SplitMix64& rng) {
    RandomKG kg;
    kg.num_entities = 2 + rng.bounded(7);   // 2..8
    kg.num_relations = 1 + rng.bounded(3);  // 1..3
    const TimeIndex max_t = 1 + static_cast<TimeIndex>(rng.bounded(10));  // timesteps in [1, max_t]
    const std::size_t num_facts = 1 + rng.bounded(40);
    for (std::size_t i = 0; i < num_facts; ++i) {
        Quadruple q;
        q.s = static_cast<EntityId>(rng.bounded(kg.num_entities));
        q.r = static_cast<RelationId>(rng.bounded(kg.num_relations));
        q.o = static_cast<EntityId>(rng.bounded(kg.num_entities));
        q.t = 1 + static_cast<TimeIndex>(rng.bounded(static_cast<std::uint64_t>(max_t)));
        kg.quads.push_back(q);
    }
    std::sort(kg.quads.begin(), kg.quads.end(), [](const Quadruple& a, const Quadruple& b) {
        return std::tie(a.s, a.r, a.o, a.t) < std::tie(b.s, b.r, b.o, b.t);
    });
    kg.quads.erase(std::unique(kg.quads.begin(), kg.quads.end()), kg.quads.end());
    kg.t_plus = max_t + 1 + static_cast<TimeIndex>(rng.bounded(3));
    return kg;
}

}  // namespace oracle
