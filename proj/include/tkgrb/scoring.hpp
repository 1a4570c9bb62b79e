#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "tkgrb/temporal_kg.hpp"
#include "tkgrb/types.hpp"

namespace tkgrb {

// Recurrency scoring.
//
// Strict variants score a candidate object by its own past occurrences with
// the query's (subject, relation):
//   phi_last: weight of the most recent occurrence,
//   strict:   decayed occurrence sum normalised by the decayed horizon sum,
//             with decay 2^(lambda * (k - t+)).
// The relaxed variant scores by the relation-conditional object frequency,
// ignoring subject and time. The combined score mixes the two per relation:
//   alpha * strict + (1 - alpha) * relaxed.

struct ScoreEntry {
    EntityId entity;
    double score;

    friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

// Sparse score map, ascending by entity id. Absent entities score 0; stored
// scores are strictly positive and finite.
using ScoreVector = std::vector<ScoreEntry>;

inline double score_of(const ScoreVector& scores, EntityId e) {
    const auto it = std::lower_bound(
        scores.begin(), scores.end(), e,
        [](const ScoreEntry& entry, EntityId id) { return entry.entity < id; });
    return (it != scores.end() && it->entity == e) ? it->score : 0.0;
}

// Per-relation hyperparameters. Defaults are maximal decay with no relaxed
// mixing, i.e. pure most-recent-fact scoring.
struct ScoreParams {
    double lambda = 1.0001;
    double alpha = 1.0;

    friend bool operator==(const ScoreParams&, const ScoreParams&) = default;
};

// (lambda, alpha) per canonical relation id, covering forward and inverse
// ids, with an optional global fallback.
class RelationParams {
public:
    RelationParams() = default;
    explicit RelationParams(ScoreParams fallback) : fallback_(fallback) {}

    void set(RelationId r, ScoreParams p) { entries_[r] = p; }
    void set_fallback(ScoreParams p) { fallback_ = p; }

    const ScoreParams* find(RelationId r) const {
        const auto it = entries_.find(r);
        if (it != entries_.end()) return &it->second;
        return fallback_ ? &*fallback_ : nullptr;
    }

    ScoreParams require(RelationId r) const {
        if (const ScoreParams* p = find(r)) return *p;
        throw ConfigError("no hyperparameters for relation id " + std::to_string(r) +
                          " and no default given");
    }

    std::size_t size() const { return entries_.size(); }
    const std::unordered_map<RelationId, ScoreParams>& entries() const { return entries_; }
    const std::optional<ScoreParams>& fallback() const { return fallback_; }

    // Pins alpha for every relation (and the fallback); used for the pure
    // strict (alpha = 1) and pure relaxed (alpha = 0) evaluation rows.
    void force_alpha(double alpha) {
        for (auto& [r, p] : entries_) p.alpha = alpha;
        if (fallback_) fallback_->alpha = alpha;
    }

private:
    std::unordered_map<RelationId, ScoreParams> entries_;
    std::optional<ScoreParams> fallback_;
};

// 2^(lambda * (k - t+)), in (0, 1] for k < t+; decays towards 0 as the
// occurrence moves into the past, lambda = 0 weights all history equally.
inline double decay_weight(TimeIndex t_plus, TimeIndex k, double lambda) {
    if (k >= t_plus)
        throw std::invalid_argument("decay_weight requires k < t_plus");
    return std::exp2(lambda * static_cast<double>(k - t_plus));
}

// phi_Delta: each candidate object of (subject, relation) scores the weight
// of its most recent occurrence before t+. The weighting is pluggable so the
// ranking-equivalence properties can be exercised; it must be positive and
// strictly increasing in k.
template <typename WeightFn>
ScoreVector strict_score_last(const TemporalKG& kg, const Query& q, WeightFn&& weight) {
    ScoreVector out;
    const auto* objs = kg.object_occurrences(q.subject, q.relation);
    if (!objs) return out;
    for (const auto& [o, times] : *objs) {
        const auto it = std::lower_bound(times.begin(), times.end(), q.target_t);
        if (it == times.begin()) continue;  // never observed before t+
        const double w = weight(q.target_t, *std::prev(it));
        if (w > 0.0) out.push_back({o, w});
    }
    return out;
}

// psi_Delta with an arbitrary weighting: sum of weights of all occurrences
// before t+, divided by the weight sum over the full horizon
// [min_time, max_time]. Empty history yields an empty vector.
template <typename WeightFn>
ScoreVector strict_score_weighted(const TemporalKG& kg, const Query& q, WeightFn&& weight) {
    ScoreVector out;
    if (kg.empty()) return out;
    double denom = 0.0;
    for (TimeIndex i = kg.min_time(); i <= kg.max_time(); ++i)
        denom += weight(q.target_t, i);
    if (!(denom > 0.0)) return out;
    const auto* objs = kg.object_occurrences(q.subject, q.relation);
    if (!objs) return out;
    for (const auto& [o, times] : *objs) {
        double num = 0.0;
        for (const TimeIndex k : times) {
            if (k >= q.target_t) break;
            num += weight(q.target_t, k);
        }
        if (num > 0.0) out.push_back({o, num / denom});
    }
    return out;
}

// Decayed-horizon normalizer: sum of 2^(lambda * (i - t+)) over every
// timestep i in [min_time, max_time]. Candidate-independent, so it never
// changes a ranking; it does set the scale alpha mixes against.
inline double strict_denominator(const TemporalKG& kg, TimeIndex t_plus, double lambda) {
    if (kg.empty()) return 0.0;
    double denom = 0.0;
    for (TimeIndex i = kg.min_time(); i <= kg.max_time(); ++i)
        denom += std::exp2(lambda * static_cast<double>(i - t_plus));
    return denom;
}

// psi with exponential decay, denominator precomputed. Appends nothing when
// the denominator is not positive (empty history or total underflow).
inline void strict_score_into(const TemporalKG& kg, EntityId subject, RelationId relation,
                              TimeIndex t_plus, double lambda, double denom, ScoreVector& out) {
    out.clear();
    if (!(denom > 0.0)) return;
    const auto* objs = kg.object_occurrences(subject, relation);
    if (!objs) return;
    for (const auto& [o, times] : *objs) {
        double num = 0.0;
        for (const TimeIndex k : times) {
            if (k >= t_plus) break;
            num += std::exp2(lambda * static_cast<double>(k - t_plus));
        }
        if (num > 0.0) out.push_back({o, num / denom});
    }
}

// psi_{Delta_lambda}: the production strict score.
inline ScoreVector strict_score(const TemporalKG& kg, const Query& q, double lambda) {
    ScoreVector out;
    if (kg.empty()) return out;
    strict_score_into(kg, q.subject, q.relation, q.target_t, lambda,
                      strict_denominator(kg, q.target_t, lambda), out);
    return out;
}

// xi: relation-conditional object frequency. Independent of the query's
// subject and timestep; scores over observed objects sum to 1.
inline void relaxed_score_into(const TemporalKG& kg, RelationId relation, ScoreVector& out) {
    out.clear();
    const auto* counts = kg.object_counts(relation);
    const std::uint64_t total = kg.relation_count(relation);
    if (!counts || total == 0) return;
    out.reserve(counts->size());
    const double denom = static_cast<double>(total);
    for (const auto& [o, n] : *counts)
        out.push_back({o, static_cast<double>(n) / denom});
}

inline ScoreVector relaxed_score(const TemporalKG& kg, const Query& q) {
    ScoreVector out;
    relaxed_score_into(kg, q.relation, out);
    return out;
}

// Sparse merge of alpha * strict + (1 - alpha) * relaxed; entries that come
// out exactly zero (boundary alphas) are dropped.
inline void combine_into(const ScoreVector& strict_v, const ScoreVector& relaxed_v,
                         double alpha, ScoreVector& out) {
    out.clear();
    out.reserve(strict_v.size() + relaxed_v.size());
    const double beta = 1.0 - alpha;
    std::size_t i = 0, j = 0;
    while (i < strict_v.size() || j < relaxed_v.size()) {
        EntityId e;
        double value;
        if (j >= relaxed_v.size() ||
            (i < strict_v.size() && strict_v[i].entity < relaxed_v[j].entity)) {
            e = strict_v[i].entity;
            value = alpha * strict_v[i].score;
            ++i;
        } else if (i >= strict_v.size() || relaxed_v[j].entity < strict_v[i].entity) {
            e = relaxed_v[j].entity;
            value = beta * relaxed_v[j].score;
            ++j;
        } else {
            e = strict_v[i].entity;
            value = alpha * strict_v[i].score + beta * relaxed_v[j].score;
            ++i;
            ++j;
        }
        if (value > 0.0) out.push_back({e, value});
    }
}

// psi_Delta_xi: the combined recurrency score for one canonical query.
inline ScoreVector combined_score(const TemporalKG& kg, const Query& q,
                                  const RelationParams& params) {
    const ScoreParams p = params.require(q.relation);
    ScoreVector strict_v, relaxed_v, out;
    if (p.alpha > 0.0) strict_v = strict_score(kg, q, p.lambda);
    if (p.alpha < 1.0) relaxed_score_into(kg, q.relation, relaxed_v);
    combine_into(strict_v, relaxed_v, p.alpha, out);
    return out;
}

}  // namespace tkgrb
