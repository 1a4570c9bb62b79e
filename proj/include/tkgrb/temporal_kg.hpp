#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "tkgrb/types.hpp"

namespace tkgrb {

// Append-only indexed store of timestamped facts.
//
// Indices kept alongside the fact list:
//   (s, r) -> o -> strictly ascending timestep list   (strict scoring)
//   r -> o -> quadruple count, r -> total count       (relaxed scoring)
//   min/max timestep present                          (normalization horizon)
//
// Concurrency contract: reads are safe from any number of threads while no
// insert runs. Evaluation freezes the store for the duration of a timestep
// and extends it from a single thread between timesteps.
class TemporalKG {
public:
    using TimeList = std::vector<TimeIndex>;
    using ObjectOccurrences = std::map<EntityId, TimeList>;
    using ObjectCounts = std::map<EntityId, std::uint64_t>;

    // Inserts q unless already present; inserting a duplicate is a no-op.
    // Returns true when the store changed.
    bool insert(const Quadruple& q) {
        auto& times = occ_[key(q.s, q.r)][q.o];
        const auto it = std::lower_bound(times.begin(), times.end(), q.t);
        if (it != times.end() && *it == q.t) return false;
        times.insert(it, q.t);
        quads_.push_back(q);
        rel_obj_count_[q.r][q.o] += 1;
        rel_count_[q.r] += 1;
        min_t_ = std::min(min_t_, q.t);
        max_t_ = std::max(max_t_, q.t);
        return true;
    }

    template <typename Range>
    void insert_all(const Range& quads) {
        for (const auto& q : quads) insert(q);
    }

    bool contains(const Quadruple& q) const {
        const TimeList* times = occurrence_list(q.s, q.r, q.o);
        return times && std::binary_search(times->begin(), times->end(), q.t);
    }

    // All k < before_t with (s, r, o, k) in the store, ascending.
    TimeList occurrences(EntityId s, RelationId r, EntityId o, TimeIndex before_t) const {
        const TimeList* times = occurrence_list(s, r, o);
        if (!times) return {};
        const auto end = std::lower_bound(times->begin(), times->end(), before_t);
        return TimeList(times->begin(), end);
    }

    // Objects ever observed with (s, r); ascending, duplicate-free.
    std::vector<EntityId> candidates(EntityId s, RelationId r) const {
        std::vector<EntityId> out;
        if (const ObjectOccurrences* objs = object_occurrences(s, r)) {
            out.reserve(objs->size());
            for (const auto& [o, times] : *objs) out.push_back(o);
        }
        return out;
    }

    // nullptr when (s, r) was never observed.
    const ObjectOccurrences* object_occurrences(EntityId s, RelationId r) const {
        const auto it = occ_.find(key(s, r));
        return it == occ_.end() ? nullptr : &it->second;
    }

    const TimeList* occurrence_list(EntityId s, RelationId r, EntityId o) const {
        const ObjectOccurrences* objs = object_occurrences(s, r);
        if (!objs) return nullptr;
        const auto it = objs->find(o);
        return it == objs->end() ? nullptr : &it->second;
    }

    // nullptr when relation r has no facts.
    const ObjectCounts* object_counts(RelationId r) const {
        const auto it = rel_obj_count_.find(r);
        return it == rel_obj_count_.end() ? nullptr : &it->second;
    }

    std::uint64_t relation_count(RelationId r) const {
        const auto it = rel_count_.find(r);
        return it == rel_count_.end() ? 0 : it->second;
    }

    bool empty() const { return quads_.empty(); }
    std::size_t size() const { return quads_.size(); }

    // Smallest / largest timestep present. Only meaningful when !empty().
    TimeIndex min_time() const { return min_t_; }
    TimeIndex max_time() const { return max_t_; }

    // Insertion order; content equals the index structures (rebuild checks).
    const std::vector<Quadruple>& quadruples() const { return quads_; }

    // Index equality: two stores compare equal iff they hold the same fact
    // set, regardless of insertion order.
    friend bool operator==(const TemporalKG& a, const TemporalKG& b) {
        return a.quads_.size() == b.quads_.size() && a.min_t_ == b.min_t_ &&
               a.max_t_ == b.max_t_ && a.rel_count_ == b.rel_count_ &&
               a.rel_obj_count_ == b.rel_obj_count_ && a.occ_ == b.occ_;
    }

private:
    static std::uint64_t key(EntityId s, RelationId r) {
        return (static_cast<std::uint64_t>(s) << 32) | r;
    }

    std::vector<Quadruple> quads_;
    std::unordered_map<std::uint64_t, ObjectOccurrences> occ_;
    std::unordered_map<RelationId, ObjectCounts> rel_obj_count_;
    std::unordered_map<RelationId, std::uint64_t> rel_count_;
    TimeIndex min_t_ = std::numeric_limits<TimeIndex>::max();
    TimeIndex max_t_ = std::numeric_limits<TimeIndex>::min();
};

}  // namespace tkgrb
