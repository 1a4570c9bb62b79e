#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tkgrb {

// Dense vocabulary indices. Relation ids in [0, num_rels) are forward
// relations; ids in [num_rels, 2*num_rels) are their inverses.
using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Dense timestep index. Signed so that previous-timestep checks at t = 0
// stay well-defined.
using TimeIndex = std::int64_t;

struct Quadruple {
    EntityId s = 0;
    RelationId r = 0;
    EntityId o = 0;
    TimeIndex t = 0;

    friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

enum class Direction { tail, head };

inline const char* to_string(Direction d) {
    return d == Direction::tail ? "tail" : "head";
}

constexpr RelationId inverse_relation(RelationId r, std::size_t num_rels) {
    return r < num_rels ? r + static_cast<RelationId>(num_rels)
                        : r - static_cast<RelationId>(num_rels);
}

constexpr bool is_inverse(RelationId r, std::size_t num_rels) {
    return r >= num_rels;
}

// Forward id of a possibly-inverse relation id.
constexpr RelationId forward_relation(RelationId r, std::size_t num_rels) {
    return is_inverse(r, num_rels) ? r - static_cast<RelationId>(num_rels) : r;
}

constexpr Direction direction_of(RelationId r, std::size_t num_rels) {
    return is_inverse(r, num_rels) ? Direction::head : Direction::tail;
}

// A prediction task in canonical tail form. A head query (?, r, o, t+) is
// stored as (o, r^-1, ?, t+) with origin = head, so one scoring path covers
// both directions.
struct Query {
    EntityId subject = 0;
    RelationId relation = 0;
    EntityId gold = 0;
    TimeIndex target_t = 0;
    Direction origin = Direction::tail;
};

// Bad run configuration (missing params, invalid grid, ...). CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tkgrb
