#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "tkgrb/scoring.hpp"
#include "tkgrb/temporal_kg.hpp"

using namespace tkgrb;

namespace {

constexpr auto kLinearWeight = [](TimeIndex t_plus, TimeIndex k) {
    return static_cast<double>(k) / static_cast<double>(t_plus);
};

TemporalKG club_kg() {
    TemporalKG kg;
    kg.insert_all(synthetic::club_history());
    return kg;
}

TemporalKG league_kg() {
    TemporalKG kg;
    kg.insert_all(synthetic::league_history());
    return kg;
}

// inverse view of the league: (league, won-by, club, t), so one query ranks
// all five clubs at once
TemporalKG league_inverse_kg() {
    TemporalKG kg;
    for (const Quadruple& q : synthetic::league_history()) kg.insert({q.o, 1, q.s, q.t});
    return kg;
}

void check_entry(const ScoreVector& scores, EntityId e, double expected) {
    REQUIRE(score_of(scores, e) == Catch::Approx(expected).margin(1e-9));
}

}  // namespace

TEST_CASE("decay weight") {
    REQUIRE(decay_weight(10, 3, 0.0) == 1.0);
    REQUIRE(decay_weight(10, 9, 1.0) == 0.5);
    REQUIRE(decay_weight(10, 0, 0.04) ==
            Catch::Approx(0.757858283255199).margin(1e-12));  // 2^-0.4
    REQUIRE_THROWS_AS(decay_weight(10, 10, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(decay_weight(10, 11, 1.0), std::invalid_argument);
}

TEST_CASE("last-occurrence scores on the club history") {
    const TemporalKG kg = club_kg();
    const Query q{0, 0, 4, 10, Direction::tail};

    const ScoreVector linear = strict_score_last(kg, q, kLinearWeight);
    REQUIRE(linear.size() == 4);
    check_entry(linear, 1, 0.2);
    check_entry(linear, 2, 0.4);
    check_entry(linear, 3, 0.8);
    check_entry(linear, 4, 0.9);

    const ScoreVector flat = strict_score_last(kg, q, [](TimeIndex, TimeIndex) { return 1.0; });
    REQUIRE(flat.size() == 4);
    for (const ScoreEntry& e : flat) REQUIRE(e.score == 1.0);
}

TEST_CASE("last-occurrence score of an empty history is empty") {
    const TemporalKG kg;
    REQUIRE(strict_score_last(kg, Query{0, 0, 0, 5, Direction::tail}, kLinearWeight).empty());
}

TEST_CASE("normalised strict scores reproduce the league example") {
    // per-club queries: each candidate vector holds the league entity only
    const TemporalKG kg = league_kg();
    const auto psi = [&](EntityId club) {
        return score_of(strict_score_weighted(kg, Query{club, 0, 5, 10, Direction::tail},
                                              kLinearWeight),
                        5);
    };
    REQUIRE(psi(0) == Catch::Approx(2.3 / 4.5).margin(1e-9));  // frequent winner
    REQUIRE(psi(1) == Catch::Approx(0.2 / 4.5).margin(1e-9));
    REQUIRE(psi(2) == Catch::Approx(0.4 / 4.5).margin(1e-9));
    REQUIRE(psi(3) == Catch::Approx(0.7 / 4.5).margin(1e-9));
    REQUIRE(psi(4) == Catch::Approx(0.9 / 4.5).margin(1e-9));

    // inverse view: one query, all five clubs as candidates
    const TemporalKG inv = league_inverse_kg();
    const ScoreVector all =
        strict_score_weighted(inv, Query{5, 1, 0, 10, Direction::head}, kLinearWeight);
    REQUIRE(all.size() == 5);
    check_entry(all, 0, 23.0 / 45.0);
    check_entry(all, 1, 2.0 / 45.0);
    check_entry(all, 2, 4.0 / 45.0);
    check_entry(all, 3, 7.0 / 45.0);
    check_entry(all, 4, 9.0 / 45.0);
}

TEST_CASE("lambda 0 reduces to occurrence counts over the horizon") {
    const TemporalKG inv = league_inverse_kg();
    const ScoreVector scores = strict_score(inv, Query{5, 1, 0, 10, Direction::head}, 0.0);
    check_entry(scores, 0, 5.0 / 9.0);
    check_entry(scores, 1, 1.0 / 9.0);
    check_entry(scores, 2, 1.0 / 9.0);
    check_entry(scores, 3, 1.0 / 9.0);
    check_entry(scores, 4, 1.0 / 9.0);
}

TEST_CASE("strict score of an empty history is empty") {
    const TemporalKG kg;
    REQUIRE(strict_score(kg, Query{0, 0, 0, 5, Direction::tail}, 0.1).empty());
}

TEST_CASE("never-observed candidates stay implicit") {
    const TemporalKG kg = club_kg();
    const ScoreVector scores = strict_score(kg, Query{0, 0, 4, 10, Direction::tail}, 0.1);
    REQUIRE(score_of(scores, 5) == 0.0);
    REQUIRE(scores.size() == 4);
}

TEST_CASE("relaxed score is the relation-conditional object frequency") {
    const TemporalKG kg = club_kg();
    // subject 5 never appears; xi ignores the subject entirely
    const ScoreVector scores = relaxed_score(kg, Query{5, 0, 3, 10, Direction::tail});
    REQUIRE(scores.size() == 4);
    check_entry(scores, 1, 2.0 / 9.0);
    check_entry(scores, 2, 2.0 / 9.0);
    check_entry(scores, 3, 4.0 / 9.0);
    check_entry(scores, 4, 1.0 / 9.0);
}

TEST_CASE("relaxed score on a single-quadruple relation") {
    TemporalKG kg;
    kg.insert({0, 3, 7, 2});
    const ScoreVector scores = relaxed_score(kg, Query{9, 3, 7, 5, Direction::tail});
    REQUIRE(scores.size() == 1);
    check_entry(scores, 7, 1.0);

    REQUIRE(relaxed_score(kg, Query{9, 4, 7, 5, Direction::tail}).empty());  // unused relation
}

TEST_CASE("relaxed numerator counts quadruples, not subjects") {
    TemporalKG kg;
    kg.insert({0, 0, 7, 1});
    kg.insert({1, 0, 7, 2});
    kg.insert({0, 0, 8, 3});
    const ScoreVector scores = relaxed_score(kg, Query{2, 0, 7, 5, Direction::tail});
    check_entry(scores, 7, 2.0 / 3.0);
    check_entry(scores, 8, 1.0 / 3.0);
}

TEST_CASE("combined score boundaries collapse to the parts") {
    const TemporalKG kg = club_kg();
    const Query q{0, 0, 3, 10, Direction::tail};

    RelationParams strict_only{ScoreParams{0.04, 1.0}};
    REQUIRE(combined_score(kg, q, strict_only) == strict_score(kg, q, 0.04));

    RelationParams relaxed_only{ScoreParams{0.04, 0.0}};
    REQUIRE(combined_score(kg, q, relaxed_only) == relaxed_score(kg, q));
}

TEST_CASE("combined score of an unseen subject is the scaled relaxed score") {
    const TemporalKG kg = club_kg();
    const Query q{5, 0, 3, 10, Direction::tail};
    RelationParams params{ScoreParams{0.5, 0.5}};
    const ScoreVector scores = combined_score(kg, q, params);
    REQUIRE(scores.size() == 4);
    check_entry(scores, 3, 0.5 * 4.0 / 9.0);  // 0.222...
    check_entry(scores, 1, 0.5 * 2.0 / 9.0);
    check_entry(scores, 2, 0.5 * 2.0 / 9.0);
    check_entry(scores, 4, 0.5 * 1.0 / 9.0);
}

TEST_CASE("relation params fall back and fail loudly") {
    RelationParams params;
    params.set(2, {0.1, 0.9});
    REQUIRE(params.require(2) == ScoreParams{0.1, 0.9});
    REQUIRE_THROWS_AS(params.require(3), ConfigError);
    params.set_fallback({0.0, 1.0});
    REQUIRE(params.require(3) == ScoreParams{0.0, 1.0});
}

TEST_CASE("relaxed scores sum to one") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const auto generated = oracle::random_kg(rng);
        TemporalKG kg;
        kg.insert_all(generated.quads);
        for (std::size_t r = 0; r < generated.num_relations; ++r) {
            const RelationId rel = static_cast<RelationId>(r);
            if (kg.relation_count(rel) == 0) continue;
            double sum = 0.0;
            for (const ScoreEntry& e :
                 relaxed_score(kg, Query{0, rel, 0, generated.t_plus, Direction::tail}))
                sum += e.score;
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("scaling the denominator never reorders candidates") {
    SplitMix64 rng(505);
    for (int trial = 0; trial < 30; ++trial) {
        const auto generated = oracle::random_kg(rng);
        TemporalKG kg;
        kg.insert_all(generated.quads);
        for (const Quadruple& q : generated.quads) {
            const ScoreVector base =
                strict_score(kg, Query{q.s, q.r, q.o, generated.t_plus, Direction::tail}, 0.1);
            for (const double scale : {0.25, 3.0, 1e6}) {
                for (std::size_t i = 0; i < base.size(); ++i) {
                    for (std::size_t j = 0; j < base.size(); ++j) {
                        const bool raw_less = base[i].score < base[j].score;
                        const bool scaled_less = base[i].score / scale < base[j].score / scale;
                        REQUIRE(raw_less == scaled_less);
                    }
                }
            }
        }
    }
}

TEST_CASE("moving an occurrence later raises the decayed score only") {
    TemporalKG early, late;
    // horizon pinned by an unrelated relation so both stores share min/max
    for (TemporalKG* kg : {&early, &late}) {
        kg->insert({9, 1, 9, 1});
        kg->insert({9, 1, 9, 9});
        kg->insert({0, 0, 1, 2});
    }
    early.insert({0, 0, 1, 5});
    late.insert({0, 0, 1, 6});

    const Query q{0, 0, 1, 10, Direction::tail};
    for (const double lambda : {0.01, 0.1, 0.9, 1.0001}) {
        REQUIRE(score_of(strict_score(late, q, lambda), 1) >
                score_of(strict_score(early, q, lambda), 1));
    }
    REQUIRE(score_of(strict_score(late, q, 0.0), 1) == score_of(strict_score(early, q, 0.0), 1));
}

TEST_CASE("weighted strict hook agrees with the decayed production path") {
    SplitMix64 rng(606);
    for (int trial = 0; trial < 20; ++trial) {
        const auto generated = oracle::random_kg(rng);
        TemporalKG kg;
        kg.insert_all(generated.quads);
        for (const double lambda : {0.0, 0.04, 1.0001}) {
            for (const Quadruple& q : generated.quads) {
                const Query query{q.s, q.r, q.o, generated.t_plus, Direction::tail};
                const ScoreVector fast = strict_score(kg, query, lambda);
                const ScoreVector hook =
                    strict_score_weighted(kg, query, [lambda](TimeIndex t, TimeIndex k) {
                        return std::exp2(lambda * static_cast<double>(k - t));
                    });
                REQUIRE(fast.size() == hook.size());
                for (std::size_t i = 0; i < fast.size(); ++i) {
                    REQUIRE(fast[i].entity == hook[i].entity);
                    REQUIRE(fast[i].score == Catch::Approx(hook[i].score).margin(1e-12));
                }
            }
        }
    }
}
