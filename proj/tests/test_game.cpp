#include <doctest.h>

#include <cmath>

#include "hbi/game.hpp"
#include "hbi/rng.hpp"
#include "oracles.hpp"

using namespace hbi;

namespace {

template <class Fn>
ErrorCode thrown_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an hbi::Error");
    return ErrorCode::ConfigError;
}

} // namespace

TEST_CASE("additive games have zero pairwise interaction") {
    AdditiveGame game({1.0, 2.0, 3.0, 4.0});
    PlayerSet players{4, 2};
    InteractionEstimate est = exact_interaction(game, players, 0, 1);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.samples == 0);

    // sampled mode: every bracket is identically zero
    for (std::uint64_t seed : {0ull, 7ull, 12345ull}) {
        InteractionEstimate s = sampled_interaction(game, players, 0, 1, 1000, seed);
        CHECK(s.value == 0.0);
        CHECK(s.std_error == 0.0);
        CHECK(s.samples == 1000);
    }
}

TEST_CASE("unanimity game interaction equals one") {
    // phi = 1 iff {0,1} subset C: both coalitions over the leftover player
    // give bracket 1 + 0 - 0 - 0.
    UnanimityGame game(3, {0, 1});
    PlayerSet players{3, 1};
    InteractionEstimate est = exact_interaction(game, players, 0, 1);
    CHECK(est.value == 1.0);
    CHECK(oracle::naive_interaction(game, 3, 0, 1) == 1.0);

    InteractionEstimate s = sampled_interaction(game, players, 0, 1, 10, 99);
    CHECK(s.value == 1.0);
    CHECK(s.std_error == 0.0);
}

TEST_CASE("exact interaction matches the naive enumerator on random games") {
    TabulatedGame game = TabulatedGame::random_uniform(6, 42);
    PlayerSet players{6, 3};
    for (int i = 0; i < 3; ++i) {
        for (int j = 3; j < 6; ++j) {
            double expected = oracle::naive_interaction(game, 6, i, j);
            InteractionEstimate est = exact_interaction(game, players, i, j);
            CHECK(std::abs(est.value - expected) <= 1e-12);
        }
    }
}

TEST_CASE("exact interaction is exactly symmetric in the pair") {
    for (std::uint64_t seed : {3ull, 17ull, 91ull}) {
        TabulatedGame game = TabulatedGame::random_uniform(7, seed);
        PlayerSet players{7, 3};
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j)
                CHECK(exact_interaction(game, players, i, j).value ==
                      exact_interaction(game, players, j, i).value);
    }
}

TEST_CASE("interaction is linear in the characteristic function") {
    TabulatedGame g1 = TabulatedGame::random_uniform(6, 5);
    TabulatedGame g2 = TabulatedGame::random_uniform(6, 6);
    oracle::LinearCombination combo(2.5, g1, -0.75, g2);
    PlayerSet players{6, 2};
    for (int i = 0; i < 2; ++i) {
        for (int j = 2; j < 6; ++j) {
            double lhs = exact_interaction(combo, players, i, j).value;
            double rhs = 2.5 * exact_interaction(g1, players, i, j).value -
                         0.75 * exact_interaction(g2, players, i, j).value;
            CHECK(std::abs(lhs - rhs) <= 1e-10);
        }
    }
}

TEST_CASE("sampled interaction is close to exact on a random game") {
    TabulatedGame game = TabulatedGame::random_uniform(10, 7);
    PlayerSet players{10, 5};
    double exact = exact_interaction(game, players, 0, 5).value;
    InteractionEstimate est = sampled_interaction(game, players, 0, 5, 100000, 7);
    CHECK(est.std_error > 0.0);
    CHECK(std::abs(est.value - exact) <= 4.0 * est.std_error);
}

TEST_CASE("sampled interaction is deterministic across thread counts") {
    TabulatedGame game = TabulatedGame::random_uniform(9, 21);
    PlayerSet players{9, 4};
    InteractionEstimate serial = sampled_interaction(game, players, 1, 6, 5000, 11, 1);
    InteractionEstimate fourway = sampled_interaction(game, players, 1, 6, 5000, 11, 4);
    InteractionEstimate again = sampled_interaction(game, players, 1, 6, 5000, 11, 4);
    CHECK(serial.value == fourway.value);
    CHECK(serial.std_error == fourway.std_error);
    CHECK(fourway.value == again.value);
}

TEST_CASE("estimator calibration: 2 stderr covers the exact value >= 90% of runs") {
    TabulatedGame game = TabulatedGame::random_uniform(8, 33);
    PlayerSet players{8, 4};
    double exact = exact_interaction(game, players, 0, 4).value;
    int covered = 0;
    const int runs = 200;
    for (int r = 0; r < runs; ++r) {
        InteractionEstimate est =
            sampled_interaction(game, players, 0, 4, 10000, static_cast<std::uint64_t>(r) + 1);
        if (std::abs(est.value - exact) <= 2.0 * est.std_error) ++covered;
    }
    CHECK(covered >= 180);
}

TEST_CASE("interaction matrix: single cross-modal pair") {
    // phi({0,1}) = s, everything else 0; the only coalition is empty.
    double s = 0.625;
    TabulatedGame game(2, {0.0, 0.0, 0.0, s});
    PlayerSet players{2, 1};
    InteractionMap map = interaction_matrix(game, players, SamplingMode::Exact, 0, 0);
    REQUIRE(map.values.rows() == 1);
    REQUIRE(map.values.cols() == 1);
    CHECK(map.values(0, 0) == s);
}

TEST_CASE("interaction matrix of an additive game is zero") {
    AdditiveGame game({1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    PlayerSet players{6, 3};
    InteractionMap map = interaction_matrix(game, players, SamplingMode::Exact, 0, 0);
    CHECK(map.values.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("interaction matrix equals per-entry estimates in both modes") {
    TabulatedGame game = TabulatedGame::random_uniform(7, 13);
    PlayerSet players{7, 3};

    InteractionMap exact = interaction_matrix(game, players, SamplingMode::Exact, 0, 0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(std::abs(exact.values(a, b) - oracle::naive_interaction(game, 7, a, 3 + b)) <=
                  1e-12);

    InteractionMap one = interaction_matrix(game, players, SamplingMode::Sampled, 500, 9, 1);
    InteractionMap many = interaction_matrix(game, players, SamplingMode::Sampled, 500, 9, 4);
    CHECK((one.values.array() == many.values.array()).all());
}

TEST_CASE("interaction error cases") {
    AdditiveGame game({1.0, 2.0, 3.0});
    PlayerSet players{3, 1};
    CHECK(thrown_code([&] { exact_interaction(game, players, 1, 1); }) ==
          ErrorCode::IdenticalPlayers);
    CHECK(thrown_code([&] { exact_interaction(game, players, 0, 5); }) ==
          ErrorCode::PlayerOutOfRange);
    CHECK(thrown_code([&] { sampled_interaction(game, players, 0, 1, 0, 3); }) ==
          ErrorCode::ZeroSamples);

    AdditiveGame wide(std::vector<double>(30, 1.0));
    PlayerSet wide_players{30, 15};
    CHECK(thrown_code([&] { exact_interaction(wide, wide_players, 0, 16); }) ==
          ErrorCode::EnumerationTooLarge);
    // the cap is configurable in both directions
    AdditiveGame ten(std::vector<double>(10, 1.0));
    PlayerSet ten_players{10, 5};
    CHECK(thrown_code([&] { exact_interaction(ten, ten_players, 0, 5, 7); }) ==
          ErrorCode::EnumerationTooLarge);
    CHECK(exact_interaction(ten, ten_players, 0, 5, 8).value == 0.0);

    PlayerSet no_text{4, 4};
    CHECK(thrown_code([&] {
              interaction_matrix(game, no_text, SamplingMode::Exact, 0, 0);
          }) == ErrorCode::EmptyModality);
}
