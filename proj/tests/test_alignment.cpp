#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hbi/alignment.hpp"
#include "hbi/rng.hpp"
#include "oracles.hpp"

using namespace hbi;

namespace {

FeatureMatrix features(Matrix data, Modality modality = Modality::Video) {
    FeatureMatrix f;
    f.data = std::move(data);
    f.modality = modality;
    return f;
}

Matrix random_rows(int rows, int cols, std::uint64_t seed, bool unit = true) {
    SplitMix64 rng(derive_stream(seed, 0));
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
        if (unit) m.row(r) /= m.row(r).norm();
    }
    return m;
}

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

TEST_CASE("alignment matrix: cosine of identical and orthogonal rows") {
    Matrix v(2, 4);
    v << 1, 0, 0, 0, 0, 0.5, 0.5, 0;
    Matrix t(2, 4);
    t << 1, 0, 0, 0, 0, 0, 0, 2;
    Matrix a = alignment_matrix(features(v), features(t, Modality::Text));
    CHECK(std::abs(a(0, 0) - 1.0) <= 1e-12); // identical unit vectors
    CHECK(a(0, 1) == 0.0);                   // disjoint support
    CHECK(a(1, 1) == 0.0);
    CHECK((a.array().abs() <= 1.0 + 1e-12).all());
}

TEST_CASE("alignment matrix matches the naive cosine oracle") {
    Matrix v = random_rows(3, 4, 1, false);
    Matrix t = random_rows(2, 4, 2, false);
    Matrix a = alignment_matrix(features(v), features(t, Modality::Text));
    Matrix expected = oracle::naive_cosine(v, t);
    CHECK((a - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("alignment matrix error cases") {
    Matrix v = random_rows(2, 4, 3);
    Matrix t5 = random_rows(2, 5, 4);
    CHECK(thrown_code([&] { alignment_matrix(features(v), features(t5, Modality::Text)); }) ==
          ErrorCode::DimMismatch);
    Matrix zero = v;
    zero.row(1).setZero();
    CHECK(thrown_code([&] { alignment_matrix(features(zero), features(v, Modality::Text)); }) ==
          ErrorCode::ZeroNormRow);
}

TEST_CASE("similarity score: single identical pair scores one") {
    Matrix v(1, 3);
    v << 0.6, 0.8, 0.0;
    SimilarityGame game = SimilarityGame::with_uniform_weights(features(v), features(v, Modality::Text));
    CHECK(std::abs(similarity_score(game) - 1.0) <= 1e-12);
}

TEST_CASE("similarity score reproduces a hand-computed alignment matrix") {
    // Rows built so the cosine matrix is exactly [[0.2, 0.8], [0.6, 0.4]]:
    // S = ((0.8 + 0.6)/2 + (0.6 + 0.8)/2) / 2 = 0.7.
    Matrix t(2, 4);
    t << 1, 0, 0, 0, 0, 1, 0, 0;
    Matrix v(2, 4);
    v << 0.2, 0.8, std::sqrt(1.0 - 0.68), 0.0, 0.6, 0.4, 0.0, std::sqrt(1.0 - 0.52);
    SimilarityGame game = SimilarityGame::with_uniform_weights(features(v), features(t, Modality::Text));
    CHECK(std::abs(similarity_score(game) - 0.7) <= 1e-12);
}

TEST_CASE("similarity score is invariant under joint row/weight permutation") {
    SplitMix64 rng(77);
    Matrix v = random_rows(5, 6, 10);
    Matrix t = random_rows(4, 6, 11);
    Vector wv(5);
    wv << 0.1, 0.3, 0.2, 0.25, 0.15;
    Vector wt = Vector::Constant(4, 0.25);

    SimilarityGame game;
    game.video = features(v);
    game.text = features(t, Modality::Text);
    game.weights_video = wv;
    game.weights_text = wt;
    double base = similarity_score(game);

    std::vector<int> perm{4, 2, 0, 1, 3};
    Matrix pv(5, 6);
    Vector pwv(5);
    for (int r = 0; r < 5; ++r) {
        pv.row(r) = v.row(perm[static_cast<std::size_t>(r)]);
        pwv[r] = wv[perm[static_cast<std::size_t>(r)]];
    }
    game.video = features(pv);
    game.weights_video = pwv;
    CHECK(std::abs(similarity_score(game) - base) <= 1e-12);
}

TEST_CASE("cosine similarity is scale invariant") {
    Matrix v = random_rows(3, 5, 20, false);
    Matrix t = random_rows(4, 5, 21, false);
    Matrix base = alignment_matrix(features(v), features(t, Modality::Text));
    Matrix scaled_v = v;
    scaled_v.row(1) *= 37.5;
    Matrix scaled_t = t;
    scaled_t.row(2) *= 0.004;
    Matrix changed = alignment_matrix(features(scaled_v), features(scaled_t, Modality::Text));
    CHECK((base - changed).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("coalition similarity enforces the zero axiom exactly") {
    SimilarityGame game = SimilarityGame::with_uniform_weights(
        features(random_rows(4, 8, 30)), features(random_rows(6, 8, 31), Modality::Text));
    PlayerSet players = game.players();

    Coalition empty(players.n);
    CHECK(coalition_similarity(game, empty) == 0.0);

    Coalition video_only(players.n, {0, 1, 3});
    CHECK(coalition_similarity(game, video_only) == 0.0);

    Coalition text_only(players.n, {4, 7, 9});
    CHECK(coalition_similarity(game, text_only) == 0.0);

    // randomized single-modality coalitions
    SplitMix64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Coalition c(players.n);
        bool video_side = (rng.next() & 1) != 0;
        int lo = video_side ? 0 : players.modality_split;
        int hi = video_side ? players.modality_split : players.n;
        for (int p = lo; p < hi; ++p)
            if (rng.next() & 1) c.set(p);
        CHECK(coalition_similarity(game, c) == 0.0);
    }
}

TEST_CASE("coalition of one video and one text row scores their cosine") {
    SimilarityGame game = SimilarityGame::with_uniform_weights(
        features(random_rows(3, 6, 40)), features(random_rows(5, 6, 41), Modality::Text));
    Matrix a = alignment_matrix(game.video, game.text);
    Coalition c(8, {1, 3 + 2});
    CHECK(coalition_similarity(game, c) == a(1, 2));
}

TEST_CASE("coalition similarity is invariant under joint permutation") {
    Matrix v = random_rows(4, 6, 50);
    Matrix t = random_rows(3, 6, 51);
    SimilarityGame game = SimilarityGame::with_uniform_weights(features(v), features(t, Modality::Text));
    Coalition c(7, {0, 2, 4, 6});
    double base = coalition_similarity(game, c);

    std::vector<int> perm{2, 0, 3, 1}; // applied to video rows
    Matrix pv(4, 6);
    for (int r = 0; r < 4; ++r) pv.row(r) = v.row(perm[static_cast<std::size_t>(r)]);
    SimilarityGame permuted = SimilarityGame::with_uniform_weights(features(pv), features(t, Modality::Text));
    // members {0, 2} map to the permuted positions {1, 0}
    Coalition pc(7, {1, 0, 4, 6});
    CHECK(std::abs(coalition_similarity(permuted, pc) - base) <= 1e-12);
}

TEST_CASE("similarity characteristic agrees with coalition_similarity") {
    SimilarityGame game = SimilarityGame::with_uniform_weights(
        features(random_rows(3, 5, 60)), features(random_rows(4, 5, 61), Modality::Text));
    SimilarityCharacteristic fn(game);
    SplitMix64 rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        Coalition c(7);
        for (int p = 0; p < 7; ++p)
            if (rng.next() & 1) c.set(p);
        CHECK(fn.value(c) == coalition_similarity(game, c));
    }
    Coalition grand(7);
    for (int p = 0; p < 7; ++p) grand.set(p);
    CHECK(std::abs(fn.value(grand) - similarity_score(game)) <= 1e-12);
}

TEST_CASE("similarity game interaction matrix matches the entrywise oracle") {
    SimilarityGame game = SimilarityGame::with_uniform_weights(
        features(random_rows(4, 16, 3)), features(random_rows(4, 16, 4), Modality::Text));
    SimilarityCharacteristic fn(game);
    InteractionMap map = interaction_matrix(fn, fn.players(), SamplingMode::Exact, 0, 0);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            double expected = oracle::naive_interaction(fn, 8, a, 4 + b);
            CHECK(std::abs(map.values(a, b) - expected) <= 1e-12);
            InteractionEstimate direct = exact_interaction(fn, fn.players(), a, 4 + b);
            CHECK(map.values(a, b) == direct.value);
        }
    }
}

TEST_CASE("a duplicated cross-modal pair dominates the interaction map") {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        SplitMix64 rng(derive_stream(1234, trial));
        int dim = 64;
        Vector shared(dim);
        for (int d = 0; d < dim; ++d) shared[d] = rng.gaussian();
        shared /= shared.norm();
        auto orthogonal_row = [&]() {
            Vector r(dim);
            for (int d = 0; d < dim; ++d) r[d] = rng.gaussian();
            r -= shared.dot(r) * shared;
            r /= r.norm();
            return r;
        };
        Matrix v(2, dim), t(2, dim);
        v.row(0) = shared.transpose();
        v.row(1) = orthogonal_row().transpose();
        t.row(0) = shared.transpose();
        t.row(1) = orthogonal_row().transpose();

        SimilarityGame game =
            SimilarityGame::with_uniform_weights(features(v), features(t, Modality::Text));
        SimilarityCharacteristic fn(game);
        InteractionMap map = interaction_matrix(fn, fn.players(), SamplingMode::Exact, 0, 0);
        Eigen::Index best_r = 0, best_c = 0;
        map.values.maxCoeff(&best_r, &best_c);
        CHECK(best_r == 0);
        CHECK(best_c == 0);
    }
}

TEST_CASE("hierarchy with per-token clusters and identity gates repeats the entity map") {
    Matrix v = random_rows(4, 8, 70);
    Matrix t = random_rows(4, 8, 71);

    HierarchyConfig config;
    config.clusters = {4, 4, 4, 4};
    config.mode = SamplingMode::Exact;
    config.bypass_attention = true;
    for (auto& gates : config.gates) {
        gates.gamma = GateConfig::constant_gate(1.0);
        gates.delta = GateConfig::constant_gate(1.0);
    }

    HierarchyResult result = run_hierarchy(features(v), features(t, Modality::Text), config);
    CHECK((result.entity.map.values.array() == result.action.map.values.array()).all());
    CHECK((result.entity.map.values.array() == result.event.map.values.array()).all());
    CHECK(result.entity.similarity == result.action.similarity);
    CHECK(result.entity.similarity == result.event.similarity);
    // per-token clustering keeps the features bit-identical
    CHECK((result.action.video_single.data.array() == v.array()).all());
    CHECK((result.event.text_single.data.array() == t.array()).all());
}

TEST_CASE("hierarchy entity map matches an entrywise oracle on its features") {
    Matrix v = random_rows(5, 12, 5);
    Matrix t = random_rows(7, 12, 6);

    HierarchyConfig config;
    config.clusters = {3, 2, 4, 2};
    config.mode = SamplingMode::Exact;

    HierarchyResult result = run_hierarchy(features(v), features(t, Modality::Text), config);
    REQUIRE(result.entity.map.values.rows() == 5);
    REQUIRE(result.entity.map.values.cols() == 7);

    SimilarityGame game;
    game.video = result.entity.video;
    game.text = result.entity.text;
    game.weights_video = Vector::Constant(5, 1.0 / 5.0);
    game.weights_text = Vector::Constant(7, 1.0 / 7.0);
    SimilarityCharacteristic fn(game);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 7; ++b)
            CHECK(std::abs(result.entity.map.values(a, b) -
                           oracle::naive_interaction(fn, 12, a, 5 + b)) <= 1e-12);

    // action/event shapes follow the configured cluster counts
    CHECK(result.action.map.values.rows() == 3);
    CHECK(result.action.map.values.cols() == 4);
    CHECK(result.event.map.values.rows() == 2);
    CHECK(result.event.map.values.cols() == 2);
}

TEST_CASE("hierarchy in exact mode refuses games beyond the enumeration cap") {
    Matrix v = random_rows(16, 8, 82);
    Matrix t = random_rows(16, 8, 83);
    HierarchyConfig config;
    config.clusters = {4, 2, 4, 2};
    config.mode = SamplingMode::Exact; // 32 players at the entity level
    CHECK(thrown_code([&] { run_hierarchy(features(v), features(t, Modality::Text), config); }) ==
          ErrorCode::EnumerationTooLarge);
}

TEST_CASE("hierarchy rejects cluster counts above the token counts") {
    Matrix v = random_rows(3, 6, 80);
    Matrix t = random_rows(4, 6, 81);
    HierarchyConfig config;
    config.clusters = {5, 2, 3, 2};
    config.mode = SamplingMode::Exact;
    CHECK(thrown_code([&] { run_hierarchy(features(v), features(t, Modality::Text), config); }) ==
          ErrorCode::ClusterCountExceedsTokens);
}
