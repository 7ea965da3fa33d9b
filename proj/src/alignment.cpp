#include "hbi/alignment.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hbi/rng.hpp"

namespace hbi {

namespace {

void validate_simplex(const Vector& weights, Eigen::Index expected, const std::string& what) {
    if (weights.size() != expected)
        fail(ErrorCode::ShapeMismatch, what + " length must equal the row count");
    if ((weights.array() < 0.0).any())
        fail(ErrorCode::ConfigError, what + " must be non-negative");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        fail(ErrorCode::ConfigError, what + " must sum to 1 within 1e-9");
}

// Weighted max-alignment restricted to the given row subsets. Weights are
// renormalized over present members; an all-zero restriction falls back to
// uniform weights so the score stays bounded.
double restricted_similarity(const Matrix& alignment, const Vector& weights_video,
                             const Vector& weights_text, const std::vector<int>& video_rows,
                             const std::vector<int>& text_rows) {
    if (video_rows.empty() || text_rows.empty()) return 0.0;

    double wv_sum = 0.0;
    for (int i : video_rows) wv_sum += weights_video[i];
    double wt_sum = 0.0;
    for (int j : text_rows) wt_sum += weights_text[j];

    double v2t = 0.0;
    for (int i : video_rows) {
        double best = alignment(i, text_rows[0]);
        for (std::size_t t = 1; t < text_rows.size(); ++t)
            best = std::max(best, alignment(i, text_rows[t]));
        double w = wv_sum > 0.0 ? weights_video[i] / wv_sum : 1.0 / static_cast<double>(video_rows.size());
        v2t += w * best;
    }
    double t2v = 0.0;
    for (int j : text_rows) {
        double best = alignment(video_rows[0], j);
        for (std::size_t t = 1; t < video_rows.size(); ++t)
            best = std::max(best, alignment(video_rows[t], j));
        double w = wt_sum > 0.0 ? weights_text[j] / wt_sum : 1.0 / static_cast<double>(text_rows.size());
        t2v += w * best;
    }
    return 0.5 * (v2t + t2v);
}

} // namespace

SimilarityGame SimilarityGame::with_uniform_weights(FeatureMatrix video, FeatureMatrix text) {
    SimilarityGame game;
    game.weights_video = Vector::Constant(video.rows(), 1.0 / static_cast<double>(video.rows()));
    game.weights_text = Vector::Constant(text.rows(), 1.0 / static_cast<double>(text.rows()));
    game.video = std::move(video);
    game.text = std::move(text);
    return game;
}

PlayerSet SimilarityGame::players() const {
    PlayerSet players;
    players.n = static_cast<int>(video.rows() + text.rows());
    players.modality_split = static_cast<int>(video.rows());
    return players;
}

void SimilarityGame::validate() const {
    validate_features(video, "video features");
    validate_features(text, "text features");
    if (video.dim() != text.dim())
        fail(ErrorCode::DimMismatch, "video and text dimensions differ");
    validate_simplex(weights_video, video.rows(), "video weights");
    validate_simplex(weights_text, text.rows(), "text weights");
}

Matrix alignment_matrix(const FeatureMatrix& video, const FeatureMatrix& text) {
    validate_features(video, "video features");
    validate_features(text, "text features");
    if (video.dim() != text.dim())
        fail(ErrorCode::DimMismatch, "video dimension " + std::to_string(video.dim()) +
                                         " does not match text dimension " + std::to_string(text.dim()));

    Vector video_norms(video.rows());
    for (Eigen::Index i = 0; i < video.rows(); ++i) {
        video_norms[i] = video.data.row(i).norm();
        if (video_norms[i] == 0.0)
            fail(ErrorCode::ZeroNormRow, "video row " + std::to_string(i) + " has zero norm");
    }
    Vector text_norms(text.rows());
    for (Eigen::Index j = 0; j < text.rows(); ++j) {
        text_norms[j] = text.data.row(j).norm();
        if (text_norms[j] == 0.0)
            fail(ErrorCode::ZeroNormRow, "text row " + std::to_string(j) + " has zero norm");
    }

    Matrix out(video.rows(), text.rows());
    for (Eigen::Index i = 0; i < video.rows(); ++i)
        for (Eigen::Index j = 0; j < text.rows(); ++j)
            out(i, j) = video.data.row(i).dot(text.data.row(j)) / (video_norms[i] * text_norms[j]);
    return out;
}

double similarity_score(const SimilarityGame& game) {
    game.validate();
    Matrix a = alignment_matrix(game.video, game.text);
    double v2t = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) v2t += game.weights_video[i] * a.row(i).maxCoeff();
    double t2v = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) t2v += game.weights_text[j] * a.col(j).maxCoeff();
    return 0.5 * (v2t + t2v);
}

double coalition_similarity(const SimilarityGame& game, const Coalition& members) {
    game.validate();
    PlayerSet players = game.players();
    if (members.universe_size() != players.n)
        fail(ErrorCode::ShapeMismatch, "coalition universe does not match the game");
    Matrix a = alignment_matrix(game.video, game.text);
    std::vector<int> video_rows;
    std::vector<int> text_rows;
    members.for_each([&](int p) {
        if (p < players.modality_split)
            video_rows.push_back(p);
        else
            text_rows.push_back(p - players.modality_split);
    });
    return restricted_similarity(a, game.weights_video, game.weights_text, video_rows, text_rows);
}

SimilarityCharacteristic::SimilarityCharacteristic(const SimilarityGame& game) {
    game.validate();
    alignment_ = alignment_matrix(game.video, game.text);
    weights_video_ = game.weights_video;
    weights_text_ = game.weights_text;
    players_ = game.players();
}

double SimilarityCharacteristic::value(const Coalition& coalition) const {
    std::vector<int> video_rows;
    std::vector<int> text_rows;
    video_rows.reserve(static_cast<std::size_t>(players_.video_count()));
    text_rows.reserve(static_cast<std::size_t>(players_.text_count()));
    coalition.for_each([&](int p) {
        if (p < players_.modality_split)
            video_rows.push_back(p);
        else
            text_rows.push_back(p - players_.modality_split);
    });
    return restricted_similarity(alignment_, weights_video_, weights_text_, video_rows, text_rows);
}

namespace {

Vector uniform_or(const Vector& maybe, Eigen::Index n, const std::string& what) {
    if (maybe.size() == 0) return Vector::Constant(n, 1.0 / static_cast<double>(n));
    validate_simplex(maybe, n, what);
    return maybe;
}

LevelResult score_level(const FeatureMatrix& video_single, const FeatureMatrix& text_single,
                        const Vector& text_query, const LevelGates& gates, const Vector& omega_v,
                        const Vector& omega_t, const HierarchyConfig& config, Level level) {
    LevelResult result;
    result.video_single = video_single;
    result.text_single = text_single;

    ReconstructedPair pair =
        reconstruct_pair(video_single, text_single, text_query, gates.gamma, gates.delta);
    result.video = std::move(pair.video);
    result.text = std::move(pair.text);
    result.gamma = std::move(pair.gamma);
    result.delta = std::move(pair.delta);
    result.video.level = level;
    result.text.level = level;

    SimilarityGame game;
    game.video = result.video;
    game.text = result.text;
    game.weights_video = omega_v;
    game.weights_text = omega_t;
    game.validate();

    SimilarityCharacteristic fn(game);
    std::uint64_t level_seed = derive_stream(config.seed, static_cast<std::uint64_t>(level) + 1);
    result.map = interaction_matrix(fn, game.players(), config.mode, config.samples, level_seed,
                                    config.threads, config.enum_cap);
    result.map.level = level;
    result.similarity = similarity_score(game);
    return result;
}

MergeConfig merge_config(int n_clusters, const HierarchyConfig& config, const Vector& token_weights,
                         const Matrix& temporal_mix) {
    MergeConfig merge;
    merge.n_clusters = n_clusters;
    merge.k_neighbors = config.k_neighbors;
    merge.token_weights = token_weights;
    merge.temporal_mix = temporal_mix;
    merge.bypass_attention = config.bypass_attention;
    return merge;
}

} // namespace

HierarchyResult run_hierarchy(const FeatureMatrix& video_entity, const FeatureMatrix& text_entity,
                              const HierarchyConfig& config) {
    validate_features(video_entity, "video features");
    validate_features(text_entity, "text features");
    if (video_entity.dim() != text_entity.dim())
        fail(ErrorCode::DimMismatch, "video and text dimensions differ");

    int n_video = static_cast<int>(video_entity.rows());
    int n_text = static_cast<int>(text_entity.rows());
    const ClusterCounts& counts = config.clusters;
    if (counts.video_action < 1 || counts.video_action > n_video)
        fail(ErrorCode::ClusterCountExceedsTokens,
             "video_action = " + std::to_string(counts.video_action) + " outside [1, " +
                 std::to_string(n_video) + "]");
    if (counts.text_action < 1 || counts.text_action > n_text)
        fail(ErrorCode::ClusterCountExceedsTokens,
             "text_action = " + std::to_string(counts.text_action) + " outside [1, " +
                 std::to_string(n_text) + "]");
    if (counts.video_event < 1 || counts.video_event > counts.video_action)
        fail(ErrorCode::ClusterCountExceedsTokens,
             "video_event = " + std::to_string(counts.video_event) + " outside [1, " +
                 std::to_string(counts.video_action) + "]");
    if (counts.text_event < 1 || counts.text_event > counts.text_action)
        fail(ErrorCode::ClusterCountExceedsTokens,
             "text_event = " + std::to_string(counts.text_event) + " outside [1, " +
                 std::to_string(counts.text_action) + "]");
    if (config.text_cls_index < 0 || config.text_cls_index >= n_text)
        fail(ErrorCode::ConfigError, "text_cls_index outside the text row range");

    HierarchyResult result;

    // Entity level: the designated text row is the sentence-level query.
    Vector omega_v = uniform_or(config.omega_video, n_video, "video weights");
    Vector omega_t = uniform_or(config.omega_text, n_text, "text weights");
    Vector entity_query = text_entity.data.row(config.text_cls_index);
    result.entity = score_level(video_entity, text_entity, entity_query, config.gates[0], omega_v,
                                omega_t, config, Level::Entity);

    // Action level: cluster the single-modal entity features, merge, then
    // reconstruct. Merged levels use uniform weights and mean text queries.
    MergeConfig vm = merge_config(counts.video_action, config, config.video_token_weights_action,
                                  config.temporal_mix_video);
    MergeConfig tm = merge_config(counts.text_action, config, config.text_token_weights_action,
                                  config.temporal_mix_text);
    result.video_action_clusters = dpc_knn(result.entity.video_single, vm);
    result.text_action_clusters = dpc_knn(result.entity.text_single, tm);
    FeatureMatrix video_action = weighted_merge(result.entity.video_single, result.video_action_clusters, vm);
    FeatureMatrix text_action = weighted_merge(result.entity.text_single, result.text_action_clusters, tm);
    video_action.level = Level::Action;
    text_action.level = Level::Action;

    Vector action_omega_v = Vector::Constant(counts.video_action, 1.0 / counts.video_action);
    Vector action_omega_t = Vector::Constant(counts.text_action, 1.0 / counts.text_action);
    Vector action_query = text_action.data.colwise().mean();
    result.action = score_level(video_action, text_action, action_query, config.gates[1],
                                action_omega_v, action_omega_t, config, Level::Action);

    // Event level, from the action-level single-modal features.
    MergeConfig ve = merge_config(counts.video_event, config, config.video_token_weights_event,
                                  config.temporal_mix_video);
    MergeConfig te = merge_config(counts.text_event, config, config.text_token_weights_event,
                                  config.temporal_mix_text);
    result.video_event_clusters = dpc_knn(result.action.video_single, ve);
    result.text_event_clusters = dpc_knn(result.action.text_single, te);
    FeatureMatrix video_event = weighted_merge(result.action.video_single, result.video_event_clusters, ve);
    FeatureMatrix text_event = weighted_merge(result.action.text_single, result.text_event_clusters, te);
    video_event.level = Level::Event;
    text_event.level = Level::Event;

    Vector event_omega_v = Vector::Constant(counts.video_event, 1.0 / counts.video_event);
    Vector event_omega_t = Vector::Constant(counts.text_event, 1.0 / counts.text_event);
    Vector event_query = text_event.data.colwise().mean();
    result.event = score_level(video_event, text_event, event_query, config.gates[2], event_omega_v,
                               event_omega_t, config, Level::Event);

    return result;
}

} // namespace hbi
