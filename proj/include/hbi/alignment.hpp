#pragma once

#include <array>
#include <cstdint>

#include "hbi/game.hpp"
#include "hbi/matrix.hpp"
#include "hbi/reconstruction.hpp"
#include "hbi/token_merge.hpp"

namespace hbi {

/// A cross-modal similarity game: video and text token matrices plus one
/// simplex weight vector per modality.
struct SimilarityGame {
    FeatureMatrix video;
    FeatureMatrix text;
    Vector weights_video;
    Vector weights_text;

    static SimilarityGame with_uniform_weights(FeatureMatrix video, FeatureMatrix text);

    /// Player universe: video rows first, then text rows.
    PlayerSet players() const;

    /// Checks shapes, finiteness, and that both weight vectors are
    /// non-negative and sum to 1 within 1e-9.
    void validate() const;
};

/// Cosine similarity of every (video row, text row) pair; entries in [-1, 1].
Matrix alignment_matrix(const FeatureMatrix& video, const FeatureMatrix& text);

/// Weighted average of per-row maximum alignment scores, symmetrized over
/// the two directions:
///   S = 1/2 (sum_i w_v[i] max_j a_ij  +  sum_j w_t[j] max_i a_ij).
double similarity_score(const SimilarityGame& game);

/// The similarity score restricted to the coalition's rows, with the weights
/// renormalized over present members. Coalitions missing either modality
/// (including the empty coalition) score exactly 0.
double coalition_similarity(const SimilarityGame& game, const Coalition& members);

/// coalition_similarity bound as a characteristic function. The full
/// alignment matrix is precomputed once, so coalition evaluations cost
/// O(|C_video| * |C_text|).
class SimilarityCharacteristic final : public CharacteristicFn {
public:
    explicit SimilarityCharacteristic(const SimilarityGame& game);
    double value(const Coalition& coalition) const override;
    const Matrix& alignment() const { return alignment_; }
    PlayerSet players() const { return players_; }

private:
    Matrix alignment_;
    Vector weights_video_;
    Vector weights_text_;
    PlayerSet players_;
};

/// Cluster counts for the two merge steps.
struct ClusterCounts {
    int video_action = 6;
    int video_event = 2;
    int text_action = 16;
    int text_event = 4;
};

struct LevelGates {
    GateConfig gamma = GateConfig::constant_gate(0.45);
    GateConfig delta = GateConfig::constant_gate(0.75);
};

struct HierarchyConfig {
    ClusterCounts clusters;
    int k_neighbors = 0; // 0 -> min(5, N - 1) per merge step
    std::array<LevelGates, 3> gates{};

    SamplingMode mode = SamplingMode::Sampled;
    std::uint64_t samples = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    int enum_cap = kDefaultEnumCap;

    /// Which text row serves as the sentence query at the entity level;
    /// merged levels use the mean text row instead.
    int text_cls_index = 0;

    Vector omega_video; // entity-level weights; empty -> uniform
    Vector omega_text;

    Vector video_token_weights_action; // W per merge step; empty -> zeros
    Vector text_token_weights_action;
    Vector video_token_weights_event;
    Vector text_token_weights_event;
    Matrix temporal_mix_video; // empty -> identity
    Matrix temporal_mix_text;
    bool bypass_attention = false;
};

struct LevelResult {
    FeatureMatrix video_single;
    FeatureMatrix text_single;
    FeatureMatrix video; // reconstructed
    FeatureMatrix text;
    Vector gamma;
    Vector delta;
    InteractionMap map;
    double similarity = 0.0;
};

struct HierarchyResult {
    LevelResult entity;
    LevelResult action;
    LevelResult event;
    ClusterAssignment video_action_clusters;
    ClusterAssignment text_action_clusters;
    ClusterAssignment video_event_clusters;
    ClusterAssignment text_event_clusters;

    const LevelResult& level(Level l) const {
        return l == Level::Entity ? entity : (l == Level::Action ? action : event);
    }
};

/// Runs the three-level pipeline: reconstruct and score the entity level,
/// then twice (action, event) cluster the single-modal features, merge,
/// reconstruct, and score. Interaction maps always consume reconstructed
/// features; clustering always consumes single-modal features.
HierarchyResult run_hierarchy(const FeatureMatrix& video_entity, const FeatureMatrix& text_entity,
                              const HierarchyConfig& config);

} // namespace hbi
