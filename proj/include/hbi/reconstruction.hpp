#pragma once

#include "hbi/matrix.hpp"

namespace hbi {

/// How the per-row fusion gate is produced. The constant mode stands in for
/// the trained gate network; the linear mode accepts a loadable affine map
/// over the (single - cross) difference vector.
struct GateConfig {
    enum class Mode { Constant, Linear };
    Mode mode = Mode::Constant;
    double constant = 0.45;
    Vector linear_weights; // dim entries
    double linear_bias = 0.0;
    bool has_linear_weights = false;

    static GateConfig constant_gate(double value) {
        GateConfig g;
        g.mode = Mode::Constant;
        g.constant = value;
        return g;
    }
    static GateConfig linear_gate(Vector weights, double bias) {
        GateConfig g;
        g.mode = Mode::Linear;
        g.linear_weights = std::move(weights);
        g.linear_bias = bias;
        g.has_linear_weights = true;
        return g;
    }
};

/// Softmax attention coefficients of `query` over the rows of `keys`.
Vector attention_weights(const FeatureMatrix& keys, const Vector& query);

/// Pools the video rows with the text query vector (no scaling on the
/// logits) and replicates the pooled row N_v times.
FeatureMatrix cross_modal_video(const FeatureMatrix& video_single, const Vector& text_cls);

/// Mirror of cross_modal_video for the text side; the query is the video
/// mean vector.
FeatureMatrix cross_modal_text(const FeatureMatrix& text_single, const Vector& video_mean);

struct FusedFeatures {
    FeatureMatrix features;
    Vector gates; // per-row gate actually applied
};

/// Row-wise gated fusion g * single + (1 - g) * cross. Constant gates of
/// exactly 0 or 1 reproduce the corresponding input bit for bit.
FusedFeatures fuse(const FeatureMatrix& single, const FeatureMatrix& cross, const GateConfig& gate);

/// Both modalities reconstructed in one step, as used per level of the
/// hierarchy. The video mean query is computed internally.
struct ReconstructedPair {
    FeatureMatrix video;
    FeatureMatrix text;
    Vector gamma;
    Vector delta;
};

ReconstructedPair reconstruct_pair(const FeatureMatrix& video_single, const FeatureMatrix& text_single,
                                   const Vector& text_query, const GateConfig& gamma,
                                   const GateConfig& delta);

} // namespace hbi
