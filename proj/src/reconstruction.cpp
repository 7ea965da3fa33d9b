#include "hbi/reconstruction.hpp"

#include <string>

#include "hbi/numeric.hpp"

namespace hbi {

Vector attention_weights(const FeatureMatrix& keys, const Vector& query) {
    validate_features(keys, "attention keys");
    if (query.size() != keys.dim())
        fail(ErrorCode::DimMismatch, "query dimension " + std::to_string(query.size()) +
                                         " does not match key dimension " + std::to_string(keys.dim()));
    Vector logits = keys.data * query;
    return softmax(logits);
}

namespace {

FeatureMatrix pooled_and_replicated(const FeatureMatrix& single, const Vector& query) {
    Vector weights = attention_weights(single, query);
    Eigen::RowVectorXd pooled = weights.transpose() * single.data;
    FeatureMatrix out;
    out.data = pooled.replicate(single.rows(), 1);
    out.level = single.level;
    out.modality = single.modality;
    return out;
}

} // namespace

FeatureMatrix cross_modal_video(const FeatureMatrix& video_single, const Vector& text_cls) {
    return pooled_and_replicated(video_single, text_cls);
}

FeatureMatrix cross_modal_text(const FeatureMatrix& text_single, const Vector& video_mean) {
    return pooled_and_replicated(text_single, video_mean);
}

FusedFeatures fuse(const FeatureMatrix& single, const FeatureMatrix& cross, const GateConfig& gate) {
    validate_features(single, "single-modal features");
    validate_features(cross, "cross-modal features");
    if (single.rows() != cross.rows() || single.dim() != cross.dim())
        fail(ErrorCode::ShapeMismatch, "single and cross features must share the same shape");
    if (gate.mode == GateConfig::Mode::Linear) {
        if (!gate.has_linear_weights)
            fail(ErrorCode::UnloadedWeights, "linear gate mode requires loaded weights");
        if (gate.linear_weights.size() != single.dim())
            fail(ErrorCode::ShapeMismatch, "gate weights dimension does not match the features");
    }

    FusedFeatures out;
    out.features.level = single.level;
    out.features.modality = single.modality;
    out.gates.resize(single.rows());

    // Exact endpoints: a constant gate of 1 or 0 must reproduce the input
    // bit for bit, so those cases copy instead of computing.
    if (gate.mode == GateConfig::Mode::Constant && gate.constant == 1.0) {
        out.features.data = single.data;
        out.gates.setOnes();
        return out;
    }
    if (gate.mode == GateConfig::Mode::Constant && gate.constant == 0.0) {
        out.features.data = cross.data;
        out.gates.setZero();
        return out;
    }

    out.features.data.resize(single.rows(), single.dim());
    for (Eigen::Index r = 0; r < single.rows(); ++r) {
        double g = gate.constant;
        if (gate.mode == GateConfig::Mode::Linear)
            g = gate.linear_weights.dot(single.data.row(r) - cross.data.row(r)) + gate.linear_bias;
        // cross + g * (single - cross): identical inputs stay a fixed point
        // for every gate value.
        out.features.data.row(r) = cross.data.row(r) + g * (single.data.row(r) - cross.data.row(r));
        out.gates[r] = g;
    }
    return out;
}

ReconstructedPair reconstruct_pair(const FeatureMatrix& video_single, const FeatureMatrix& text_single,
                                   const Vector& text_query, const GateConfig& gamma,
                                   const GateConfig& delta) {
    FeatureMatrix video_cross = cross_modal_video(video_single, text_query);
    Vector video_mean = video_single.data.colwise().mean();
    FeatureMatrix text_cross = cross_modal_text(text_single, video_mean);

    FusedFeatures video = fuse(video_single, video_cross, gamma);
    FusedFeatures text = fuse(text_single, text_cross, delta);

    ReconstructedPair out;
    out.video = std::move(video.features);
    out.text = std::move(text.features);
    out.gamma = std::move(video.gates);
    out.delta = std::move(text.gates);
    return out;
}

} // namespace hbi
