#include "hbi/matrix.hpp"

#include <cmath>

namespace hbi {

const char* to_string(Level level) {
    switch (level) {
    case Level::Entity: return "entity";
    case Level::Action: return "action";
    case Level::Event: return "event";
    }
    return "?";
}

const char* to_string(Modality modality) {
    return modality == Modality::Video ? "video" : "text";
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

void validate_features(const FeatureMatrix& features, const std::string& what) {
    if (features.rows() < 1 || features.dim() < 1)
        fail(ErrorCode::ShapeMismatch, what + " must have at least one row and one column");
    if (!all_finite(features.data))
        fail(ErrorCode::NonFiniteInput, what + " contains non-finite entries");
}

} // namespace hbi
