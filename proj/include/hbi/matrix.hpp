#pragma once

#include <Eigen/Dense>
#include <string>

#include "hbi/error.hpp"

namespace hbi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Semantic granularity of a token matrix. Entity rows are frames/words,
/// action rows are clips/phrases, event rows are segments/paragraphs.
enum class Level { Entity, Action, Event };

enum class Modality { Video, Text };

const char* to_string(Level level);
const char* to_string(Modality modality);

/// Token embeddings for one modality at one semantic level, one row per token.
struct FeatureMatrix {
    Matrix data;
    Level level = Level::Entity;
    Modality modality = Modality::Video;

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
};

/// Throws NonFiniteInput / ShapeMismatch unless the matrix has at least one
/// row, at least one column, and only finite entries. `what` names the
/// offending input in the error message.
void validate_features(const FeatureMatrix& features, const std::string& what);

bool all_finite(const Matrix& m);

} // namespace hbi
