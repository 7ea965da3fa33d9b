#include "hbi/objectives.hpp"

#include <cmath>
#include <string>

#include "hbi/numeric.hpp"

namespace hbi {

namespace {

// mean over rows of KL(sm(pred row) || sm(target row))
//  + mean over columns of KL(sm(pred col) || sm(target col)).
double rowcol_kl(const Matrix& pred, const Matrix& target) {
    double rows = 0.0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
        rows += kl_from_logits(pred.row(i).transpose(), target.row(i).transpose());
    rows /= static_cast<double>(pred.rows());

    double cols = 0.0;
    for (Eigen::Index j = 0; j < pred.cols(); ++j)
        cols += kl_from_logits(pred.col(j), target.col(j));
    cols /= static_cast<double>(pred.cols());
    return rows + cols;
}

} // namespace

DistributionPair to_distributions(const Matrix& scores) {
    if (scores.rows() < 1 || scores.cols() < 1)
        fail(ErrorCode::ShapeMismatch, "scores must have at least one row and one column");
    if (!all_finite(scores)) fail(ErrorCode::NonFiniteInput, "scores contain non-finite entries");

    DistributionPair out;
    out.v2t.resize(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
        out.v2t.row(i) = softmax(scores.row(i).transpose()).transpose();
    out.t2v.resize(scores.rows(), scores.cols());
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
        out.t2v.col(j) = softmax(scores.col(j));
    return out;
}

double banzhaf_loss(const Matrix& pred, const InteractionMap& target) {
    if (pred.rows() != target.values.rows() || pred.cols() != target.values.cols())
        fail(ErrorCode::ShapeMismatch,
             "prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                 " but the interaction map is " + std::to_string(target.values.rows()) + "x" +
                 std::to_string(target.values.cols()));
    if (!all_finite(pred)) fail(ErrorCode::NonFiniteInput, "prediction contains non-finite entries");
    if (!all_finite(target.values))
        fail(ErrorCode::NonFiniteInput, "interaction map contains non-finite entries");
    return rowcol_kl(pred, target.values);
}

double contrastive_loss(const Matrix& scores, double tau) {
    if (scores.rows() != scores.cols())
        fail(ErrorCode::NonSquare, "batch similarity matrix must be square");
    if (tau <= 0.0) fail(ErrorCode::NonPositiveTau, "tau must be positive");
    if (!all_finite(scores)) fail(ErrorCode::NonFiniteInput, "scores contain non-finite entries");

    Eigen::Index b = scores.rows();
    Matrix scaled = scores / tau;
    double row_term = 0.0;
    double col_term = 0.0;
    for (Eigen::Index k = 0; k < b; ++k) {
        row_term += log_softmax(scaled.row(k).transpose())[k];
        col_term += log_softmax(scaled.col(k))[k];
    }
    row_term /= static_cast<double>(b);
    col_term /= static_cast<double>(b);
    return -0.5 * (row_term + col_term);
}

double distillation_loss(const Matrix& teacher_scores, const Matrix& student_scores) {
    if (teacher_scores.rows() != student_scores.rows() ||
        teacher_scores.cols() != student_scores.cols())
        fail(ErrorCode::ShapeMismatch, "teacher and student score shapes differ");
    if (!all_finite(teacher_scores) || !all_finite(student_scores))
        fail(ErrorCode::NonFiniteInput, "scores contain non-finite entries");
    return rowcol_kl(student_scores, teacher_scores);
}

void LossWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0 || lambda < 0.0)
        fail(ErrorCode::ConfigError, "loss weights must be non-negative");
    if (tau <= 0.0) fail(ErrorCode::NonPositiveTau, "tau must be positive");
}

LossReport total_loss(const std::array<std::optional<LevelLossInput>, 3>& levels, double distill_e2a,
                      double distill_e2v, double task, const LossWeights& weights) {
    weights.validate();
    static const Level kLevels[3] = {Level::Entity, Level::Action, Level::Event};
    LossReport report;
    LossReport::LevelTerms* slots[3] = {&report.entity, &report.action, &report.event};
    double level_sum = 0.0;
    for (int l = 0; l < 3; ++l) {
        if (!levels[static_cast<std::size_t>(l)])
            fail(ErrorCode::MissingLevel, std::string("missing loss terms for the ") +
                                              to_string(kLevels[l]) + " level");
        const LevelLossInput& in = *levels[static_cast<std::size_t>(l)];
        slots[l]->contrastive = in.contrastive;
        slots[l]->banzhaf = in.banzhaf;
        slots[l]->combined = in.contrastive + weights.alpha * in.banzhaf;
        level_sum += slots[l]->combined;
    }
    report.distill_e2a = distill_e2a;
    report.distill_e2v = distill_e2v;
    report.task = task;
    report.total = level_sum + weights.beta * (distill_e2a + distill_e2v) + weights.lambda * task;
    return report;
}

} // namespace hbi
