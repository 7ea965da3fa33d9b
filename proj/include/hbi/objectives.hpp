#pragma once

#include <array>
#include <optional>

#include "hbi/game.hpp"
#include "hbi/matrix.hpp"

namespace hbi {

/// Row-stochastic video-to-text and column-stochastic text-to-video
/// distributions induced by a score matrix.
struct DistributionPair {
    Matrix v2t;
    Matrix t2v;
};

/// Softmax of each row (v2t) and of each column (t2v). No temperature.
DistributionPair to_distributions(const Matrix& scores);

/// Mean over rows of KL(pred_v2t || target_v2t) plus mean over columns of
/// KL(pred_t2v || target_t2v). Zero iff the induced distributions match.
double banzhaf_loss(const Matrix& pred, const InteractionMap& target);

/// Symmetric InfoNCE over a square batch similarity matrix:
///   -1/2 [ mean_k log softmax_row(S/tau)[k,k] + mean_k log softmax_col(S/tau)[k,k] ].
double contrastive_loss(const Matrix& scores, double tau);

/// KL(student || teacher) over batch-level similarity distributions,
/// averaged over rows plus averaged over columns.
double distillation_loss(const Matrix& teacher_scores, const Matrix& student_scores);

struct LossWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double lambda = 0.0;
    double tau = 0.01;

    void validate() const;
};

struct LevelLossInput {
    double contrastive = 0.0;
    double banzhaf = 0.0;
};

struct LossReport {
    struct LevelTerms {
        double contrastive = 0.0;
        double banzhaf = 0.0;
        double combined = 0.0; // contrastive + alpha * banzhaf
    };
    LevelTerms entity;
    LevelTerms action;
    LevelTerms event;
    double distill_e2a = 0.0;
    double distill_e2v = 0.0;
    double task = 0.0;
    double total = 0.0;

    const LevelTerms& level(Level l) const {
        return l == Level::Entity ? entity : (l == Level::Action ? action : event);
    }
};

/// Assembles the per-level combined losses and the overall total
///   sum_levels (L_C + alpha L_I) + beta (distill_e2a + distill_e2v) + lambda task.
/// Every level must be supplied.
LossReport total_loss(const std::array<std::optional<LevelLossInput>, 3>& levels, double distill_e2a,
                      double distill_e2v, double task, const LossWeights& weights);

} // namespace hbi
