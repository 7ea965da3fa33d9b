#pragma once

#include "hbi/matrix.hpp"

namespace hbi {

double log_sum_exp(const Vector& logits);

/// Numerically stable softmax.
Vector softmax(const Vector& logits);

Vector log_softmax(const Vector& logits);

/// KL(softmax(p_logits) || softmax(q_logits)), evaluated in log space so that
/// sharply peaked inputs (e.g. scores divided by tau = 0.01) stay finite.
double kl_from_logits(const Vector& p_logits, const Vector& q_logits);

} // namespace hbi
