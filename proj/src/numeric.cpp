#include "hbi/numeric.hpp"

#include <cmath>

namespace hbi {

double log_sum_exp(const Vector& logits) {
    double m = logits.maxCoeff();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) acc += std::exp(logits[i] - m);
    return m + std::log(acc);
}

Vector softmax(const Vector& logits) {
    double m = logits.maxCoeff();
    Vector out(logits.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        acc += out[i];
    }
    out /= acc;
    return out;
}

Vector log_softmax(const Vector& logits) {
    double lse = log_sum_exp(logits);
    Vector out(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

double kl_from_logits(const Vector& p_logits, const Vector& q_logits) {
    Vector lp = log_softmax(p_logits);
    Vector lq = log_softmax(q_logits);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lp.size(); ++i) acc += std::exp(lp[i]) * (lp[i] - lq[i]);
    return acc;
}

} // namespace hbi
