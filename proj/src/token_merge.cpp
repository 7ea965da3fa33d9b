#include "hbi/token_merge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbi/numeric.hpp"

namespace hbi {

namespace {

void validate_config(const FeatureMatrix& tokens, const MergeConfig& config, int& k_out) {
    validate_features(tokens, "tokens");
    int n = static_cast<int>(tokens.rows());
    if (config.n_clusters < 1 || config.n_clusters > n)
        fail(ErrorCode::ClusterCountExceedsTokens,
             "n_clusters = " + std::to_string(config.n_clusters) + " outside [1, " +
                 std::to_string(n) + "]");
    int k = config.k_neighbors;
    if (k == 0) k = std::min(5, n - 1);
    if (n > 1 && (k < 1 || k > n - 1))
        fail(ErrorCode::TooFewTokens,
             "k_neighbors = " + std::to_string(k) + " needs 1 <= K <= N - 1 = " + std::to_string(n - 1));
    if (config.token_weights.size() != 0 && config.token_weights.size() != n)
        fail(ErrorCode::ShapeMismatch, "token_weights length must equal the token count");
    if (config.temporal_mix.size() != 0 &&
        (config.temporal_mix.rows() != tokens.dim() || config.temporal_mix.cols() != tokens.dim()))
        fail(ErrorCode::ShapeMismatch, "temporal_mix must be a dim x dim matrix");
    k_out = k;
}

Vector resolved_weights(const FeatureMatrix& tokens, const MergeConfig& config) {
    if (config.token_weights.size() != 0) return config.token_weights;
    return Vector::Zero(tokens.rows());
}

} // namespace

ClusterAssignment dpc_knn(const FeatureMatrix& tokens, const MergeConfig& config) {
    int k = 0;
    validate_config(tokens, config, k);
    int n = static_cast<int>(tokens.rows());

    ClusterAssignment assignment;
    assignment.token_weights = resolved_weights(tokens, config);

    if (n == 1) {
        assignment.centers = {0};
        assignment.labels = {0};
        assignment.density = Vector::Ones(1);
        assignment.distance_index = Vector::Zero(1);
        return assignment;
    }

    Matrix space = config.temporal_mix.size() != 0 ? Matrix(tokens.data * config.temporal_mix.transpose())
                                                   : tokens.data;

    Matrix dist2(n, n);
    for (int i = 0; i < n; ++i) {
        dist2(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            double d = (space.row(i) - space.row(j)).squaredNorm();
            dist2(i, j) = d;
            dist2(j, i) = d;
        }
    }

    // rho_i over the K nearest neighbors, self excluded, ties by lowest index.
    assignment.density.resize(n);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        order.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            if (dist2(i, a) != dist2(i, b)) return dist2(i, a) < dist2(i, b);
            return a < b;
        });
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += dist2(i, order[static_cast<std::size_t>(t)]);
        assignment.density[i] = std::exp(-acc / static_cast<double>(k));
    }

    // xi_i: nearest strictly-denser token; a tie in density promotes the
    // lower index. Tokens with no denser peer take the max distance instead.
    assignment.distance_index.resize(n);
    for (int i = 0; i < n; ++i) {
        bool found = false;
        double best = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            bool denser = assignment.density[j] > assignment.density[i] ||
                          (assignment.density[j] == assignment.density[i] && j < i);
            if (!denser) continue;
            if (!found || dist2(i, j) < best) best = dist2(i, j);
            found = true;
        }
        if (!found) best = dist2.row(i).maxCoeff();
        assignment.distance_index[i] = best;
    }

    // Top n_clusters by rho * xi (score desc, index asc), presented sorted by
    // token index so that the merged row order follows the input order.
    std::vector<int> ranked(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ranked[static_cast<std::size_t>(i)] = i;
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        double sa = assignment.density[a] * assignment.distance_index[a];
        double sb = assignment.density[b] * assignment.distance_index[b];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    assignment.centers.assign(ranked.begin(), ranked.begin() + config.n_clusters);
    std::sort(assignment.centers.begin(), assignment.centers.end());

    // Centers own their cluster; everything else joins the nearest center
    // (ties to the lowest-indexed center).
    assignment.labels.assign(static_cast<std::size_t>(n), 0);
    for (int c = 0; c < assignment.cluster_count(); ++c)
        assignment.labels[static_cast<std::size_t>(assignment.centers[static_cast<std::size_t>(c)])] = c;
    for (int i = 0; i < n; ++i) {
        if (std::binary_search(assignment.centers.begin(), assignment.centers.end(), i)) continue;
        int best_c = 0;
        double best_d = dist2(i, assignment.centers[0]);
        for (int c = 1; c < assignment.cluster_count(); ++c) {
            double d = dist2(i, assignment.centers[static_cast<std::size_t>(c)]);
            if (d < best_d) {
                best_d = d;
                best_c = c;
            }
        }
        assignment.labels[static_cast<std::size_t>(i)] = best_c;
    }
    return assignment;
}

MergeDetail weighted_merge_detail(const FeatureMatrix& tokens, const ClusterAssignment& assignment,
                                  const MergeConfig& config) {
    validate_features(tokens, "tokens");
    int n = static_cast<int>(tokens.rows());
    int n_clusters = assignment.cluster_count();
    if (static_cast<int>(assignment.labels.size()) != n)
        fail(ErrorCode::InconsistentAssignment, "labels length does not match the token count");
    if (n_clusters < 1 || n_clusters > n)
        fail(ErrorCode::InconsistentAssignment, "cluster count outside [1, N]");
    for (int center : assignment.centers)
        if (center < 0 || center >= n)
            fail(ErrorCode::InconsistentAssignment, "center index outside the token range");
    for (int label : assignment.labels)
        if (label < 0 || label >= n_clusters)
            fail(ErrorCode::InconsistentAssignment, "label refers to a missing center");
    Vector weights = assignment.token_weights.size() == n ? assignment.token_weights : Vector::Zero(n);

    MergeDetail out;
    out.queries.resize(n_clusters, tokens.dim());

    std::vector<int> members;
    for (int c = 0; c < n_clusters; ++c) {
        members.clear();
        for (int i = 0; i < n; ++i)
            if (assignment.labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
        if (members.empty())
            fail(ErrorCode::InconsistentAssignment, "cluster " + std::to_string(c) + " has no members");
        Vector member_w(static_cast<Eigen::Index>(members.size()));
        for (std::size_t t = 0; t < members.size(); ++t) member_w[static_cast<Eigen::Index>(t)] = weights[members[t]];
        Vector mix = softmax(member_w);
        out.queries.row(c).setZero();
        for (std::size_t t = 0; t < members.size(); ++t)
            out.queries.row(c) += mix[static_cast<Eigen::Index>(t)] * tokens.data.row(members[t]);
    }

    out.attention.resize(n_clusters, n);
    Matrix merged(n_clusters, tokens.dim());
    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(tokens.dim()));
    for (int c = 0; c < n_clusters; ++c) {
        Vector logits(n);
        for (int t = 0; t < n; ++t)
            logits[t] = out.queries.row(c).dot(tokens.data.row(t)) * inv_sqrt_d + weights[t];
        Vector coeff = softmax(logits);
        out.attention.row(c) = coeff.transpose();
        merged.row(c) = coeff.transpose() * tokens.data;
    }

    out.merged.data = config.bypass_attention ? out.queries : merged;
    out.merged.level = tokens.level;
    out.merged.modality = tokens.modality;
    return out;
}

FeatureMatrix weighted_merge(const FeatureMatrix& tokens, const ClusterAssignment& assignment,
                             const MergeConfig& config) {
    return weighted_merge_detail(tokens, assignment, config).merged;
}

} // namespace hbi
