#pragma once

#include <vector>

#include "hbi/matrix.hpp"

namespace hbi {

/// Settings for one clustering + merge step.
struct MergeConfig {
    int n_clusters = 1;
    /// Neighbor count for the density estimate; 0 means min(5, N_tokens - 1).
    int k_neighbors = 0;
    /// Per-token weights W fed to the attention logits and the per-cluster
    /// averages. Empty means all-zero (uniform averages, unshifted logits).
    Vector token_weights;
    /// Optional dim-preserving linear map applied to tokens before the
    /// density / distance computations (stand-in for a temporal mixing
    /// layer). Empty means identity. Merging itself always consumes the
    /// original tokens.
    Matrix temporal_mix;
    /// Test-only switch: return the cluster queries Q directly instead of
    /// the attention output, which makes the n_clusters = N configuration an
    /// exact identity.
    bool bypass_attention = false;
};

/// DPC-KNN output. centers holds token indices in ascending order; labels[i]
/// is the position in `centers` of token i's cluster.
struct ClusterAssignment {
    std::vector<int> centers;
    std::vector<int> labels;
    Vector density;        // rho
    Vector distance_index; // xi
    Vector token_weights;  // W actually used (resolved default included)

    int cluster_count() const { return static_cast<int>(centers.size()); }
};

/// Density-peaks clustering over K nearest neighbors:
///   rho_i = exp(-(1/K) * sum of squared distances to the K nearest tokens),
///   xi_i  = min squared distance to any higher-density token, or the max
///           squared distance over all tokens when none is denser.
/// Centers are the n_clusters tokens with the highest rho * xi; remaining
/// tokens join the nearest center. All ties resolve to the lowest token
/// index, and a token of equal density with a lower index counts as denser,
/// so the assignment is fully deterministic.
ClusterAssignment dpc_knn(const FeatureMatrix& tokens, const MergeConfig& config);

struct MergeDetail {
    FeatureMatrix merged;
    Matrix queries;   // n_clusters x dim weighted cluster averages
    Matrix attention; // n_clusters x N_tokens row-stochastic coefficients
};

/// Merges tokens into n_clusters rows: queries are the per-cluster weighted
/// averages (softmax of member token_weights), and the output is
/// Softmax(Q K^T / sqrt(d) + W) V over the original tokens.
FeatureMatrix weighted_merge(const FeatureMatrix& tokens, const ClusterAssignment& assignment,
                             const MergeConfig& config);

/// Same as weighted_merge but also exposes the attention coefficients.
MergeDetail weighted_merge_detail(const FeatureMatrix& tokens, const ClusterAssignment& assignment,
                                  const MergeConfig& config);

} // namespace hbi
