#pragma once

#include <cstdint>
#include <vector>

#include "mvclab/tensor.hpp"

namespace mvclab::cluster {

struct KMeansResult {
    Tensor centroids;              // K x H
    std::vector<int> assignments;  // nearest centroid per sample
    double objective = 0.0;        // final within-cluster sum of squares
    int iterations = 0;
    std::vector<double> objective_history;  // one entry per Lloyd iteration
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic given seed;
/// empty clusters are re-seeded at the point farthest from its centroid.
KMeansResult kmeans(const Tensor& features, int k, uint64_t seed, int max_iter = 100, double tol = 1e-9);

/// Best of n_init seeded runs (seeds seed, seed+1, ...) by final objective;
/// ties keep the earliest run.
KMeansResult kmeans_best_of(const Tensor& features, int k, uint64_t seed, int n_init = 10, int max_iter = 100,
                            double tol = 1e-9);

struct Assignment {
    std::vector<int> perm;  // row i assigned to column perm[i]
    double cost = 0.0;
};

/// Minimum-cost assignment on a square matrix. Ties between equal-cost
/// matchings break toward the lexicographically smallest permutation.
Assignment hungarian(const Tensor& cost);

struct Correspondence {
    std::vector<int> perm;  // cluster-MLP label i corresponds to K-means label perm[i]
    Tensor cost;            // K x K, max(contingency) - contingency
    Tensor contingency;     // K x K counts
    int64_t agreement = 0;  // matched overlap
};

/// Hungarian matching of cluster-MLP labels `l` against K-means labels `p`
/// through their contingency table.
Correspondence match_assignments(const std::vector<int>& l, const std::vector<int>& p, int k);

/// One-hot targets (m x K) in the cluster-MLP label space: sample t maps to
/// the MLP cluster matched with its K-means cluster.
Tensor enhancement_target(const Correspondence& corr, const std::vector<int>& p, int k);

/// Eq-style label fusion: per-sample argmax of view-averaged soft
/// assignments; ties break to the lowest cluster index.
std::vector<int> fuse_assignments(const std::vector<Tensor>& q_views);

/// K-means on the row-wise concatenation [z1, z2].
std::vector<int> final_clustering_biview(const Tensor& z1, const Tensor& z2, int k, uint64_t seed);

}  // namespace mvclab::cluster
