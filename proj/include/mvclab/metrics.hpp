#pragma once

#include <string>
#include <vector>

namespace mvclab::metrics {

enum class NmiNorm { Geometric, Arithmetic };

/// Clustering accuracy under the optimal cluster-to-class matching
/// (Hungarian on the negated contingency, padded square).
double acc(const std::vector<int>& pred, const std::vector<int>& truth);

/// Normalized mutual information; 0 by convention when either partition has
/// zero entropy.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth, NmiNorm norm = NmiNorm::Geometric);

/// Adjusted Rand index via pair counting on the contingency table.
double ari(const std::vector<int>& pred, const std::vector<int>& truth);

/// Purity: dominant-class fraction averaged over predicted clusters.
double pur(const std::vector<int>& pred, const std::vector<int>& truth);

struct MetricsReport {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double pur = 0.0;

    std::string to_json() const;  // 6 decimal places
};

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                       NmiNorm norm = NmiNorm::Geometric);

}  // namespace mvclab::metrics
