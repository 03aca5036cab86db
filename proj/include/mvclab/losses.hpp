#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mvclab/graph.hpp"
#include "mvclab/networks.hpp"

namespace mvclab::losses {

/// Facet weights, fixed constants and variant switches of the composite
/// objectives.
struct LossConfig {
    // Bi-view composite weights.
    double lambda1 = 0.02;  // instance contrast
    double lambda2 = 0.1;  // reconstruction
    double lambda3 = 0.02;  // variance
    double lambda4 = 0.2;  // view-label prediction
    // Multi-view composite weights.
    double mu1 = 0.1;  // variance
    double mu2 = 0.1;  // multi-class view-label prediction
    // Baseline reconstruction weight (ablation rows).
    double mu_base = 0.1;
    // Fixed constants.
    double alpha = 9.0;    // cluster-contrast entropy weight
    double gamma = 1.0;    // variance hinge target
    double eps_var = 1e-4; // variance stabilizer
    double tau = 0.5;      // InfoNCE temperature
    double tau1 = 0.5;     // instance NT-Xent temperature
    double tau2 = 1.0;     // cluster NT-Xent temperature
    double pre_weight = 0.2;  // dual-prediction weight

    enum class Instance { Mse, InfoNce };
    Instance instance = Instance::Mse;

    // Term activation flags on top of the always-on baseline (cluster
    // contrast + reconstruction).
    bool use_ins = true;
    bool use_var = true;
    bool use_cla = true;

    // InfoNCE denominator: also count within-view negative pairs.
    bool info_within_view = false;

    void validate() const;
};

/// Named raw term values plus the weighted total.
struct LossBreakdown {
    std::vector<std::pair<std::string, double>> terms;
    double total = 0.0;

    bool has(const std::string& name) const;
    double term(const std::string& name) const;
};

struct CompositeOut {
    LossBreakdown breakdown;
    ad::Var total;
};

// Individual terms. All losses are scalar graph nodes.
ad::Var loss_rec(ad::Graph& g, const std::vector<ad::Var>& xs, const std::vector<ad::Var>& x_hats);
ad::Var loss_var(ad::Graph& g, const std::vector<ad::Var>& zs, double gamma, double eps);
ad::Var loss_cla_from_probs(ad::Graph& g, ad::Var p1, ad::Var p2);
ad::Var loss_cla(ad::Graph& g, const nets::ModelBundle& m, ad::Var z1, ad::Var z2);
ad::Var loss_mcla(ad::Graph& g, const nets::ModelBundle& m, const std::vector<ad::Var>& zs);
ad::Var loss_clu(ad::Graph& g, ad::Var z1, ad::Var z2, double alpha);
ad::Var loss_mse(ad::Graph& g, ad::Var z1, ad::Var z2);
ad::Var loss_info(ad::Graph& g, ad::Var z1, ad::Var z2, double tau, bool within_view_negatives = false);
ad::Var loss_ntxent_instance(ad::Graph& g, const std::vector<ad::Var>& hs, double tau1);
ad::Var loss_cluster_contrast(ad::Graph& g, const std::vector<ad::Var>& qs, double tau2);
ad::Var loss_pre(ad::Graph& g, const nets::ModelBundle& m, ad::Var z1, ad::Var z2);

/// One bi-view mini-batch. `x1`/`x2` hold the full batch rows (aligned);
/// the index lists say which rows carry each view and which carry both.
/// For complete data all three lists are 0..b-1.
struct BiviewBatch {
    ad::Var x1, x2;
    std::vector<int64_t> avail1, avail2, complete;

    static BiviewBatch complete_batch(ad::Graph& g, Tensor x1, Tensor x2);
};

/// Eq.7 composite: L = L_clu + l1*L_ins + l2*L_rec + l3*L_var + l4*L_cla,
/// plus pre_weight*L_pre in the incomplete setting. Contrast/prediction
/// terms see complete rows only; reconstruction and variance see every
/// available row of their view.
CompositeOut loss_composite_biview(ad::Graph& g, const nets::ModelBundle& m, const BiviewBatch& batch,
                                   const LossConfig& cfg, bool incomplete);

struct MultiviewBatch {
    std::vector<ad::Var> xs;
};

/// Eq.11 composite: L = L_rec + mu1*L_var + L_Q + L_H + mu2*L_mcla.
CompositeOut loss_composite_multiview(ad::Graph& g, const nets::ModelBundle& m, const MultiviewBatch& batch,
                                      const LossConfig& cfg);

}  // namespace mvclab::losses
