#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mvclab/cluster.hpp"
#include "mvclab/data.hpp"
#include "mvclab/losses.hpp"
#include "mvclab/metrics.hpp"
#include "mvclab/networks.hpp"

namespace mvclab::train {

enum class BiviewVariant { McmvcM, McmvcI, Baseline };

struct TrainConfig {
    int epochs = 200;
    // Staged pipeline epochs (pretrain / contrast / fine-tune).
    int pretrain_epochs = 100;
    int contrast_epochs = 100;
    int finetune_epochs = 50;

    int batch_size = 256;
    double lr = 1e-3;
    uint64_t seed = 0;
    losses::LossConfig loss;
    int eval_every = 10;

    int k = 3;  // cluster count
    int d = 0;  // embedding width; 0 resolves to k (bi-view) or 16 (multi-view)
    int h = 32; // instance-contrast feature width

    std::vector<int64_t> hidden = {64, 64, 64};
    std::vector<int64_t> dual_hidden = {32};

    void validate() const;
    int resolved_d(bool biview) const;
};

struct AdamState {
    struct Slot {
        Tensor m, v;
    };
    std::map<std::string, Slot> slots;
    int64_t step = 0;
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
};

/// State over the trainable subset; staged training passes a different name
/// list per stage.
AdamState adam_init(const ParamStore& ps, const std::vector<std::string>& names);

/// Bias-corrected Adam update over the parameters registered in `state`.
/// Parameters absent from `grads` count as zero gradient. Non-finite
/// gradients abort, naming the offending parameter.
void adam_step(ParamStore& ps, const ad::GradientMap& grads, AdamState& state, double lr);

struct TrainHistory {
    struct LossRow {
        int epoch = 0;
        int64_t step = 0;  // global optimizer step count at epoch end
        losses::LossBreakdown breakdown;
    };
    struct Stage {
        std::string name;
        int first_epoch = 0;
        int epochs = 0;
    };
    std::vector<LossRow> loss_rows;
    std::vector<std::pair<int, metrics::MetricsReport>> metric_rows;
    std::vector<Stage> stages;

    void write_losses_csv(const std::string& path) const;
    void write_metrics_csv(const std::string& path) const;
    void write_stages_csv(const std::string& path) const;
};

struct BiviewRun {
    nets::ModelBundle model;
    TrainHistory history;
    std::vector<int> labels;
};

/// Joint minimization of the bi-view composite (plus the dual-prediction
/// term when incomplete); no pre-training stage. Final labels come from
/// K-means on the concatenated embeddings, with missing embeddings
/// recovered through the dual predictors.
BiviewRun train_biview(const data::ViewSet& vs, const TrainConfig& cfg, BiviewVariant variant, bool incomplete);

struct ClusterResult {
    std::vector<int> labels;
    std::vector<Tensor> q_views;
    std::vector<cluster::Correspondence> correspondences;
};

struct MultiviewRun {
    nets::ModelBundle model;
    TrainHistory history;
    ClusterResult result;
};

using StageObserver = std::function<void(const std::string& stage, const nets::ModelBundle& model)>;

/// The staged multi-view pipeline: (1) reconstruction+variance pretraining
/// of encoders/decoders, (2) contrast + view-label training of the MLP heads
/// and encoders, (3) per-view K-means on the contrast features, (4) Hungarian
/// matching against the cluster-MLP labels, (5) cross-entropy fine-tuning of
/// the cluster MLP and encoders, (6) label fusion. `enhance=false` skips
/// steps 3-5. The observer fires after each stage.
MultiviewRun train_mcmvc_plus_plus(const data::ViewSet& vs, const TrainConfig& cfg, bool enhance,
                                   const StageObserver& observer = {});

struct AblationRow {
    bool ins = false, var = false, cla = false;
    metrics::MetricsReport mean;
};

/// Seeded multi-run average per activation row; every row shares the
/// baseline (cluster contrast + mu_base * reconstruction).
std::vector<AblationRow> run_ablation(const data::ViewSet& vs, const TrainConfig& cfg, BiviewVariant variant,
                                      const std::vector<std::array<bool, 3>>& grid, int runs);

/// The 8-row {ins, var, cla} activation grid in publication order.
std::vector<std::array<bool, 3>> table1_grid();

/// Full-dataset embeddings per view; with `recover` the missing bi-view
/// embeddings are filled in through the dual predictors.
std::vector<Tensor> encode_views(const nets::ModelBundle& model, const data::ViewSet& vs, bool recover);

/// Full-dataset soft cluster assignments per view (multi-view models).
std::vector<Tensor> soft_assignments(const nets::ModelBundle& model, const data::ViewSet& vs);

/// Runs fn(0..n-1), possibly across threads, capped by MVCLAB_THREADS
/// (default 1, i.e. sequential).
void parallel_runs(int n, const std::function<void(int)>& fn);

// Config (de)serialization; accepts either a bare config object or a run
// manifest wrapping one under "config".
TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json_text(const TrainConfig& cfg);

}  // namespace mvclab::train
