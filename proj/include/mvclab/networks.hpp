#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvclab/graph.hpp"
#include "mvclab/params.hpp"

namespace mvclab::nets {

enum class Head { Linear, Softmax, Sigmoid };

/// Layer widths of one MLP; hidden activations are relu, the output head is
/// selected per network role.
struct MLPSpec {
    std::vector<int64_t> widths;
    Head head = Head::Linear;

    int64_t in_dim() const { return widths.front(); }
    int64_t out_dim() const { return widths.back(); }
};

int64_t parameter_count(const MLPSpec& spec);

/// Network inventory of one model. Encoders/decoders are per view; the
/// remaining components are optional and depend on the objective.
struct ModelSpecs {
    std::vector<MLPSpec> encoders;
    std::vector<MLPSpec> decoders;
    std::optional<MLPSpec> view_predictor;  // bi-view: D->1 sigmoid; multi-view: D->V softmax
    std::optional<MLPSpec> feature_mlp;     // one linear layer D->H
    std::optional<MLPSpec> cluster_mlp;     // one linear layer D->K + softmax
    std::vector<MLPSpec> dual_predictors;   // bi-view missing-view maps, size 2 when present

    int num_views() const { return static_cast<int>(encoders.size()); }
};

struct ModelBundle {
    ModelSpecs specs;
    ParamStore params;

    int num_views() const { return specs.num_views(); }
    int64_t embed_dim() const { return specs.encoders.front().out_dim(); }
};

/// Xavier-uniform weights, zero biases; deterministic given seed.
ModelBundle init_model(const ModelSpecs& specs, uint64_t seed);

/// Applies one MLP. `prefix` selects the parameter family inside the store.
ad::Var mlp_forward(ad::Graph& g, const ParamStore& ps, const std::string& prefix, const MLPSpec& spec, ad::Var x);

ad::Var encode(ad::Graph& g, const ModelBundle& m, int view, ad::Var x);
ad::Var decode(ad::Graph& g, const ModelBundle& m, int view, ad::Var z);
ad::Var predict_view_label(ad::Graph& g, const ModelBundle& m, ad::Var z);
ad::Var dual_predict(ad::Graph& g, const ModelBundle& m, int from_view, ad::Var z);
ad::Var feature_mlp(ad::Graph& g, const ModelBundle& m, ad::Var z);
ad::Var cluster_mlp(ad::Graph& g, const ModelBundle& m, ad::Var z);

// Parameter-name prefixes, also the trainable-subset vocabulary for staged
// training.
std::string encoder_prefix(int view);
std::string decoder_prefix(int view);
std::string dual_prefix(int view);
inline const char* kPredictorPrefix = "pred";
inline const char* kFeatureMlpPrefix = "fmlp";
inline const char* kClusterMlpPrefix = "cmlp";

std::vector<std::string> params_with_prefixes(const ParamStore& ps, const std::vector<std::string>& prefixes);

/// Self-describing JSON checkpoint: specs, seed, metadata and all parameter
/// arrays. Round-trips exactly.
struct CheckpointMeta {
    std::string model_kind;  // "biview" | "multiview"
    int k = 0;
    bool normalized = true;
};

void save_checkpoint(const ModelBundle& m, const CheckpointMeta& meta, const std::string& path);
std::pair<ModelBundle, CheckpointMeta> load_checkpoint(const std::string& path);

}  // namespace mvclab::nets
