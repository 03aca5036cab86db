#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvclab/tensor.hpp"

namespace mvclab::data {

/// A multi-view dataset: V feature matrices over the same m samples, an
/// optional ground-truth labeling and an optional availability mask.
struct ViewSet {
    std::string name;
    std::vector<Tensor> views;       // each m x E_v
    std::vector<int> labels;         // empty = absent
    std::vector<uint8_t> mask;       // empty = absent; else m*V row-major, 1 = view present
    int64_t samples() const { return views.empty() ? 0 : views[0].rows(); }
    int num_views() const { return static_cast<int>(views.size()); }
    bool has_labels() const { return !labels.empty(); }
    bool has_mask() const { return !mask.empty(); }
    bool view_available(int64_t sample, int view) const {
        return mask.empty() || mask[static_cast<size_t>(sample) * static_cast<size_t>(num_views()) +
                                    static_cast<size_t>(view)] != 0;
    }
    void validate() const;
};

/// Directory layout: view0.csv .. view{V-1}.csv, optional labels.csv and
/// mask.csv, manifest.json carrying {name, V, m, dims}.
ViewSet load_viewset(const std::string& dir);
void save_viewset(const ViewSet& vs, const std::string& dir);

struct SyntheticSpec {
    int clusters = 3;
    int per_cluster = 100;
    std::vector<int64_t> dims = {10, 15};  // total per-view widths
    int latent_dim = 4;
    int nuisance_dim = 5;
    double nuisance_scale = 1.0;
    double noise_std = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

/// Cluster-structured shared latent pushed through per-view random linear
/// maps, padded with view-specific nuisance dimensions, plus Gaussian noise.
ViewSet synth_multiview(const SyntheticSpec& spec);

/// Bi-view incomplete protocol: exactly round(eta * n) samples lose one view
/// (chosen uniformly); matrices are untouched, only the mask changes.
ViewSet apply_miss_mask(const ViewSet& vs, double eta, uint64_t seed);

/// Per-view per-feature affine map to [0,1]; constant features map to 0.
ViewSet normalize_minmax(const ViewSet& vs);

// Small CSV helpers shared with the run artifacts.
std::string fmt_double(double v);  // %.17g
std::vector<int> load_label_csv(const std::string& path);
void save_label_csv(const std::vector<int>& labels, const std::string& path);
void save_matrix_csv(const Tensor& t, const std::string& path);
Tensor load_matrix_csv(const std::string& path);

}  // namespace mvclab::data
