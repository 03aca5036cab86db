#include "mvclab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mvclab/errors.hpp"

namespace mvclab::data {

namespace fs = std::filesystem;

void ViewSet::validate() const {
    if (views.size() < 1) throw FormatError("viewset: no views");
    const int64_t m = views[0].rows();
    for (const Tensor& v : views) {
        if (v.rank() != 2) throw FormatError("viewset: views must be matrices");
        if (v.rows() != m) throw FormatError("viewset: views disagree on sample count");
        if (!v.all_finite()) throw FormatError("viewset: non-finite feature value");
    }
    if (has_labels() && static_cast<int64_t>(labels.size()) != m)
        throw FormatError("viewset: label count does not match sample count");
    if (has_mask()) {
        if (static_cast<int64_t>(mask.size()) != m * num_views())
            throw FormatError("viewset: mask size does not match samples x views");
        for (int64_t i = 0; i < m; ++i) {
            bool any = false;
            for (int v = 0; v < num_views(); ++v) any = any || view_available(i, v);
            if (!any) throw FormatError("viewset: sample " + std::to_string(i) + " has no available view");
        }
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, const std::string& where) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= line.size()) {
        size_t end = line.find(',', start);
        if (end == std::string::npos) end = line.size();
        const std::string cell = line.substr(start, end - start);
        try {
            size_t used = 0;
            out.push_back(std::stod(cell, &used));
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw FormatError(where + ": cannot parse '" + cell + "' as a number");
        }
        start = end + 1;
        if (end == line.size()) break;
    }
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

Tensor load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line, path));
        if (rows.back().size() != rows.front().size())
            throw FormatError(path + ": ragged row " + std::to_string(rows.size()));
    }
    if (rows.empty()) throw FormatError(path + ": empty matrix");
    Tensor t({static_cast<int64_t>(rows.size()), static_cast<int64_t>(rows[0].size())});
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) t.at(static_cast<int64_t>(i), static_cast<int64_t>(j)) = rows[i][j];
    return t;
}

void save_matrix_csv(const Tensor& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (int64_t i = 0; i < t.rows(); ++i) {
        for (int64_t j = 0; j < t.cols(); ++j) {
            if (j) out << ',';
            out << fmt_double(t.at(i, j));
        }
        out << '\n';
    }
}

std::vector<int> load_label_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        try {
            size_t used = 0;
            labels.push_back(std::stoi(line, &used));
            if (used != line.size()) throw std::invalid_argument(line);
        } catch (const std::exception&) {
            throw FormatError(path + ": cannot parse '" + line + "' as an integer label");
        }
    }
    if (labels.empty()) throw FormatError(path + ": no labels");
    return labels;
}

void save_label_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (int x : labels) out << x << '\n';
}

ViewSet load_viewset(const std::string& dir) {
    const fs::path root(dir);
    std::ifstream mf(root / "manifest.json");
    if (!mf) throw FormatError("missing manifest.json in " + dir);
    nlohmann::json j;
    try {
        mf >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest.json parse error: " + std::string(e.what()));
    }

    ViewSet vs;
    vs.name = j.value("name", "");
    const int v_count = j.at("V").get<int>();
    const int64_t m = j.at("m").get<int64_t>();
    const auto dims = j.at("dims").get<std::vector<int64_t>>();
    if (v_count < 1 || static_cast<int>(dims.size()) != v_count) throw FormatError("manifest: V and dims disagree");

    for (int v = 0; v < v_count; ++v) {
        Tensor t = load_matrix_csv((root / ("view" + std::to_string(v) + ".csv")).string());
        if (t.rows() != m) throw FormatError("view" + std::to_string(v) + ".csv row count does not match manifest m");
        if (t.cols() != dims[static_cast<size_t>(v)])
            throw FormatError("view" + std::to_string(v) + ".csv width does not match manifest dims");
        vs.views.push_back(std::move(t));
    }

    if (fs::exists(root / "labels.csv")) {
        vs.labels = load_label_csv((root / "labels.csv").string());
        if (static_cast<int64_t>(vs.labels.size()) != m) throw FormatError("labels.csv length does not match m");
    }

    if (fs::exists(root / "mask.csv")) {
        Tensor mask_mat = load_matrix_csv((root / "mask.csv").string());
        if (mask_mat.rows() != m || mask_mat.cols() != v_count)
            throw FormatError("mask.csv must be m rows of V entries");
        vs.mask.resize(static_cast<size_t>(m) * static_cast<size_t>(v_count));
        for (int64_t i = 0; i < mask_mat.numel(); ++i) {
            if (mask_mat[i] != 0.0 && mask_mat[i] != 1.0) throw FormatError("mask.csv entries must be 0 or 1");
            vs.mask[static_cast<size_t>(i)] = mask_mat[i] != 0.0;
        }
    }

    vs.validate();
    return vs;
}

void save_viewset(const ViewSet& vs, const std::string& dir) {
    vs.validate();
    const fs::path root(dir);
    fs::create_directories(root);

    nlohmann::json j;
    j["name"] = vs.name;
    j["V"] = vs.num_views();
    j["m"] = vs.samples();
    std::vector<int64_t> dims;
    for (const Tensor& v : vs.views) dims.push_back(v.cols());
    j["dims"] = dims;
    std::ofstream mf(root / "manifest.json");
    if (!mf) throw FormatError("cannot write manifest.json in " + dir);
    mf << j.dump(2) << '\n';

    for (int v = 0; v < vs.num_views(); ++v)
        save_matrix_csv(vs.views[static_cast<size_t>(v)], (root / ("view" + std::to_string(v) + ".csv")).string());
    if (vs.has_labels()) save_label_csv(vs.labels, (root / "labels.csv").string());
    if (vs.has_mask()) {
        std::ofstream out(root / "mask.csv");
        if (!out) throw FormatError("cannot write mask.csv in " + dir);
        for (int64_t i = 0; i < vs.samples(); ++i) {
            for (int v = 0; v < vs.num_views(); ++v) {
                if (v) out << ',';
                out << (vs.view_available(i, v) ? 1 : 0);
            }
            out << '\n';
        }
    }
}

void SyntheticSpec::validate() const {
    if (clusters < 1 || per_cluster < 1) throw ConfigError("synthetic spec: positive cluster counts required");
    if (dims.size() < 2) throw ConfigError("synthetic spec: at least two views required");
    if (latent_dim < 1) throw ConfigError("synthetic spec: latent_dim must be positive");
    if (nuisance_dim < 0 || nuisance_scale < 0.0) throw ConfigError("synthetic spec: nuisance must be nonnegative");
    if (noise_std < 0.0) throw ConfigError("synthetic spec: noise_std must be nonnegative");
    for (int64_t d : dims)
        if (d <= nuisance_dim) throw ConfigError("synthetic spec: view dims must exceed nuisance_dim");
}

ViewSet synth_multiview(const SyntheticSpec& spec) {
    spec.validate();
    // Cluster geometry and view maps come from a fixed stream so task
    // hardness is comparable across dataset seeds; the seed drives every
    // per-sample draw.
    std::mt19937_64 structure_rng(0x5eedface00000001ULL);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int v_count = static_cast<int>(spec.dims.size());
    const int64_t m = static_cast<int64_t>(spec.clusters) * spec.per_cluster;

    constexpr double kClusterSpread = 1.5;  // between-cluster std per latent coord
    constexpr double kWithinStd = 0.6;      // within-cluster latent std
    // Views alternate strong/weak signal so they are complementary rather
    // than redundant copies of the latent.
    constexpr double kWeakViewScale = 1.0;
    Tensor means({static_cast<int64_t>(spec.clusters), static_cast<int64_t>(spec.latent_dim)});
    for (int64_t i = 0; i < means.numel(); ++i) means[i] = kClusterSpread * normal(structure_rng);

    std::vector<Tensor> maps;  // latent_dim x signal_dim per view
    for (int v = 0; v < v_count; ++v) {
        const int64_t signal = spec.dims[static_cast<size_t>(v)] - spec.nuisance_dim;
        Tensor a({static_cast<int64_t>(spec.latent_dim), signal});
        double scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
        if (v % 2 == 1) scale *= kWeakViewScale;
        for (int64_t i = 0; i < a.numel(); ++i) a[i] = scale * normal(structure_rng);
        maps.push_back(std::move(a));
    }

    ViewSet vs;
    vs.name = "synthetic";
    for (int v = 0; v < v_count; ++v) vs.views.emplace_back(Tensor({m, spec.dims[static_cast<size_t>(v)]}));
    vs.labels.resize(static_cast<size_t>(m));

    std::vector<double> latent(static_cast<size_t>(spec.latent_dim));
    int64_t row = 0;
    for (int c = 0; c < spec.clusters; ++c) {
        for (int s = 0; s < spec.per_cluster; ++s, ++row) {
            vs.labels[static_cast<size_t>(row)] = c;
            for (int j = 0; j < spec.latent_dim; ++j)
                latent[static_cast<size_t>(j)] = means.at(c, j) + kWithinStd * normal(rng);
            for (int v = 0; v < v_count; ++v) {
                Tensor& x = vs.views[static_cast<size_t>(v)];
                const Tensor& a = maps[static_cast<size_t>(v)];
                const int64_t signal = a.cols();
                for (int64_t j = 0; j < signal; ++j) {
                    double s_val = 0.0;
                    for (int l = 0; l < spec.latent_dim; ++l) s_val += latent[static_cast<size_t>(l)] * a.at(l, j);
                    x.at(row, j) = s_val;
                }
                for (int64_t j = 0; j < spec.nuisance_dim; ++j)
                    x.at(row, signal + j) = spec.nuisance_scale * normal(rng);
                for (int64_t j = 0; j < x.cols(); ++j) x.at(row, j) += spec.noise_std * normal(rng);
            }
        }
    }
    return vs;
}

ViewSet apply_miss_mask(const ViewSet& vs, double eta, uint64_t seed) {
    vs.validate();
    if (vs.num_views() != 2) throw ConfigError("apply_miss_mask: the incomplete protocol is bi-view");
    if (eta < 0.0 || eta >= 1.0) throw ConfigError("apply_miss_mask: eta must lie in [0, 1)");

    const int64_t n = vs.samples();
    const int64_t incomplete = std::llround(eta * static_cast<double>(n));
    if (n - incomplete <= 0) throw ConfigError("apply_miss_mask: no complete samples would remain");

    ViewSet out = vs;
    out.mask.assign(static_cast<size_t>(n) * 2, 1);
    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int64_t i = 0; i < incomplete; ++i) {
        const int64_t sample = order[static_cast<size_t>(i)];
        const int kept = coin(rng);  // the one view this sample keeps
        out.mask[static_cast<size_t>(sample) * 2 + static_cast<size_t>(1 - kept)] = 0;
    }
    out.validate();
    return out;
}

ViewSet normalize_minmax(const ViewSet& vs) {
    vs.validate();
    ViewSet out = vs;
    for (Tensor& x : out.views) {
        for (int64_t j = 0; j < x.cols(); ++j) {
            double lo = x.at(0, j), hi = x.at(0, j);
            for (int64_t i = 1; i < x.rows(); ++i) {
                lo = std::min(lo, x.at(i, j));
                hi = std::max(hi, x.at(i, j));
            }
            const double span = hi - lo;
            for (int64_t i = 0; i < x.rows(); ++i)
                x.at(i, j) = span > 0.0 ? (x.at(i, j) - lo) / span : 0.0;
        }
    }
    return out;
}

}  // namespace mvclab::data
