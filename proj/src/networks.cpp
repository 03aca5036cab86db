#include "mvclab/networks.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mvclab/errors.hpp"

namespace mvclab::nets {

namespace {

void validate_spec(const MLPSpec& spec, const std::string& what) {
    if (spec.widths.size() < 2) throw ConfigError(what + ": MLP needs at least input and output widths");
    for (int64_t w : spec.widths)
        if (w <= 0) throw ConfigError(what + ": non-positive layer width");
}

void init_mlp(ParamStore& ps, const std::string& prefix, const MLPSpec& spec, std::mt19937_64& rng) {
    for (size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const int64_t fan_in = spec.widths[l];
        const int64_t fan_out = spec.widths[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> uni(-a, a);
        Tensor w({fan_in, fan_out});
        for (int64_t i = 0; i < w.numel(); ++i) w[i] = uni(rng);
        ps.add(prefix + ".W" + std::to_string(l), std::move(w));
        ps.add(prefix + ".b" + std::to_string(l), Tensor({int64_t{1}, fan_out}));
    }
}

nlohmann::json spec_to_json(const MLPSpec& s) {
    const char* head = s.head == Head::Linear ? "linear" : s.head == Head::Softmax ? "softmax" : "sigmoid";
    return {{"widths", s.widths}, {"head", head}};
}

MLPSpec spec_from_json(const nlohmann::json& j) {
    MLPSpec s;
    s.widths = j.at("widths").get<std::vector<int64_t>>();
    const std::string head = j.at("head").get<std::string>();
    if (head == "linear")
        s.head = Head::Linear;
    else if (head == "softmax")
        s.head = Head::Softmax;
    else if (head == "sigmoid")
        s.head = Head::Sigmoid;
    else
        throw FormatError("checkpoint: unknown head '" + head + "'");
    return s;
}

}  // namespace

int64_t parameter_count(const MLPSpec& spec) {
    int64_t n = 0;
    for (size_t l = 0; l + 1 < spec.widths.size(); ++l) n += spec.widths[l] * spec.widths[l + 1] + spec.widths[l + 1];
    return n;
}

std::string encoder_prefix(int view) { return "enc" + std::to_string(view); }
std::string decoder_prefix(int view) { return "dec" + std::to_string(view); }
std::string dual_prefix(int view) { return "dual" + std::to_string(view); }

ModelBundle init_model(const ModelSpecs& specs, uint64_t seed) {
    if (specs.num_views() < 2) throw ConfigError("init_model: at least two views required");
    if (specs.decoders.size() != specs.encoders.size())
        throw ConfigError("init_model: encoder/decoder count mismatch");
    const int64_t d = specs.encoders.front().out_dim();
    for (int v = 0; v < specs.num_views(); ++v) {
        validate_spec(specs.encoders[v], "encoder " + std::to_string(v));
        validate_spec(specs.decoders[v], "decoder " + std::to_string(v));
        if (specs.encoders[v].out_dim() != d)
            throw ConfigError("init_model: encoders disagree on embedding width");
        if (specs.decoders[v].in_dim() != d)
            throw ConfigError("init_model: decoder input width must equal encoder output width");
        if (specs.decoders[v].out_dim() != specs.encoders[v].in_dim())
            throw ConfigError("init_model: decoder must reconstruct the raw view width");
    }
    if (specs.view_predictor) {
        validate_spec(*specs.view_predictor, "view predictor");
        if (specs.view_predictor->in_dim() != d) throw ConfigError("init_model: predictor input width must be D");
    }
    if (specs.feature_mlp) {
        validate_spec(*specs.feature_mlp, "feature MLP");
        if (specs.feature_mlp->in_dim() != d) throw ConfigError("init_model: feature MLP input width must be D");
    }
    if (specs.cluster_mlp) {
        validate_spec(*specs.cluster_mlp, "cluster MLP");
        if (specs.cluster_mlp->in_dim() != d) throw ConfigError("init_model: cluster MLP input width must be D");
    }
    if (!specs.dual_predictors.empty() && specs.dual_predictors.size() != specs.encoders.size())
        throw ConfigError("init_model: dual predictor count must match views");
    for (size_t v = 0; v < specs.dual_predictors.size(); ++v) {
        validate_spec(specs.dual_predictors[v], "dual predictor " + std::to_string(v));
        if (specs.dual_predictors[v].in_dim() != d || specs.dual_predictors[v].out_dim() != d)
            throw ConfigError("init_model: dual predictors map D -> D");
    }

    ModelBundle m;
    m.specs = specs;
    m.params.set_seed(seed);
    std::mt19937_64 rng(seed);
    for (int v = 0; v < specs.num_views(); ++v) init_mlp(m.params, encoder_prefix(v), specs.encoders[v], rng);
    for (int v = 0; v < specs.num_views(); ++v) init_mlp(m.params, decoder_prefix(v), specs.decoders[v], rng);
    if (specs.view_predictor) init_mlp(m.params, kPredictorPrefix, *specs.view_predictor, rng);
    if (specs.feature_mlp) init_mlp(m.params, kFeatureMlpPrefix, *specs.feature_mlp, rng);
    if (specs.cluster_mlp) init_mlp(m.params, kClusterMlpPrefix, *specs.cluster_mlp, rng);
    for (size_t v = 0; v < specs.dual_predictors.size(); ++v)
        init_mlp(m.params, dual_prefix(static_cast<int>(v)), specs.dual_predictors[v], rng);
    return m;
}

ad::Var mlp_forward(ad::Graph& g, const ParamStore& ps, const std::string& prefix, const MLPSpec& spec, ad::Var x) {
    if (g.value(x).cols() != spec.in_dim())
        throw DimensionError(prefix + ": input width " + std::to_string(g.value(x).cols()) + " != expected " +
                             std::to_string(spec.in_dim()));
    ad::Var h = x;
    const size_t layers = spec.widths.size() - 1;
    for (size_t l = 0; l < layers; ++l) {
        ad::Var w = g.param(ps, prefix + ".W" + std::to_string(l));
        ad::Var b = g.param(ps, prefix + ".b" + std::to_string(l));
        h = g.add(g.matmul(h, w), b);
        if (l + 1 < layers) h = g.relu(h);
    }
    switch (spec.head) {
        case Head::Linear: return h;
        case Head::Softmax: return g.softmax_rows(h);
        case Head::Sigmoid: return g.sigmoid(h);
    }
    return h;
}

ad::Var encode(ad::Graph& g, const ModelBundle& m, int view, ad::Var x) {
    if (view < 0 || view >= m.num_views()) throw ContractError("encode: view index out of range");
    return mlp_forward(g, m.params, encoder_prefix(view), m.specs.encoders[static_cast<size_t>(view)], x);
}

ad::Var decode(ad::Graph& g, const ModelBundle& m, int view, ad::Var z) {
    if (view < 0 || view >= m.num_views()) throw ContractError("decode: view index out of range");
    return mlp_forward(g, m.params, decoder_prefix(view), m.specs.decoders[static_cast<size_t>(view)], z);
}

ad::Var predict_view_label(ad::Graph& g, const ModelBundle& m, ad::Var z) {
    if (!m.specs.view_predictor) throw ConfigError("predict_view_label: model has no view predictor");
    return mlp_forward(g, m.params, kPredictorPrefix, *m.specs.view_predictor, z);
}

ad::Var dual_predict(ad::Graph& g, const ModelBundle& m, int from_view, ad::Var z) {
    if (m.specs.dual_predictors.empty()) throw ConfigError("dual_predict: model has no dual predictors");
    if (from_view < 0 || from_view >= static_cast<int>(m.specs.dual_predictors.size()))
        throw ContractError("dual_predict: view index out of range");
    return mlp_forward(g, m.params, dual_prefix(from_view), m.specs.dual_predictors[static_cast<size_t>(from_view)],
                       z);
}

ad::Var feature_mlp(ad::Graph& g, const ModelBundle& m, ad::Var z) {
    if (!m.specs.feature_mlp) throw ConfigError("feature_mlp: model has no feature MLP");
    return mlp_forward(g, m.params, kFeatureMlpPrefix, *m.specs.feature_mlp, z);
}

ad::Var cluster_mlp(ad::Graph& g, const ModelBundle& m, ad::Var z) {
    if (!m.specs.cluster_mlp) throw ConfigError("cluster_mlp: model has no cluster MLP");
    return mlp_forward(g, m.params, kClusterMlpPrefix, *m.specs.cluster_mlp, z);
}

std::vector<std::string> params_with_prefixes(const ParamStore& ps, const std::vector<std::string>& prefixes) {
    std::vector<std::string> out;
    for (const std::string& name : ps.names()) {
        for (const std::string& p : prefixes) {
            if (name.size() > p.size() && name.compare(0, p.size(), p) == 0 && name[p.size()] == '.') {
                out.push_back(name);
                break;
            }
        }
    }
    return out;
}

void save_checkpoint(const ModelBundle& m, const CheckpointMeta& meta, const std::string& path) {
    nlohmann::json j;
    j["format"] = "mvclab-checkpoint-v1";
    j["model_kind"] = meta.model_kind;
    j["k"] = meta.k;
    j["normalized"] = meta.normalized;
    j["seed"] = m.params.seed();

    nlohmann::json specs;
    specs["encoders"] = nlohmann::json::array();
    specs["decoders"] = nlohmann::json::array();
    for (const auto& s : m.specs.encoders) specs["encoders"].push_back(spec_to_json(s));
    for (const auto& s : m.specs.decoders) specs["decoders"].push_back(spec_to_json(s));
    if (m.specs.view_predictor) specs["view_predictor"] = spec_to_json(*m.specs.view_predictor);
    if (m.specs.feature_mlp) specs["feature_mlp"] = spec_to_json(*m.specs.feature_mlp);
    if (m.specs.cluster_mlp) specs["cluster_mlp"] = spec_to_json(*m.specs.cluster_mlp);
    specs["dual_predictors"] = nlohmann::json::array();
    for (const auto& s : m.specs.dual_predictors) specs["dual_predictors"].push_back(spec_to_json(s));
    j["specs"] = std::move(specs);

    nlohmann::json params = nlohmann::json::object();
    nlohmann::json order = nlohmann::json::array();
    for (const std::string& name : m.params.names()) {
        const Tensor& t = m.params.get(name);
        std::vector<double> vals(t.data(), t.data() + t.numel());
        params[name] = {{"shape", t.shape()}, {"values", std::move(vals)}};
        order.push_back(name);
    }
    j["param_order"] = std::move(order);
    j["params"] = std::move(params);

    std::ofstream out(path);
    if (!out) throw FormatError("cannot write checkpoint: " + path);
    out << j.dump();
}

std::pair<ModelBundle, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot read checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint parse error: " + std::string(e.what()));
    }
    if (j.value("format", "") != "mvclab-checkpoint-v1") throw FormatError("unrecognized checkpoint format");

    CheckpointMeta meta;
    meta.model_kind = j.at("model_kind").get<std::string>();
    meta.k = j.at("k").get<int>();
    meta.normalized = j.at("normalized").get<bool>();

    ModelBundle m;
    const auto& specs = j.at("specs");
    for (const auto& s : specs.at("encoders")) m.specs.encoders.push_back(spec_from_json(s));
    for (const auto& s : specs.at("decoders")) m.specs.decoders.push_back(spec_from_json(s));
    if (specs.contains("view_predictor")) m.specs.view_predictor = spec_from_json(specs.at("view_predictor"));
    if (specs.contains("feature_mlp")) m.specs.feature_mlp = spec_from_json(specs.at("feature_mlp"));
    if (specs.contains("cluster_mlp")) m.specs.cluster_mlp = spec_from_json(specs.at("cluster_mlp"));
    for (const auto& s : specs.at("dual_predictors")) m.specs.dual_predictors.push_back(spec_from_json(s));

    m.params.set_seed(j.at("seed").get<uint64_t>());
    for (const auto& name : j.at("param_order")) {
        const auto& p = j.at("params").at(name.get<std::string>());
        Tensor t(p.at("shape").get<std::vector<int64_t>>(), p.at("values").get<std::vector<double>>());
        m.params.add(name.get<std::string>(), std::move(t));
    }
    return {std::move(m), std::move(meta)};
}

}  // namespace mvclab::nets
