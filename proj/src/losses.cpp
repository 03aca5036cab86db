#include "mvclab/losses.hpp"

#include <cmath>

#include "mvclab/constants.hpp"
#include "mvclab/errors.hpp"

namespace mvclab::losses {

namespace {

constexpr double kClampCeil = 1e300;

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

void require_prob_rows(const Tensor& t, const char* what) {
    for (int64_t i = 0; i < t.rows(); ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < t.cols(); ++j) s += t.at(i, j);
        if (std::abs(s - 1.0) > 1e-6)
            throw ContractError(std::string(what) + ": row " + std::to_string(i) + " sums to " + std::to_string(s) +
                                ", expected 1");
    }
}

void require_nonzero_rows(const Tensor& t, const char* what) {
    for (int64_t i = 0; i < t.rows(); ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < t.cols(); ++j) s += t.at(i, j) * t.at(i, j);
        if (s == 0.0) throw DomainError(std::string(what) + ": zero-norm row " + std::to_string(i));
    }
}

// NT-Xent accumulated over ordered view pairs. `feats` are the per-view
// feature matrices whose ROWS are contrasted; the per-pair prefactor is
// 1/rows. The self term exp(1/tau) is removed from every denominator.
ad::Var ntxent_pairwise(ad::Graph& g, const std::vector<ad::Var>& feats, double tau) {
    const int v_count = static_cast<int>(feats.size());
    const int64_t rows = g.value(feats[0]).rows();
    const Tensor eye = Tensor::identity(rows);
    const Tensor self_term = Tensor::full({rows, int64_t{1}}, std::exp(1.0 / tau));

    std::vector<ad::Var> row_self(static_cast<size_t>(v_count));  // per-view within-view denominators
    for (int i = 0; i < v_count; ++i) {
        ad::Var s_self = g.cosine_similarity(feats[static_cast<size_t>(i)], feats[static_cast<size_t>(i)]);
        row_self[static_cast<size_t>(i)] = g.sum_axis(g.exp(g.scalar_multiply(s_self, 1.0 / tau)), 1);
    }

    ad::Var eye_c = g.constant(eye);
    ad::Var self_c = g.constant(self_term);
    ad::Var acc;
    for (int i = 0; i < v_count; ++i) {
        for (int j = 0; j < v_count; ++j) {
            if (i == j) continue;
            ad::Var s_cross = g.cosine_similarity(feats[static_cast<size_t>(i)], feats[static_cast<size_t>(j)]);
            ad::Var e_cross = g.exp(g.scalar_multiply(s_cross, 1.0 / tau));
            ad::Var denom = g.subtract(g.add(g.sum_axis(e_cross, 1), row_self[static_cast<size_t>(i)]), self_c);
            denom = g.clamp(denom, kClampFloor, kClampCeil);
            ad::Var positives = g.sum(g.multiply(s_cross, eye_c));  // sum of matched-row similarities
            ad::Var term = g.subtract(g.scalar_multiply(positives, 1.0 / tau), g.sum(g.log(denom)));
            ad::Var l_ij = g.scalar_multiply(term, -1.0 / static_cast<double>(rows));
            acc = acc.valid() ? g.add(acc, l_ij) : l_ij;
        }
    }
    return g.scalar_multiply(acc, 0.5);
}

}  // namespace

void LossConfig::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (v < 0.0) throw ConfigError(std::string("loss config: ") + name + " must be nonnegative");
    };
    nonneg(lambda1, "lambda1");
    nonneg(lambda2, "lambda2");
    nonneg(lambda3, "lambda3");
    nonneg(lambda4, "lambda4");
    nonneg(mu1, "mu1");
    nonneg(mu2, "mu2");
    nonneg(mu_base, "mu_base");
    nonneg(alpha, "alpha");
    nonneg(pre_weight, "pre_weight");
    if (tau <= 0.0 || tau1 <= 0.0 || tau2 <= 0.0) throw ConfigError("loss config: temperatures must be positive");
    if (eps_var <= 0.0) throw ConfigError("loss config: eps_var must be positive");
}

bool LossBreakdown::has(const std::string& name) const {
    for (const auto& [k, v] : terms)
        if (k == name) return true;
    return false;
}

double LossBreakdown::term(const std::string& name) const {
    for (const auto& [k, v] : terms)
        if (k == name) return v;
    throw ContractError("loss breakdown has no term '" + name + "'");
}

ad::Var loss_rec(ad::Graph& g, const std::vector<ad::Var>& xs, const std::vector<ad::Var>& x_hats) {
    if (xs.empty() || xs.size() != x_hats.size()) throw ContractError("loss_rec: view count mismatch");
    ad::Var acc;
    for (size_t v = 0; v < xs.size(); ++v) {
        require_same_shape(g.value(xs[v]), g.value(x_hats[v]), "loss_rec");
        ad::Var term = g.squared_l2_norm(g.subtract(xs[v], x_hats[v]));
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return acc;
}

ad::Var loss_var(ad::Graph& g, const std::vector<ad::Var>& zs, double gamma, double eps) {
    if (zs.empty()) throw ContractError("loss_var: no views");
    ad::Var acc;
    for (ad::Var z : zs) {
        const Tensor& t = g.value(z);
        if (t.rows() < 2) throw ContractError("loss_var: batch must have at least 2 rows");
        ad::Var var = g.variance_axis(z, 0);
        ad::Var s = g.sqrt(g.add(var, g.constant(Tensor::full({int64_t{1}, t.cols()}, eps))));
        ad::Var hinge = g.relu(g.subtract(g.constant(Tensor::full({int64_t{1}, t.cols()}, gamma)), s));
        ad::Var term = g.sum(hinge);
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return acc;
}

ad::Var loss_cla_from_probs(ad::Graph& g, ad::Var p1, ad::Var p2) {
    const Tensor& t1 = g.value(p1);
    const Tensor& t2 = g.value(p2);
    if (t1.cols() != 1 || t2.cols() != 1) throw DimensionError("loss_cla: probabilities must be m x 1");
    // View 1 carries label 0, view 2 label 1.
    ad::Var one1 = g.constant(Tensor::full(t1.shape(), 1.0));
    ad::Var term1 = g.sum(g.log(g.clamp(g.subtract(one1, p1), kClampFloor, 1.0)));
    ad::Var term2 = g.sum(g.log(g.clamp(p2, kClampFloor, 1.0)));
    return g.scalar_multiply(g.add(term1, term2), -1.0);
}

ad::Var loss_cla(ad::Graph& g, const nets::ModelBundle& m, ad::Var z1, ad::Var z2) {
    if (!m.specs.view_predictor) throw ConfigError("loss_cla: model has no view-label predictor");
    if (m.specs.view_predictor->head != nets::Head::Sigmoid || m.specs.view_predictor->out_dim() != 1)
        throw ConfigError("loss_cla: bi-view predictor must be a sigmoid head with one output");
    return loss_cla_from_probs(g, nets::predict_view_label(g, m, z1), nets::predict_view_label(g, m, z2));
}

ad::Var loss_mcla(ad::Graph& g, const nets::ModelBundle& m, const std::vector<ad::Var>& zs) {
    if (zs.size() < 2) throw ContractError("loss_mcla: needs at least two views");
    if (!m.specs.view_predictor) throw ConfigError("loss_mcla: model has no view-label predictor");
    const int v_count = static_cast<int>(zs.size());
    if (m.specs.view_predictor->head != nets::Head::Softmax || m.specs.view_predictor->out_dim() != v_count)
        throw ConfigError("loss_mcla: predictor must be a softmax head over all views");
    ad::Var acc;
    for (int v = 0; v < v_count; ++v) {
        ad::Var probs = nets::predict_view_label(g, m, zs[static_cast<size_t>(v)]);
        Tensor pick({int64_t{v_count}, int64_t{1}});
        pick.at(v, 0) = 1.0;
        ad::Var own = g.matmul(probs, g.constant(pick));  // p(view = v | z^v)
        ad::Var term = g.sum(g.log(g.clamp(own, kClampFloor, 1.0)));
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return g.scalar_multiply(acc, -1.0);
}

ad::Var loss_clu(ad::Graph& g, ad::Var z1, ad::Var z2, double alpha) {
    const Tensor& t1 = g.value(z1);
    const Tensor& t2 = g.value(z2);
    require_same_shape(t1, t2, "loss_clu");
    require_prob_rows(t1, "loss_clu z1");
    require_prob_rows(t2, "loss_clu z2");
    const int64_t m = t1.rows();
    const int64_t d = t1.cols();

    // Batch joint over the over-cluster classes, symmetrized.
    ad::Var p = g.scalar_multiply(g.matmul(g.transpose(z1), z2), 1.0 / static_cast<double>(m));
    p = g.scalar_multiply(g.add(p, g.transpose(p)), 0.5);
    ad::Var row_marg = g.sum_axis(p, 1);  // d x 1
    ad::Var col_marg = g.sum_axis(p, 0);  // 1 x d

    ad::Var log_p = g.log(g.clamp(p, kClampFloor, 1.0));
    ad::Var row_outer = g.matmul(row_marg, g.constant(Tensor::full({int64_t{1}, d}, 1.0)));
    ad::Var col_outer = g.matmul(g.constant(Tensor::full({d, int64_t{1}}, 1.0)), col_marg);
    ad::Var log_ratio = g.subtract(g.subtract(log_p, g.log(g.clamp(row_outer, kClampFloor, 1.0))),
                                   g.log(g.clamp(col_outer, kClampFloor, 1.0)));
    ad::Var mi = g.sum(g.multiply(p, log_ratio));

    ad::Var h1 = g.scalar_multiply(g.sum(g.multiply(row_marg, g.log(g.clamp(row_marg, kClampFloor, 1.0)))), -1.0);
    ad::Var h2 = g.scalar_multiply(g.sum(g.multiply(col_marg, g.log(g.clamp(col_marg, kClampFloor, 1.0)))), -1.0);

    return g.scalar_multiply(g.add(mi, g.scalar_multiply(g.add(h1, h2), alpha)), -1.0);
}

ad::Var loss_mse(ad::Graph& g, ad::Var z1, ad::Var z2) {
    require_same_shape(g.value(z1), g.value(z2), "loss_mse");
    return g.squared_l2_norm(g.subtract(z1, z2));
}

ad::Var loss_info(ad::Graph& g, ad::Var z1, ad::Var z2, double tau, bool within_view_negatives) {
    const Tensor& t1 = g.value(z1);
    const Tensor& t2 = g.value(z2);
    require_same_shape(t1, t2, "loss_info");
    if (t1.rows() < 2) throw ContractError("loss_info: batch must have at least 2 rows");
    require_nonzero_rows(t1, "loss_info z1");
    require_nonzero_rows(t2, "loss_info z2");
    const int64_t m = t1.rows();
    ad::Var eye = g.constant(Tensor::identity(m));

    ad::Var s = g.cosine_similarity(z1, z2);
    ad::Var e = g.exp(g.scalar_multiply(s, 1.0 / tau));
    auto offdiag_sum = [&](ad::Var mat) { return g.subtract(g.sum(mat), g.sum(g.multiply(mat, eye))); };
    ad::Var denom = offdiag_sum(e);
    if (within_view_negatives) {
        ad::Var e11 = g.exp(g.scalar_multiply(g.cosine_similarity(z1, z1), 1.0 / tau));
        ad::Var e22 = g.exp(g.scalar_multiply(g.cosine_similarity(z2, z2), 1.0 / tau));
        denom = g.add(denom, g.add(offdiag_sum(e11), offdiag_sum(e22)));
    }
    denom = g.clamp(denom, kClampFloor, kClampCeil);

    ad::Var positives = g.sum(g.multiply(s, eye));
    // -sum_t [ sim_tt/tau - log(denominator) ]; the denominator is shared.
    return g.scalar_multiply(
        g.subtract(g.scalar_multiply(positives, 1.0 / tau), g.scalar_multiply(g.log(denom), static_cast<double>(m))),
        -1.0);
}

ad::Var loss_ntxent_instance(ad::Graph& g, const std::vector<ad::Var>& hs, double tau1) {
    if (hs.size() < 2) throw ContractError("loss_ntxent_instance: needs at least two views");
    const Tensor& first = g.value(hs[0]);
    for (ad::Var h : hs) {
        require_same_shape(g.value(h), first, "loss_ntxent_instance");
        require_nonzero_rows(g.value(h), "loss_ntxent_instance");
    }
    return ntxent_pairwise(g, hs, tau1);
}

ad::Var loss_cluster_contrast(ad::Graph& g, const std::vector<ad::Var>& qs, double tau2) {
    if (qs.size() < 2) throw ContractError("loss_cluster_contrast: needs at least two views");
    const Tensor& first = g.value(qs[0]);
    std::vector<ad::Var> cols;
    cols.reserve(qs.size());
    for (ad::Var q : qs) {
        require_same_shape(g.value(q), first, "loss_cluster_contrast");
        require_prob_rows(g.value(q), "loss_cluster_contrast");
        cols.push_back(g.transpose(q));  // contrast assignment columns
    }
    ad::Var contrast = ntxent_pairwise(g, cols, tau2);

    // Regularizer sum_v sum_t u_t log u_t with u the mean assignment per
    // cluster; keeps assignments from collapsing into one cluster.
    ad::Var reg;
    for (ad::Var q : qs) {
        ad::Var u = g.mean_axis(q, 0);
        ad::Var term = g.sum(g.multiply(u, g.log(g.clamp(u, kClampFloor, 1.0))));
        reg = reg.valid() ? g.add(reg, term) : term;
    }
    return g.add(contrast, reg);
}

ad::Var loss_pre(ad::Graph& g, const nets::ModelBundle& m, ad::Var z1, ad::Var z2) {
    if (m.specs.dual_predictors.empty()) throw ConfigError("loss_pre: model has no dual predictors");
    require_same_shape(g.value(z1), g.value(z2), "loss_pre");
    ad::Var to2 = nets::dual_predict(g, m, 0, z1);
    ad::Var to1 = nets::dual_predict(g, m, 1, z2);
    return g.add(g.squared_l2_norm(g.subtract(to2, z2)), g.squared_l2_norm(g.subtract(to1, z1)));
}

BiviewBatch BiviewBatch::complete_batch(ad::Graph& g, Tensor x1, Tensor x2) {
    if (x1.rows() != x2.rows()) throw DimensionError("bi-view batch: row count mismatch");
    BiviewBatch b;
    const int64_t rows = x1.rows();
    b.x1 = g.input(std::move(x1));
    b.x2 = g.input(std::move(x2));
    b.avail1.resize(static_cast<size_t>(rows));
    for (int64_t i = 0; i < rows; ++i) b.avail1[static_cast<size_t>(i)] = i;
    b.avail2 = b.avail1;
    b.complete = b.avail1;
    return b;
}

namespace {

// Positions of `wanted` inside ascending `have`.
std::vector<int64_t> positions_in(const std::vector<int64_t>& have, const std::vector<int64_t>& wanted) {
    std::vector<int64_t> pos;
    pos.reserve(wanted.size());
    size_t h = 0;
    for (int64_t w : wanted) {
        while (h < have.size() && have[h] < w) ++h;
        if (h == have.size() || have[h] != w) throw ContractError("composite batch: complete row not in availability list");
        pos.push_back(static_cast<int64_t>(h));
    }
    return pos;
}

}  // namespace

CompositeOut loss_composite_biview(ad::Graph& g, const nets::ModelBundle& m, const BiviewBatch& batch,
                                   const LossConfig& cfg, bool incomplete) {
    if (m.num_views() != 2) throw ConfigError("loss_composite_biview: model must have exactly two views");
    cfg.validate();
    const int64_t rows = g.value(batch.x1).rows();
    if (g.value(batch.x2).rows() != rows) throw DimensionError("loss_composite_biview: batch row mismatch");

    auto all_rows = [&](const std::vector<int64_t>& idx) { return static_cast<int64_t>(idx.size()) == rows; };
    const bool has1 = !batch.avail1.empty();
    const bool has2 = !batch.avail2.empty();
    ad::Var x1a, x2a, z1, z2;
    if (has1) {
        x1a = all_rows(batch.avail1) ? batch.x1 : g.gather_rows(batch.x1, batch.avail1);
        z1 = nets::encode(g, m, 0, x1a);
    }
    if (has2) {
        x2a = all_rows(batch.avail2) ? batch.x2 : g.gather_rows(batch.x2, batch.avail2);
        z2 = nets::encode(g, m, 1, x2a);
    }

    const bool contrast_ok = batch.complete.size() >= 2;
    ad::Var z1c, z2c;
    if (contrast_ok) {
        z1c = batch.complete == batch.avail1 ? z1 : g.gather_rows(z1, positions_in(batch.avail1, batch.complete));
        z2c = batch.complete == batch.avail2 ? z2 : g.gather_rows(z2, positions_in(batch.avail2, batch.complete));
    }

    CompositeOut out;
    ad::Var total;
    auto push_term = [&](const std::string& name, double weight, ad::Var term) {
        out.breakdown.terms.emplace_back(name, g.scalar_value(term));
        ad::Var weighted = weight == 1.0 ? term : g.scalar_multiply(term, weight);
        total = total.valid() ? g.add(total, weighted) : weighted;
    };
    auto push_zero = [&](const std::string& name) { out.breakdown.terms.emplace_back(name, 0.0); };

    // Cluster-level contrast, always on.
    if (contrast_ok)
        push_term("clu", 1.0, loss_clu(g, z1c, z2c, cfg.alpha));
    else
        push_zero("clu");

    if (cfg.use_ins) {
        if (contrast_ok) {
            ad::Var ins = cfg.instance == LossConfig::Instance::Mse
                              ? loss_mse(g, z1c, z2c)
                              : loss_info(g, z1c, z2c, cfg.tau, cfg.info_within_view);
            push_term("ins", cfg.lambda1, ins);
        } else {
            push_zero("ins");
        }
    }

    {
        std::vector<ad::Var> xs, x_hats;
        if (has1) {
            xs.push_back(x1a);
            x_hats.push_back(nets::decode(g, m, 0, z1));
        }
        if (has2) {
            xs.push_back(x2a);
            x_hats.push_back(nets::decode(g, m, 1, z2));
        }
        if (!xs.empty())
            push_term("rec", cfg.lambda2, loss_rec(g, xs, x_hats));
        else
            push_zero("rec");
    }

    if (cfg.use_var) {
        std::vector<ad::Var> var_views;
        if (batch.avail1.size() >= 2) var_views.push_back(z1);
        if (batch.avail2.size() >= 2) var_views.push_back(z2);
        if (!var_views.empty())
            push_term("var", cfg.lambda3, loss_var(g, var_views, cfg.gamma, cfg.eps_var));
        else
            push_zero("var");
    }

    if (cfg.use_cla) {
        if (contrast_ok)
            push_term("cla", cfg.lambda4, loss_cla(g, m, z1c, z2c));
        else
            push_zero("cla");
    }

    if (incomplete) {
        if (contrast_ok)
            push_term("pre", cfg.pre_weight, loss_pre(g, m, z1c, z2c));
        else
            push_zero("pre");
    }

    if (!total.valid()) total = g.constant(Tensor::scalar(0.0));
    out.total = total;
    out.breakdown.total = g.scalar_value(total);
    return out;
}

CompositeOut loss_composite_multiview(ad::Graph& g, const nets::ModelBundle& m, const MultiviewBatch& batch,
                                      const LossConfig& cfg) {
    if (m.num_views() < 2) throw ConfigError("loss_composite_multiview: model must have at least two views");
    if (static_cast<int>(batch.xs.size()) != m.num_views())
        throw DimensionError("loss_composite_multiview: batch view count mismatch");
    cfg.validate();

    std::vector<ad::Var> zs, x_hats, hs, qs;
    for (int v = 0; v < m.num_views(); ++v) {
        ad::Var z = nets::encode(g, m, v, batch.xs[static_cast<size_t>(v)]);
        zs.push_back(z);
        x_hats.push_back(nets::decode(g, m, v, z));
        hs.push_back(nets::feature_mlp(g, m, z));
        qs.push_back(nets::cluster_mlp(g, m, z));
    }

    CompositeOut out;
    ad::Var total;
    auto push_term = [&](const std::string& name, double weight, ad::Var term) {
        out.breakdown.terms.emplace_back(name, g.scalar_value(term));
        ad::Var weighted = weight == 1.0 ? term : g.scalar_multiply(term, weight);
        total = total.valid() ? g.add(total, weighted) : weighted;
    };

    push_term("rec", 1.0, loss_rec(g, batch.xs, x_hats));
    push_term("var", cfg.mu1, loss_var(g, zs, cfg.gamma, cfg.eps_var));
    push_term("Q", 1.0, loss_cluster_contrast(g, qs, cfg.tau2));
    push_term("H", 1.0, loss_ntxent_instance(g, hs, cfg.tau1));
    push_term("mcla", cfg.mu2, loss_mcla(g, m, zs));

    out.total = total;
    out.breakdown.total = g.scalar_value(total);
    return out;
}

}  // namespace mvclab::losses
