#include "mvclab/training.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "mvclab/constants.hpp"
#include "mvclab/errors.hpp"

namespace mvclab::train {

namespace {

constexpr uint64_t kShuffleSalt = 0x9e3779b97f4a7c15ULL;

std::vector<std::vector<int64_t>> make_batches(int64_t m, int batch_size, std::mt19937_64& rng) {
    std::vector<int64_t> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<int64_t>> batches;
    for (int64_t start = 0; start < m; start += batch_size) {
        const int64_t end = std::min<int64_t>(start + batch_size, m);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    // The variance loss needs >= 2 rows; a short tail merges backwards.
    if (batches.size() > 1 && batches.back().size() < 2) {
        auto tail = std::move(batches.back());
        batches.pop_back();
        batches.back().insert(batches.back().end(), tail.begin(), tail.end());
    }
    return batches;
}

void accumulate(losses::LossBreakdown& into, const losses::LossBreakdown& part) {
    if (into.terms.empty()) {
        into = part;
        return;
    }
    if (into.terms.size() != part.terms.size()) throw ContractError("loss breakdown shape changed mid-epoch");
    for (size_t i = 0; i < part.terms.size(); ++i) {
        if (into.terms[i].first != part.terms[i].first) throw ContractError("loss breakdown term order changed");
        into.terms[i].second += part.terms[i].second;
    }
    into.total += part.total;
}

void require_finite_epoch(const losses::LossBreakdown& row, int epoch) {
    if (!std::isfinite(row.total))
        throw std::runtime_error("training diverged: non-finite total loss at epoch " + std::to_string(epoch));
}

std::vector<int64_t> all_indices(int64_t n) {
    std::vector<int64_t> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

nets::MLPSpec mirror_decoder(const nets::MLPSpec& enc) {
    nets::MLPSpec dec;
    dec.widths.assign(enc.widths.rbegin(), enc.widths.rend());
    dec.head = nets::Head::Linear;
    return dec;
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0 || pretrain_epochs < 0 || contrast_epochs < 0 || finetune_epochs < 0)
        throw ConfigError("train config: negative epoch count");
    if (batch_size < 2) throw ConfigError("train config: batch size must be >= 2");
    if (lr <= 0.0) throw ConfigError("train config: learning rate must be positive");
    if (k < 2) throw ConfigError("train config: k must be >= 2");
    if (h < 1) throw ConfigError("train config: h must be >= 1");
    if (eval_every < 1) throw ConfigError("train config: eval_every must be >= 1");
    loss.validate();
}

int TrainConfig::resolved_d(bool biview) const {
    if (d > 0) return d;
    return biview ? 2 * k : 16;  // bi-view default: 2K over-cluster classes
}

AdamState adam_init(const ParamStore& ps, const std::vector<std::string>& names) {
    AdamState st;
    for (const std::string& name : names) {
        const Tensor& p = ps.get(name);
        st.slots[name] = {Tensor::zeros(p.shape()), Tensor::zeros(p.shape())};
    }
    return st;
}

void adam_step(ParamStore& ps, const ad::GradientMap& grads, AdamState& state, double lr) {
    ++state.step;
    const double b1 = AdamState::kBeta1;
    const double b2 = AdamState::kBeta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (auto& [name, slot] : state.slots) {
        Tensor& p = ps.get(name);
        const Tensor* g = nullptr;
        if (auto it = grads.find(name); it != grads.end()) g = &it->second;
        for (int64_t i = 0; i < p.numel(); ++i) {
            const double gi = g ? (*g)[i] : 0.0;
            if (!std::isfinite(gi))
                throw std::runtime_error("adam_step: non-finite gradient for parameter '" + name + "'");
            slot.m[i] = b1 * slot.m[i] + (1.0 - b1) * gi;
            slot.v[i] = b2 * slot.v[i] + (1.0 - b2) * gi * gi;
            const double mhat = slot.m[i] / bc1;
            const double vhat = slot.v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::kEps);
        }
    }
}

void TrainHistory::write_losses_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    // Union of term names in first-seen order; absent terms print 0.
    std::vector<std::string> cols;
    for (const LossRow& row : loss_rows)
        for (const auto& [name, value] : row.breakdown.terms)
            if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
    out << "epoch,step";
    for (const std::string& c : cols) out << ',' << c;
    out << ",total\n";
    for (const LossRow& row : loss_rows) {
        out << row.epoch << ',' << row.step;
        for (const std::string& c : cols) out << ',' << data::fmt_double(row.breakdown.has(c) ? row.breakdown.term(c) : 0.0);
        out << ',' << data::fmt_double(row.breakdown.total) << '\n';
    }
}

void TrainHistory::write_metrics_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << "epoch,acc,nmi,ari,pur\n";
    char buf[256];
    for (const auto& [epoch, r] : metric_rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f\n", epoch, r.acc, r.nmi, r.ari, r.pur);
        out << buf;
    }
}

void TrainHistory::write_stages_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << "stage,first_epoch,epochs\n";
    for (const Stage& s : stages) out << s.name << ',' << s.first_epoch << ',' << s.epochs << '\n';
}

std::vector<Tensor> encode_views(const nets::ModelBundle& model, const data::ViewSet& vs, bool recover) {
    const int v_count = vs.num_views();
    if (v_count != model.num_views()) throw ConfigError("encode_views: view count mismatch");
    const int64_t m = vs.samples();
    const int64_t d = model.embed_dim();

    ad::Graph g;
    std::vector<Tensor> out;
    if (!recover || !vs.has_mask()) {
        for (int v = 0; v < v_count; ++v)
            out.push_back(g.value(nets::encode(g, model, v, g.input(vs.views[static_cast<size_t>(v)]))));
        return out;
    }

    if (v_count != 2) throw ConfigError("encode_views: recovery is bi-view only");
    if (model.specs.dual_predictors.empty())
        throw ConfigError("encode_views: recovery requires dual predictors");

    std::array<std::vector<int64_t>, 2> avail;
    for (int64_t i = 0; i < m; ++i)
        for (int v = 0; v < 2; ++v)
            if (vs.view_available(i, v)) avail[static_cast<size_t>(v)].push_back(i);

    std::array<ad::Var, 2> z_avail;
    for (int v = 0; v < 2; ++v)
        z_avail[static_cast<size_t>(v)] = nets::encode(
            g, model, v, g.input(take_rows(vs.views[static_cast<size_t>(v)], avail[static_cast<size_t>(v)])));

    for (int v = 0; v < 2; ++v) {
        const int other = 1 - v;
        // Rows missing view v, located inside the other view's availability list.
        std::vector<int64_t> missing_pos, missing_rows;
        for (size_t r = 0; r < avail[static_cast<size_t>(other)].size(); ++r) {
            const int64_t sample = avail[static_cast<size_t>(other)][r];
            if (!vs.view_available(sample, v)) {
                missing_pos.push_back(static_cast<int64_t>(r));
                missing_rows.push_back(sample);
            }
        }
        Tensor full({m, d});
        const Tensor& have = g.value(z_avail[static_cast<size_t>(v)]);
        for (size_t r = 0; r < avail[static_cast<size_t>(v)].size(); ++r)
            for (int64_t j = 0; j < d; ++j)
                full.at(avail[static_cast<size_t>(v)][r], j) = have.at(static_cast<int64_t>(r), j);
        if (!missing_pos.empty()) {
            ad::Var predicted = nets::dual_predict(
                g, model, other, g.gather_rows(z_avail[static_cast<size_t>(other)], missing_pos));
            const Tensor& pred = g.value(predicted);
            for (size_t r = 0; r < missing_rows.size(); ++r)
                for (int64_t j = 0; j < d; ++j) full.at(missing_rows[r], j) = pred.at(static_cast<int64_t>(r), j);
        }
        out.push_back(std::move(full));
    }
    return out;
}

std::vector<Tensor> soft_assignments(const nets::ModelBundle& model, const data::ViewSet& vs) {
    ad::Graph g;
    std::vector<Tensor> out;
    for (int v = 0; v < vs.num_views(); ++v) {
        ad::Var z = nets::encode(g, model, v, g.input(vs.views[static_cast<size_t>(v)]));
        out.push_back(g.value(nets::cluster_mlp(g, model, z)));
    }
    return out;
}

BiviewRun train_biview(const data::ViewSet& vs, const TrainConfig& cfg, BiviewVariant variant, bool incomplete) {
    cfg.validate();
    vs.validate();
    if (vs.num_views() != 2) throw ConfigError("train_biview: dataset must have exactly two views");
    if (vs.samples() < 2) throw ConfigError("train_biview: need at least two samples");
    if (incomplete && !vs.has_mask()) throw ConfigError("train_biview: incomplete mode requires a mask");

    losses::LossConfig lc = cfg.loss;
    switch (variant) {
        case BiviewVariant::McmvcM: lc.instance = losses::LossConfig::Instance::Mse; break;
        case BiviewVariant::McmvcI: lc.instance = losses::LossConfig::Instance::InfoNce; break;
        case BiviewVariant::Baseline:
            lc.use_ins = lc.use_var = lc.use_cla = false;
            lc.lambda2 = lc.mu_base;
            break;
    }

    const int d = cfg.resolved_d(true);
    nets::ModelSpecs specs;
    for (int v = 0; v < 2; ++v) {
        nets::MLPSpec enc;
        enc.widths.push_back(vs.views[static_cast<size_t>(v)].cols());
        enc.widths.insert(enc.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
        enc.widths.push_back(d);
        enc.head = nets::Head::Softmax;  // rows are over-cluster probabilities
        specs.encoders.push_back(enc);
        specs.decoders.push_back(mirror_decoder(enc));
    }
    specs.view_predictor = nets::MLPSpec{{static_cast<int64_t>(d), 1}, nets::Head::Sigmoid};
    if (incomplete) {
        nets::MLPSpec dual;
        dual.widths.push_back(d);
        dual.widths.insert(dual.widths.end(), cfg.dual_hidden.begin(), cfg.dual_hidden.end());
        dual.widths.push_back(d);
        dual.head = nets::Head::Linear;
        specs.dual_predictors = {dual, dual};
    }

    BiviewRun run;
    run.model = nets::init_model(specs, cfg.seed);
    AdamState adam = adam_init(run.model.params, run.model.params.names());
    std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleSalt);

    const int64_t m = vs.samples();
    int64_t global_step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        losses::LossBreakdown epoch_sum;
        for (const auto& batch_rows : make_batches(m, cfg.batch_size, shuffle_rng)) {
            ad::Graph g;
            losses::BiviewBatch batch;
            batch.x1 = g.input(take_rows(vs.views[0], batch_rows));
            batch.x2 = g.input(take_rows(vs.views[1], batch_rows));
            if (incomplete) {
                for (size_t r = 0; r < batch_rows.size(); ++r) {
                    const bool a1 = vs.view_available(batch_rows[r], 0);
                    const bool a2 = vs.view_available(batch_rows[r], 1);
                    if (a1) batch.avail1.push_back(static_cast<int64_t>(r));
                    if (a2) batch.avail2.push_back(static_cast<int64_t>(r));
                    if (a1 && a2) batch.complete.push_back(static_cast<int64_t>(r));
                }
            } else {
                batch.avail1 = all_indices(static_cast<int64_t>(batch_rows.size()));
                batch.avail2 = batch.avail1;
                batch.complete = batch.avail1;
            }
            losses::CompositeOut co = losses::loss_composite_biview(g, run.model, batch, lc, incomplete);
            adam_step(run.model.params, g.backward(co.total), adam, cfg.lr);
            ++global_step;
            accumulate(epoch_sum, co.breakdown);
        }
        require_finite_epoch(epoch_sum, epoch);
        run.history.loss_rows.push_back({epoch, global_step, epoch_sum});

        if (vs.has_labels() && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
            std::vector<Tensor> zs = encode_views(run.model, vs, incomplete);
            std::vector<int> labels = cluster::final_clustering_biview(zs[0], zs[1], cfg.k, cfg.seed);
            run.history.metric_rows.emplace_back(epoch, metrics::evaluate(labels, vs.labels));
        }
    }
    run.history.stages.push_back({"train", 1, cfg.epochs});

    std::vector<Tensor> zs = encode_views(run.model, vs, incomplete);
    run.labels = cluster::final_clustering_biview(zs[0], zs[1], cfg.k, cfg.seed);
    return run;
}

namespace {

// One optimization stage over mini-batches of a multi-view model.
// `build` returns the stage objective for a batch of row indices.
void run_stage(const std::string& name, int epochs, int batch_size, double lr, nets::ModelBundle& model,
               const std::vector<std::string>& trainable, std::mt19937_64& shuffle_rng, int64_t m,
               const std::function<losses::CompositeOut(ad::Graph&, const std::vector<int64_t>&)>& build,
               TrainHistory& history, int& epoch_base, int64_t& global_step,
               const std::function<void(int)>& on_epoch_end) {
    AdamState adam = adam_init(model.params, trainable);
    for (int e = 1; e <= epochs; ++e) {
        losses::LossBreakdown epoch_sum;
        for (const auto& rows : make_batches(m, batch_size, shuffle_rng)) {
            ad::Graph g;
            losses::CompositeOut co = build(g, rows);
            adam_step(model.params, g.backward(co.total), adam, lr);
            ++global_step;
            accumulate(epoch_sum, co.breakdown);
        }
        const int epoch = epoch_base + e;
        require_finite_epoch(epoch_sum, epoch);
        history.loss_rows.push_back({epoch, global_step, epoch_sum});
        if (on_epoch_end) on_epoch_end(epoch);
    }
    history.stages.push_back({name, epoch_base + 1, epochs});
    epoch_base += epochs;
}

}  // namespace

MultiviewRun train_mcmvc_plus_plus(const data::ViewSet& vs, const TrainConfig& cfg, bool enhance,
                                   const StageObserver& observer) {
    cfg.validate();
    vs.validate();
    const int v_count = vs.num_views();
    if (v_count < 2) throw ConfigError("train_mcmvc_plus_plus: at least two views required");
    if (vs.has_mask()) {
        for (int64_t i = 0; i < vs.samples(); ++i)
            for (int v = 0; v < v_count; ++v)
                if (!vs.view_available(i, v))
                    throw ConfigError("train_mcmvc_plus_plus: the staged pipeline needs complete data");
    }
    if (vs.samples() < cfg.k) throw ConfigError("train_mcmvc_plus_plus: fewer samples than clusters");

    const int d = cfg.resolved_d(false);
    nets::ModelSpecs specs;
    for (int v = 0; v < v_count; ++v) {
        nets::MLPSpec enc;
        enc.widths.push_back(vs.views[static_cast<size_t>(v)].cols());
        enc.widths.insert(enc.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
        enc.widths.push_back(d);
        enc.head = nets::Head::Linear;
        specs.encoders.push_back(enc);
        specs.decoders.push_back(mirror_decoder(enc));
    }
    specs.view_predictor = nets::MLPSpec{{static_cast<int64_t>(d), static_cast<int64_t>(v_count)}, nets::Head::Softmax};
    specs.feature_mlp = nets::MLPSpec{{static_cast<int64_t>(d), static_cast<int64_t>(cfg.h)}, nets::Head::Linear};
    specs.cluster_mlp = nets::MLPSpec{{static_cast<int64_t>(d), static_cast<int64_t>(cfg.k)}, nets::Head::Softmax};

    MultiviewRun run;
    run.model = nets::init_model(specs, cfg.seed);
    std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleSalt);
    const int64_t m = vs.samples();
    int epoch_base = 0;
    int64_t global_step = 0;

    std::vector<std::string> enc_dec_prefixes, contrast_prefixes, finetune_prefixes;
    for (int v = 0; v < v_count; ++v) {
        enc_dec_prefixes.push_back(nets::encoder_prefix(v));
        enc_dec_prefixes.push_back(nets::decoder_prefix(v));
        contrast_prefixes.push_back(nets::encoder_prefix(v));
        finetune_prefixes.push_back(nets::encoder_prefix(v));
    }
    contrast_prefixes.push_back(nets::kFeatureMlpPrefix);
    contrast_prefixes.push_back(nets::kClusterMlpPrefix);
    contrast_prefixes.push_back(nets::kPredictorPrefix);
    finetune_prefixes.push_back(nets::kClusterMlpPrefix);

    auto gather_views = [&](ad::Graph& g, const std::vector<int64_t>& rows) {
        std::vector<ad::Var> xs;
        for (int v = 0; v < v_count; ++v) xs.push_back(g.input(take_rows(vs.views[static_cast<size_t>(v)], rows)));
        return xs;
    };
    auto eval_epoch = [&](int epoch) {
        if (!vs.has_labels() || epoch % cfg.eval_every != 0) return;
        run.history.metric_rows.emplace_back(
            epoch, metrics::evaluate(cluster::fuse_assignments(soft_assignments(run.model, vs)), vs.labels));
    };

    // Stage 1: feature-facet pretraining of encoders and decoders.
    run_stage("pretrain", cfg.pretrain_epochs, cfg.batch_size, cfg.lr, run.model,
              nets::params_with_prefixes(run.model.params, enc_dec_prefixes), shuffle_rng, m,
              [&](ad::Graph& g, const std::vector<int64_t>& rows) {
                  std::vector<ad::Var> xs = gather_views(g, rows);
                  std::vector<ad::Var> zs, x_hats;
                  for (int v = 0; v < v_count; ++v) {
                      zs.push_back(nets::encode(g, run.model, v, xs[static_cast<size_t>(v)]));
                      x_hats.push_back(nets::decode(g, run.model, v, zs.back()));
                  }
                  losses::CompositeOut co;
                  ad::Var rec = losses::loss_rec(g, xs, x_hats);
                  ad::Var var = losses::loss_var(g, zs, cfg.loss.gamma, cfg.loss.eps_var);
                  co.breakdown.terms = {{"rec", g.scalar_value(rec)}, {"var", g.scalar_value(var)}};
                  co.total = g.add(rec, g.scalar_multiply(var, cfg.loss.mu1));
                  co.breakdown.total = g.scalar_value(co.total);
                  return co;
              },
              run.history, epoch_base, global_step, eval_epoch);
    if (observer) observer("pretrain", run.model);

    // Stage 2: contrast + view-label training of W_H, W_Q and encoders.
    run_stage("contrast", cfg.contrast_epochs, cfg.batch_size, cfg.lr, run.model,
              nets::params_with_prefixes(run.model.params, contrast_prefixes), shuffle_rng, m,
              [&](ad::Graph& g, const std::vector<int64_t>& rows) {
                  std::vector<ad::Var> xs = gather_views(g, rows);
                  std::vector<ad::Var> zs, hs, qs;
                  for (int v = 0; v < v_count; ++v) {
                      zs.push_back(nets::encode(g, run.model, v, xs[static_cast<size_t>(v)]));
                      hs.push_back(nets::feature_mlp(g, run.model, zs.back()));
                      qs.push_back(nets::cluster_mlp(g, run.model, zs.back()));
                  }
                  losses::CompositeOut co;
                  ad::Var h_loss = losses::loss_ntxent_instance(g, hs, cfg.loss.tau1);
                  ad::Var q_loss = losses::loss_cluster_contrast(g, qs, cfg.loss.tau2);
                  ad::Var mcla = losses::loss_mcla(g, run.model, zs);
                  co.breakdown.terms = {{"H", g.scalar_value(h_loss)},
                                        {"Q", g.scalar_value(q_loss)},
                                        {"mcla", g.scalar_value(mcla)}};
                  co.total = g.add(g.add(h_loss, q_loss), g.scalar_multiply(mcla, cfg.loss.mu2));
                  co.breakdown.total = g.scalar_value(co.total);
                  return co;
              },
              run.history, epoch_base, global_step, eval_epoch);
    if (observer) observer("contrast", run.model);

    if (enhance) {
        // Stage 3: K-means on the per-view contrast features.
        std::vector<std::vector<int>> kmeans_labels;
        {
            ad::Graph g;
            for (int v = 0; v < v_count; ++v) {
                ad::Var z = nets::encode(g, run.model, v, g.input(vs.views[static_cast<size_t>(v)]));
                const Tensor h = g.value(nets::feature_mlp(g, run.model, z));
                kmeans_labels.push_back(
                    cluster::kmeans_best_of(h, cfg.k, cfg.seed + static_cast<uint64_t>(v)).assignments);
            }
        }
        if (observer) observer("assign", run.model);

        // Stage 4: per-view Hungarian matching against the cluster-MLP labels.
        std::vector<Tensor> targets;
        {
            std::vector<Tensor> qs = soft_assignments(run.model, vs);
            for (int v = 0; v < v_count; ++v) {
                std::vector<int> mlp_labels(static_cast<size_t>(m));
                const Tensor& q = qs[static_cast<size_t>(v)];
                for (int64_t i = 0; i < m; ++i) {
                    int best = 0;
                    for (int j = 1; j < cfg.k; ++j)
                        if (q.at(i, j) > q.at(i, best)) best = j;
                    mlp_labels[static_cast<size_t>(i)] = best;
                }
                run.result.correspondences.push_back(
                    cluster::match_assignments(mlp_labels, kmeans_labels[static_cast<size_t>(v)], cfg.k));
                targets.push_back(cluster::enhancement_target(run.result.correspondences.back(),
                                                              kmeans_labels[static_cast<size_t>(v)], cfg.k));
            }
        }
        if (observer) observer("match", run.model);

        // Stage 5: cross-entropy fine-tuning of W_Q and encoders.
        run_stage("finetune", cfg.finetune_epochs, cfg.batch_size, cfg.lr, run.model,
                  nets::params_with_prefixes(run.model.params, finetune_prefixes), shuffle_rng, m,
                  [&](ad::Graph& g, const std::vector<int64_t>& rows) {
                      std::vector<ad::Var> xs = gather_views(g, rows);
                      ad::Var total;
                      for (int v = 0; v < v_count; ++v) {
                          ad::Var z = nets::encode(g, run.model, v, xs[static_cast<size_t>(v)]);
                          ad::Var q = nets::cluster_mlp(g, run.model, z);
                          ad::Var target = g.constant(take_rows(targets[static_cast<size_t>(v)], rows));
                          ad::Var ce = g.scalar_multiply(
                              g.sum(g.multiply(target, g.log(g.clamp(q, kClampFloor, 1.0)))), -1.0);
                          total = total.valid() ? g.add(total, ce) : ce;
                      }
                      losses::CompositeOut co;
                      co.total = total;
                      co.breakdown.terms = {{"P", g.scalar_value(total)}};
                      co.breakdown.total = g.scalar_value(total);
                      return co;
                  },
                  run.history, epoch_base, global_step, eval_epoch);
        if (observer) observer("finetune", run.model);
    }

    // Stage 6: fuse the per-view soft assignments.
    run.result.q_views = soft_assignments(run.model, vs);
    run.result.labels = cluster::fuse_assignments(run.result.q_views);
    if (vs.has_labels())
        run.history.metric_rows.emplace_back(epoch_base, metrics::evaluate(run.result.labels, vs.labels));
    if (observer) observer("fuse", run.model);
    return run;
}

std::vector<std::array<bool, 3>> table1_grid() {
    return {{false, false, false}, {true, false, false}, {false, true, false}, {true, true, false},
            {false, false, true}, {true, false, true},  {false, true, true},  {true, true, true}};
}

std::vector<AblationRow> run_ablation(const data::ViewSet& vs, const TrainConfig& cfg, BiviewVariant variant,
                                      const std::vector<std::array<bool, 3>>& grid, int runs) {
    if (!vs.has_labels()) throw ConfigError("run_ablation: ground-truth labels required");
    if (runs < 1) throw ConfigError("run_ablation: runs must be >= 1");
    if (grid.empty()) throw ConfigError("run_ablation: empty grid");

    const int total_jobs = static_cast<int>(grid.size()) * runs;
    std::vector<metrics::MetricsReport> reports(static_cast<size_t>(total_jobs));
    parallel_runs(total_jobs, [&](int job) {
        const int row = job / runs;
        const int r = job % runs;
        TrainConfig c = cfg;
        c.seed = cfg.seed + static_cast<uint64_t>(r);
        c.loss.use_ins = grid[static_cast<size_t>(row)][0];
        c.loss.use_var = grid[static_cast<size_t>(row)][1];
        c.loss.use_cla = grid[static_cast<size_t>(row)][2];
        c.loss.lambda2 = cfg.loss.mu_base;  // every row sits on the baseline objective
        BiviewRun out = train_biview(vs, c, variant, false);
        reports[static_cast<size_t>(job)] = metrics::evaluate(out.labels, vs.labels);
    });

    std::vector<AblationRow> table;
    for (size_t row = 0; row < grid.size(); ++row) {
        AblationRow r;
        r.ins = grid[row][0];
        r.var = grid[row][1];
        r.cla = grid[row][2];
        for (int i = 0; i < runs; ++i) {
            const metrics::MetricsReport& rep = reports[row * static_cast<size_t>(runs) + static_cast<size_t>(i)];
            r.mean.acc += rep.acc;
            r.mean.nmi += rep.nmi;
            r.mean.ari += rep.ari;
            r.mean.pur += rep.pur;
        }
        r.mean.acc /= runs;
        r.mean.nmi /= runs;
        r.mean.ari /= runs;
        r.mean.pur /= runs;
        table.push_back(r);
    }
    return table;
}

void parallel_runs(int n, const std::function<void(int)>& fn) {
    int cap = 1;
    if (const char* env = std::getenv("MVCLAB_THREADS")) {
        try {
            cap = std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw ConfigError("MVCLAB_THREADS must be a positive integer");
        }
    }
    if (cap <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(std::min(cap, n)));
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(cap, n); ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mvclab::train
