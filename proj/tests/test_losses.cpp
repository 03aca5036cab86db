#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mvclab/errors.hpp"
#include "mvclab/losses.hpp"
#include "mvclab/networks.hpp"

using namespace mvclab;
using testutil::fd_check_inputs;
using testutil::random_prob_rows;
using testutil::random_tensor;
using testutil::random_tensor_no_kink;

namespace {

double value_of(std::function<ad::Var(ad::Graph&)> build) {
    ad::Graph g;
    return g.scalar_value(build(g));
}

// ----- independent plain-loop oracles -----

double cos_sim(const Tensor& a, int64_t ra, const Tensor& b, int64_t rb) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int64_t j = 0; j < a.cols(); ++j) {
        dot += a.at(ra, j) * b.at(rb, j);
        na += a.at(ra, j) * a.at(ra, j);
        nb += b.at(rb, j) * b.at(rb, j);
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double rec_oracle(const Tensor& x, const Tensor& xh) {
    double s = 0.0;
    for (int64_t i = 0; i < x.numel(); ++i) s += (x[i] - xh[i]) * (x[i] - xh[i]);
    return s;
}

double info_oracle(const Tensor& z1, const Tensor& z2, double tau) {
    const int64_t m = z1.rows();
    double denom = 0.0;
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < m; ++j)
            if (i != j) denom += std::exp(cos_sim(z1, i, z2, j) / tau);
    double loss = 0.0;
    for (int64_t t = 0; t < m; ++t) loss -= std::log(std::exp(cos_sim(z1, t, z2, t) / tau) / denom);
    return loss;
}

double ntxent_oracle(const std::vector<Tensor>& hs, double tau) {
    const int v_count = static_cast<int>(hs.size());
    const int64_t m = hs[0].rows();
    double total = 0.0;
    for (int i = 0; i < v_count; ++i) {
        for (int j = 0; j < v_count; ++j) {
            if (i == j) continue;
            double l = 0.0;
            for (int64_t t = 0; t < m; ++t) {
                const double num = std::exp(cos_sim(hs[i], t, hs[j], t) / tau);
                double den = -std::exp(1.0 / tau);
                for (int64_t s = 0; s < m; ++s)
                    den += std::exp(cos_sim(hs[i], t, hs[i], s) / tau) + std::exp(cos_sim(hs[i], t, hs[j], s) / tau);
                l -= std::log(num / den);
            }
            total += l / static_cast<double>(m);
        }
    }
    return 0.5 * total;
}

Tensor transpose_oracle(const Tensor& t) {
    Tensor out({t.cols(), t.rows()});
    for (int64_t i = 0; i < t.rows(); ++i)
        for (int64_t j = 0; j < t.cols(); ++j) out.at(j, i) = t.at(i, j);
    return out;
}

double cluster_contrast_oracle(const std::vector<Tensor>& qs, double tau) {
    std::vector<Tensor> cols;
    for (const Tensor& q : qs) cols.push_back(transpose_oracle(q));
    double total = ntxent_oracle(cols, tau);
    for (const Tensor& q : qs) {
        for (int64_t j = 0; j < q.cols(); ++j) {
            double u = 0.0;
            for (int64_t i = 0; i < q.rows(); ++i) u += q.at(i, j);
            u /= static_cast<double>(q.rows());
            if (u > 0.0) total += u * std::log(u);
        }
    }
    return total;
}

double clu_oracle(const Tensor& z1, const Tensor& z2, double alpha) {
    const int64_t m = z1.rows(), d = z1.cols();
    Tensor p({d, d});
    for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (int64_t t = 0; t < m; ++t) s += z1.at(t, i) * z2.at(t, j);
            p.at(i, j) = s / static_cast<double>(m);
        }
    for (int64_t i = 0; i < d; ++i)
        for (int64_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (p.at(i, j) + p.at(j, i));
            p.at(i, j) = p.at(j, i) = v;
        }
    std::vector<double> r(static_cast<size_t>(d), 0.0), c(static_cast<size_t>(d), 0.0);
    for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j) {
            r[static_cast<size_t>(i)] += p.at(i, j);
            c[static_cast<size_t>(j)] += p.at(i, j);
        }
    double mi = 0.0, h1 = 0.0, h2 = 0.0;
    for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j)
            if (p.at(i, j) > 0.0)
                mi += p.at(i, j) * std::log(p.at(i, j) / (r[static_cast<size_t>(i)] * c[static_cast<size_t>(j)]));
    for (double x : r)
        if (x > 0.0) h1 -= x * std::log(x);
    for (double x : c)
        if (x > 0.0) h2 -= x * std::log(x);
    return -(mi + alpha * (h1 + h2));
}

// Minimal bi-view model over raw widths (e1, e2) with embedding width d.
nets::ModelBundle make_biview_model(int64_t e1, int64_t e2, int64_t d, bool dual, uint64_t seed) {
    nets::ModelSpecs specs;
    specs.encoders = {nets::MLPSpec{{e1, 6, d}, nets::Head::Softmax}, nets::MLPSpec{{e2, 6, d}, nets::Head::Softmax}};
    specs.decoders = {nets::MLPSpec{{d, 6, e1}, nets::Head::Linear}, nets::MLPSpec{{d, 6, e2}, nets::Head::Linear}};
    specs.view_predictor = nets::MLPSpec{{d, 1}, nets::Head::Sigmoid};
    if (dual)
        specs.dual_predictors = {nets::MLPSpec{{d, d}, nets::Head::Linear}, nets::MLPSpec{{d, d}, nets::Head::Linear}};
    return nets::init_model(specs, seed);
}

void zero_params(ParamStore& ps, const std::string& prefix) {
    for (const std::string& name : ps.names())
        if (name.rfind(prefix, 0) == 0) {
            Tensor& t = ps.get(name);
            for (int64_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
        }
}

}  // namespace

TEST_CASE("loss_rec: identity, frozen pair, direct oracle") {
    std::mt19937_64 rng(42);
    Tensor x = random_tensor({4, 3}, rng);
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var xv = g.input(x);
              return losses::loss_rec(g, {xv}, {xv});
          }) == 0.0);

    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_rec(g, {g.input(Tensor({1, 2}, {1, 0}))}, {g.input(Tensor({1, 2}, {0, 1}))});
          }) == doctest::Approx(2.0));

    Tensor a = random_tensor({5, 4}, rng), b = random_tensor({5, 4}, rng);
    Tensor c = random_tensor({5, 3}, rng), dd = random_tensor({5, 3}, rng);
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_rec(g, {g.input(a), g.input(c)}, {g.input(b), g.input(dd)});
          }) == doctest::Approx(rec_oracle(a, b) + rec_oracle(c, dd)).epsilon(1e-12));
}

TEST_CASE("loss_var: hinge inactive, frozen constant batch, gradient") {
    std::mt19937_64 rng(1);
    // Wide spread: every per-dimension std is far above gamma = 1.
    Tensor big = random_tensor({20, 3}, rng, -40.0, 40.0);
    CHECK(value_of([&](ad::Graph& g) { return losses::loss_var(g, {g.input(big)}, 1.0, 1e-4); }) == 0.0);

    // Constant batch: S = sqrt(0 + 1e-4) = 0.01 per dim; V=2 views, D=2.
    Tensor c1 = Tensor::full({5, 2}, 3.0), c2 = Tensor::full({5, 2}, -1.0);
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_var(g, {g.input(c1), g.input(c2)}, 1.0, 1e-4);
          }) == doctest::Approx(3.96).epsilon(1e-12));

    for (int t = 0; t < 10; ++t) {
        Tensor z = random_tensor({6, 3}, rng, -0.4, 0.4);  // stds well below gamma: hinge active, no kink
        CHECK(fd_check_inputs({z}, [&](ad::Graph& g, const std::vector<ad::Var>& v) {
                  return losses::loss_var(g, {v[0]}, 1.0, 1e-4);
              }) < 1e-4);
    }

    ad::Graph g;
    CHECK_THROWS_AS(losses::loss_var(g, {g.input(Tensor({1, 2}, {1, 2}))}, 1.0, 1e-4), ContractError);
}

TEST_CASE("loss_var analytic gradient is zero in the inactive region") {
    std::mt19937_64 rng(5);
    Tensor z = random_tensor({12, 3}, rng, -30.0, 30.0);
    ParamStore ps;
    ps.add("z", z);
    ad::Graph g;
    ad::GradientMap grads = g.backward(losses::loss_var(g, {g.param(ps, "z")}, 1.0, 1e-4));
    for (int64_t i = 0; i < z.numel(); ++i) CHECK(grads.at("z")[i] == 0.0);
}

TEST_CASE("loss_cla: half-probability predictor gives 2m ln 2") {
    const int64_t m = 7;
    nets::ModelBundle model = make_biview_model(3, 4, 2, false, 0);
    zero_params(model.params, "pred");
    std::mt19937_64 rng(2);
    Tensor z1 = random_prob_rows(m, 2, rng), z2 = random_prob_rows(m, 2, rng);
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_cla(g, model, g.input(z1), g.input(z2));
          }) == doctest::Approx(2.0 * static_cast<double>(m) * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss_cla tends to zero as predictions approach the targets") {
    ad::Graph g;
    // Probabilities already split by view: view 1 near 0, view 2 near 1.
    ad::Var p1 = g.input(Tensor({3, 1}, {1e-9, 1e-9, 1e-9}));
    ad::Var p2 = g.input(Tensor({3, 1}, {1.0 - 1e-9, 1.0 - 1e-9, 1.0 - 1e-9}));
    CHECK(g.scalar_value(losses::loss_cla_from_probs(g, p1, p2)) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("loss_cla gradient matches finite differences") {
    std::mt19937_64 rng(3);
    nets::ModelBundle model = make_biview_model(3, 4, 3, false, 7);
    Tensor z1 = random_prob_rows(5, 3, rng), z2 = random_prob_rows(5, 3, rng);
    ParamStore ps = model.params;
    auto fn = [&](const ParamStore& p) {
        nets::ModelBundle pm = model;
        pm.params = p;
        ad::Graph g;
        ad::Var loss = losses::loss_cla(g, pm, g.input(z1), g.input(z2));
        return ad::LossEval{g.scalar_value(loss), g.backward(loss)};
    };
    CHECK(ad::finite_diff_check(fn, ps, 1e-5) < 1e-4);
}

TEST_CASE("loss_mcla: uniform predictor gives V m ln V, perfect predictor gives 0") {
    const int64_t m = 5;
    nets::ModelSpecs specs;
    specs.encoders = {nets::MLPSpec{{3, 2}, nets::Head::Linear},
                      nets::MLPSpec{{3, 2}, nets::Head::Linear},
                      nets::MLPSpec{{3, 2}, nets::Head::Linear}};
    specs.decoders = {nets::MLPSpec{{2, 3}, nets::Head::Linear},
                      nets::MLPSpec{{2, 3}, nets::Head::Linear},
                      nets::MLPSpec{{2, 3}, nets::Head::Linear}};
    specs.view_predictor = nets::MLPSpec{{2, 3}, nets::Head::Softmax};
    nets::ModelBundle model = nets::init_model(specs, 0);
    zero_params(model.params, "pred");

    std::mt19937_64 rng(4);
    std::vector<Tensor> zs = {random_tensor({m, 2}, rng), random_tensor({m, 2}, rng), random_tensor({m, 2}, rng)};
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_mcla(g, model, {g.input(zs[0]), g.input(zs[1]), g.input(zs[2])});
          }) == doctest::Approx(3.0 * static_cast<double>(m) * std::log(3.0)).epsilon(1e-12));

    // A saturated predictor: huge logit on the true view drives the loss to 0.
    Tensor& w = model.params.get("pred.W0");
    Tensor& b = model.params.get("pred.b0");
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = 0.0;
    std::vector<Tensor> sep = {Tensor::full({m, 2}, 0.0), Tensor::full({m, 2}, 0.0), Tensor::full({m, 2}, 0.0)};
    for (int64_t t = 0; t < m; ++t) {
        sep[0].at(t, 0) = 1.0;
        sep[1].at(t, 1) = 1.0;
        // view 2 stays at the origin
    }
    w.at(0, 0) = 60.0;
    w.at(1, 1) = 60.0;
    b.at(0, 2) = 30.0;  // bias toward view 2 when both coordinates are zero
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_mcla(g, model, {g.input(sep[0]), g.input(sep[1]), g.input(sep[2])});
          }) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loss_mcla with V=2 equals loss_cla on matched probability tables") {
    const int64_t m = 6, d = 3;
    std::mt19937_64 rng(8);
    Tensor z1 = random_tensor({m, d}, rng), z2 = random_tensor({m, d}, rng);
    Tensor w_col = random_tensor({d, 1}, rng);
    const double bias = 0.3;

    // Sigmoid parameterization.
    nets::ModelBundle bi = make_biview_model(3, 3, d, false, 1);
    {
        Tensor& w = bi.params.get("pred.W0");
        Tensor& b = bi.params.get("pred.b0");
        for (int64_t i = 0; i < d; ++i) w[i] = w_col[i];
        b[0] = bias;
    }
    // Matched two-class softmax: logits (0, w.z + b).
    nets::ModelSpecs specs;
    specs.encoders = {nets::MLPSpec{{3, d}, nets::Head::Linear}, nets::MLPSpec{{3, d}, nets::Head::Linear}};
    specs.decoders = {nets::MLPSpec{{d, 3}, nets::Head::Linear}, nets::MLPSpec{{d, 3}, nets::Head::Linear}};
    specs.view_predictor = nets::MLPSpec{{d, 2}, nets::Head::Softmax};
    nets::ModelBundle multi = nets::init_model(specs, 1);
    {
        Tensor& w = multi.params.get("pred.W0");
        Tensor& b = multi.params.get("pred.b0");
        for (int64_t i = 0; i < w.numel(); ++i) w[i] = 0.0;
        for (int64_t i = 0; i < d; ++i) w.at(i, 1) = w_col[i];
        b.at(0, 0) = 0.0;
        b.at(0, 1) = bias;
    }

    const double cla = value_of([&](ad::Graph& g) { return losses::loss_cla(g, bi, g.input(z1), g.input(z2)); });
    const double mcla =
        value_of([&](ad::Graph& g) { return losses::loss_mcla(g, multi, {g.input(z1), g.input(z2)}); });
    CHECK(cla == doctest::Approx(mcla).epsilon(1e-10));
}

TEST_CASE("loss_clu frozen values") {
    // Balanced one-hot over D=2, identical views: -19 ln 2.
    Tensor onehot({4, 2}, {1, 0, 0, 1, 1, 0, 0, 1});
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var z = g.input(onehot);
              return losses::loss_clu(g, z, z, 9.0);
          }) == doctest::Approx(-19.0 * std::log(2.0)).epsilon(1e-9));

    // Independence: balanced z1 against uniform z2 leaves only the entropy
    // bonus, -alpha * 2 ln 2.
    Tensor uniform = Tensor::full({4, 2}, 0.5);
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_clu(g, g.input(onehot), g.input(uniform), 9.0);
          }) == doctest::Approx(-9.0 * 2.0 * std::log(2.0)).epsilon(1e-9));

    // Degenerate collapse: all mass in one over-cluster in both views.
    Tensor collapsed({3, 2}, {1, 0, 1, 0, 1, 0});
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var z = g.input(collapsed);
              return losses::loss_clu(g, z, z, 9.0);
          }) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loss_clu: symmetry, lower bound, oracle, contract error") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 25; ++t) {
        const int64_t m = 3 + static_cast<int64_t>(rng() % 6);
        const int64_t d = 2 + static_cast<int64_t>(rng() % 4);
        Tensor z1 = random_prob_rows(m, d, rng), z2 = random_prob_rows(m, d, rng);
        const double a = value_of([&](ad::Graph& g) { return losses::loss_clu(g, g.input(z1), g.input(z2), 9.0); });
        const double b = value_of([&](ad::Graph& g) { return losses::loss_clu(g, g.input(z2), g.input(z1), 9.0); });
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
        CHECK(a >= -(std::log(static_cast<double>(d))) * (1.0 + 2.0 * 9.0) - 1e-9);
        CHECK(a == doctest::Approx(clu_oracle(z1, z2, 9.0)).epsilon(1e-9));
    }
    ad::Graph g;
    CHECK_THROWS_AS(losses::loss_clu(g, g.input(Tensor({1, 2}, {0.7, 0.7})), g.input(Tensor({1, 2}, {0.5, 0.5})), 9.0),
                    ContractError);
}

TEST_CASE("loss_clu gradient matches finite differences through softmax") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 5; ++t) {
        Tensor raw1 = random_tensor({5, 3}, rng), raw2 = random_tensor({5, 3}, rng);
        CHECK(fd_check_inputs({raw1, raw2}, [&](ad::Graph& g, const std::vector<ad::Var>& v) {
                  return losses::loss_clu(g, g.softmax_rows(v[0]), g.softmax_rows(v[1]), 9.0);
              }) < 1e-4);
    }
}

TEST_CASE("loss_mse: identity, frozen, oracle") {
    std::mt19937_64 rng(13);
    Tensor z = random_tensor({4, 3}, rng);
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var v = g.input(z);
              return losses::loss_mse(g, v, v);
          }) == 0.0);
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_mse(g, g.input(Tensor({1, 2}, {1, 0})), g.input(Tensor({1, 2}, {0, 1})));
          }) == doctest::Approx(2.0));
    Tensor a = random_tensor({6, 4}, rng), b = random_tensor({6, 4}, rng);
    CHECK(value_of([&](ad::Graph& g) { return losses::loss_mse(g, g.input(a), g.input(b)); }) ==
          doctest::Approx(rec_oracle(a, b)).epsilon(1e-12));
}

TEST_CASE("loss_info: frozen two-sample value") {
    // Positives identical, the two cross negatives orthogonal, tau = 1:
    // each term is -log(e/2), total 2(ln 2 - 1).
    Tensor z({2, 2}, {1, 0, 0, 1});
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var v = g.input(z);
              return losses::loss_info(g, v, v, 1.0);
          }) == doctest::Approx(2.0 * (std::log(2.0) - 1.0)).epsilon(1e-9));
}

TEST_CASE("loss_info: row-scale invariance, oracle, errors") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 20; ++t) {
        Tensor z1 = random_tensor_no_kink({5, 4}, rng, 0.1);
        Tensor z2 = random_tensor_no_kink({5, 4}, rng, 0.1);
        const double base = value_of([&](ad::Graph& g) { return losses::loss_info(g, g.input(z1), g.input(z2), 0.5); });
        CHECK(base == doctest::Approx(info_oracle(z1, z2, 0.5)).epsilon(1e-9));

        Tensor scaled = z1;
        for (int64_t j = 0; j < scaled.cols(); ++j) scaled.at(2, j) *= 7.5;
        const double after =
            value_of([&](ad::Graph& g) { return losses::loss_info(g, g.input(scaled), g.input(z2), 0.5); });
        CHECK(base == doctest::Approx(after).epsilon(1e-9));
    }
    ad::Graph g;
    CHECK_THROWS_AS(losses::loss_info(g, g.input(Tensor({2, 2}, {0, 0, 1, 0})), g.input(Tensor({2, 2}, {1, 0, 0, 1})),
                                      1.0),
                    DomainError);
    CHECK_THROWS_AS(losses::loss_info(g, g.input(Tensor({1, 2}, {1, 0})), g.input(Tensor({1, 2}, {1, 0})), 1.0),
                    ContractError);
}

TEST_CASE("loss_info gradient matches finite differences") {
    std::mt19937_64 rng(15);
    for (int t = 0; t < 5; ++t) {
        Tensor z1 = random_tensor_no_kink({4, 3}, rng, 0.15);
        Tensor z2 = random_tensor_no_kink({4, 3}, rng, 0.15);
        CHECK(fd_check_inputs({z1, z2}, [&](ad::Graph& g, const std::vector<ad::Var>& v) {
                  return losses::loss_info(g, v[0], v[1], 0.7);
              }) < 1e-4);
    }
}

TEST_CASE("loss_ntxent_instance: single-sample cancellation and pair structure") {
    Tensor h1({1, 3}, {0.3, -0.2, 0.9});
    Tensor h2({1, 3}, {-0.5, 0.1, 0.4});
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_ntxent_instance(g, {g.input(h1), g.input(h2)}, 0.5);
          }) == doctest::Approx(0.0).epsilon(1e-9));

    std::mt19937_64 rng(16);
    std::vector<Tensor> hs = {random_tensor_no_kink({3, 4}, rng, 0.1), random_tensor_no_kink({3, 4}, rng, 0.1)};
    const double total =
        value_of([&](ad::Graph& g) { return losses::loss_ntxent_instance(g, {g.input(hs[0]), g.input(hs[1])}, 0.5); });
    CHECK(total == doctest::Approx(ntxent_oracle(hs, 0.5)).epsilon(1e-9));
}

TEST_CASE("loss_ntxent_instance matches the direct oracle for V=3") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10; ++t) {
        std::vector<Tensor> hs = {random_tensor_no_kink({3, 5}, rng, 0.1), random_tensor_no_kink({3, 5}, rng, 0.1),
                                  random_tensor_no_kink({3, 5}, rng, 0.1)};
        const double got = value_of([&](ad::Graph& g) {
            return losses::loss_ntxent_instance(g, {g.input(hs[0]), g.input(hs[1]), g.input(hs[2])}, 0.4);
        });
        CHECK(got == doctest::Approx(ntxent_oracle(hs, 0.4)).epsilon(1e-9));
    }
}

TEST_CASE("loss_ntxent_instance gradient matches finite differences") {
    std::mt19937_64 rng(18);
    std::vector<Tensor> hs = {random_tensor_no_kink({4, 3}, rng, 0.15), random_tensor_no_kink({4, 3}, rng, 0.15)};
    CHECK(fd_check_inputs({hs[0], hs[1]}, [&](ad::Graph& g, const std::vector<ad::Var>& v) {
              return losses::loss_ntxent_instance(g, {v[0], v[1]}, 0.5);
          }) < 1e-4);
}

TEST_CASE("loss_cluster_contrast: uniform regularizer, degenerate K=1, oracle") {
    // Uniform assignments: the contrast term vanishes against itself only in
    // the K=1 case; here we check the regularizer alone equals -ln K per view.
    const int64_t m = 6, k = 3;
    Tensor uniform = Tensor::full({m, k}, 1.0 / static_cast<double>(k));
    const double got =
        value_of([&](ad::Graph& g) { return losses::loss_cluster_contrast(g, {g.input(uniform), g.input(uniform)}, 1.0); });
    const double oracle = cluster_contrast_oracle({uniform, uniform}, 1.0);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
    // Regularizer contribution: 2 views * (-ln 3).
    const double contrast_only = got - 2.0 * (-std::log(3.0));
    CHECK(contrast_only == doctest::Approx(ntxent_oracle({transpose_oracle(uniform), transpose_oracle(uniform)}, 1.0))
                               .epsilon(1e-9));

    Tensor single = Tensor::full({4, 1}, 1.0);  // K=1: contrast and regularizer both vanish
    CHECK(value_of([&](ad::Graph& g) {
              return losses::loss_cluster_contrast(g, {g.input(single), g.input(single)}, 1.0);
          }) == doctest::Approx(0.0).epsilon(1e-9));

    std::mt19937_64 rng(19);
    for (int t = 0; t < 10; ++t) {
        Tensor q1 = random_prob_rows(4, 2, rng), q2 = random_prob_rows(4, 2, rng);
        CHECK(value_of([&](ad::Graph& g) {
                  return losses::loss_cluster_contrast(g, {g.input(q1), g.input(q2)}, 0.8);
              }) == doctest::Approx(cluster_contrast_oracle({q1, q2}, 0.8)).epsilon(1e-9));
    }

    ad::Graph g;
    CHECK_THROWS_AS(
        losses::loss_cluster_contrast(g, {g.input(Tensor({2, 2}, {0.9, 0.9, 0.5, 0.5})), g.input(uniform)}, 1.0),
        ContractError);
}

TEST_CASE("loss_pre: identity map, zero map, gradient") {
    const int64_t m = 5, d = 3;
    nets::ModelBundle model = make_biview_model(3, 3, d, true, 3);
    std::mt19937_64 rng(20);

    // Identity dual predictors and matching views give zero loss.
    for (int v = 0; v < 2; ++v) {
        Tensor& w = model.params.get(nets::dual_prefix(v) + ".W0");
        Tensor& b = model.params.get(nets::dual_prefix(v) + ".b0");
        for (int64_t i = 0; i < d; ++i)
            for (int64_t j = 0; j < d; ++j) w.at(i, j) = i == j ? 1.0 : 0.0;
        for (int64_t i = 0; i < b.numel(); ++i) b[i] = 0.0;
    }
    Tensor z = random_prob_rows(m, d, rng);
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var v = g.input(z);
              return losses::loss_pre(g, model, v, v);
          }) == doctest::Approx(0.0).epsilon(1e-12));

    // Zero predictors with unit-norm rows: ||z2||^2 + ||z1||^2 = 2m.
    zero_params(model.params, "dual0");
    zero_params(model.params, "dual1");
    Tensor unit({m, d});
    for (int64_t i = 0; i < m; ++i) unit.at(i, static_cast<int64_t>(i) % d) = 1.0;
    CHECK(value_of([&](ad::Graph& g) {
              ad::Var v = g.input(unit);
              return losses::loss_pre(g, model, v, v);
          }) == doctest::Approx(2.0 * static_cast<double>(m)).epsilon(1e-12));

    nets::ModelBundle fresh = make_biview_model(3, 3, d, true, 9);
    Tensor z1 = random_tensor({m, d}, rng), z2 = random_tensor({m, d}, rng);
    auto fn = [&](const ParamStore& p) {
        nets::ModelBundle pm = fresh;
        pm.params = p;
        ad::Graph g;
        ad::Var loss = losses::loss_pre(g, pm, g.input(z1), g.input(z2));
        return ad::LossEval{g.scalar_value(loss), g.backward(loss)};
    };
    CHECK(ad::finite_diff_check(fn, fresh.params, 1e-5) < 1e-4);

    nets::ModelBundle no_dual = make_biview_model(3, 3, d, false, 3);
    ad::Graph g;
    CHECK_THROWS_AS(losses::loss_pre(g, no_dual, g.input(z1), g.input(z2)), ConfigError);
}

TEST_CASE("bi-view composite: weight zeroing and breakdown bookkeeping") {
    std::mt19937_64 rng(21);
    nets::ModelBundle model = make_biview_model(4, 5, 3, false, 11);
    Tensor x1 = random_tensor({6, 4}, rng, 0.0, 1.0), x2 = random_tensor({6, 5}, rng, 0.0, 1.0);

    losses::LossConfig cfg;
    cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = cfg.lambda4 = 0.0;
    ad::Graph g;
    losses::BiviewBatch batch = losses::BiviewBatch::complete_batch(g, x1, x2);
    losses::CompositeOut out = losses::loss_composite_biview(g, model, batch, cfg, false);
    CHECK(out.breakdown.total == doctest::Approx(out.breakdown.term("clu")).epsilon(1e-12));

    // Weighted-sum identity within 1e-10.
    losses::LossConfig cfg2;
    cfg2.lambda1 = 0.3;
    cfg2.lambda2 = 0.15;
    cfg2.lambda3 = 0.25;
    cfg2.lambda4 = 0.4;
    ad::Graph g2;
    losses::BiviewBatch batch2 = losses::BiviewBatch::complete_batch(g2, x1, x2);
    losses::CompositeOut out2 = losses::loss_composite_biview(g2, model, batch2, cfg2, false);
    const double resum = out2.breakdown.term("clu") + 0.3 * out2.breakdown.term("ins") +
                         0.15 * out2.breakdown.term("rec") + 0.25 * out2.breakdown.term("var") +
                         0.4 * out2.breakdown.term("cla");
    CHECK(std::abs(out2.breakdown.total - resum) < 1e-10);
}

TEST_CASE("bi-view composite: baseline config reproduces L_clu + mu L_rec") {
    std::mt19937_64 rng(22);
    nets::ModelBundle model = make_biview_model(4, 5, 3, false, 13);
    Tensor x1 = random_tensor({6, 4}, rng, 0.0, 1.0), x2 = random_tensor({6, 5}, rng, 0.0, 1.0);

    losses::LossConfig base;
    base.use_ins = base.use_var = base.use_cla = false;
    base.lambda2 = base.mu_base;
    ad::Graph g;
    losses::BiviewBatch batch = losses::BiviewBatch::complete_batch(g, x1, x2);
    losses::CompositeOut out = losses::loss_composite_biview(g, model, batch, base, false);
    CHECK(out.breakdown.terms.size() == 2);  // clu + rec only
    CHECK(out.breakdown.total ==
          doctest::Approx(out.breakdown.term("clu") + base.mu_base * out.breakdown.term("rec")).epsilon(1e-12));
}

TEST_CASE("bi-view composite: activation flags map to term presence") {
    std::mt19937_64 rng(23);
    nets::ModelBundle model = make_biview_model(4, 5, 3, false, 17);
    Tensor x1 = random_tensor({6, 4}, rng, 0.0, 1.0), x2 = random_tensor({6, 5}, rng, 0.0, 1.0);
    const bool flags[8][3] = {{false, false, false}, {true, false, false}, {false, true, false}, {true, true, false},
                              {false, false, true},  {true, false, true},  {false, true, true},  {true, true, true}};
    for (const auto& row : flags) {
        losses::LossConfig cfg;
        cfg.use_ins = row[0];
        cfg.use_var = row[1];
        cfg.use_cla = row[2];
        ad::Graph g;
        losses::BiviewBatch batch = losses::BiviewBatch::complete_batch(g, x1, x2);
        losses::CompositeOut out = losses::loss_composite_biview(g, model, batch, cfg, false);
        CHECK(out.breakdown.has("ins") == row[0]);
        CHECK(out.breakdown.has("var") == row[1]);
        CHECK(out.breakdown.has("cla") == row[2]);
        CHECK(out.breakdown.has("clu"));
        CHECK(out.breakdown.has("rec"));
    }
}

TEST_CASE("multi-view composite: weight zeroing and bookkeeping") {
    std::mt19937_64 rng(24);
    nets::ModelSpecs specs;
    for (int v = 0; v < 3; ++v) {
        specs.encoders.push_back(nets::MLPSpec{{4, 6, 3}, nets::Head::Linear});
        specs.decoders.push_back(nets::MLPSpec{{3, 6, 4}, nets::Head::Linear});
    }
    specs.view_predictor = nets::MLPSpec{{3, 3}, nets::Head::Softmax};
    specs.feature_mlp = nets::MLPSpec{{3, 5}, nets::Head::Linear};
    specs.cluster_mlp = nets::MLPSpec{{3, 2}, nets::Head::Softmax};
    nets::ModelBundle model = nets::init_model(specs, 23);

    losses::MultiviewBatch batch;
    losses::LossConfig cfg;
    cfg.mu1 = 0.0;
    cfg.mu2 = 0.0;
    ad::Graph g;
    for (int v = 0; v < 3; ++v) batch.xs.push_back(g.input(random_tensor({5, 4}, rng, 0.0, 1.0)));
    losses::CompositeOut out = losses::loss_composite_multiview(g, model, batch, cfg);
    CHECK(out.breakdown.total ==
          doctest::Approx(out.breakdown.term("rec") + out.breakdown.term("Q") + out.breakdown.term("H"))
              .epsilon(1e-10));

    losses::LossConfig cfg2;
    cfg2.mu1 = 0.05;
    cfg2.mu2 = 0.7;
    ad::Graph g2;
    losses::MultiviewBatch batch2;
    for (int v = 0; v < 3; ++v) batch2.xs.push_back(g2.input(random_tensor({5, 4}, rng, 0.0, 1.0)));
    losses::CompositeOut out2 = losses::loss_composite_multiview(g2, model, batch2, cfg2);
    const double resum = out2.breakdown.term("rec") + 0.05 * out2.breakdown.term("var") + out2.breakdown.term("Q") +
                         out2.breakdown.term("H") + 0.7 * out2.breakdown.term("mcla");
    CHECK(std::abs(out2.breakdown.total - resum) < 1e-10);
}
