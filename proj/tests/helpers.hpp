#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mvclab/graph.hpp"
#include "mvclab/params.hpp"
#include "mvclab/tensor.hpp"

namespace testutil {

using mvclab::ParamStore;
using mvclab::Tensor;

inline Tensor random_tensor(std::vector<int64_t> shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> uni(lo, hi);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = uni(rng);
    return t;
}

// Uniform away from zero; keeps relu/clamp kinks out of finite differences.
inline Tensor random_tensor_no_kink(std::vector<int64_t> shape, std::mt19937_64& rng, double margin = 1e-2) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> uni(margin, 1.0);
    std::uniform_int_distribution<int> sign(0, 1);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = (sign(rng) ? 1.0 : -1.0) * uni(rng);
    return t;
}

inline Tensor random_prob_rows(int64_t m, int64_t d, std::mt19937_64& rng) {
    Tensor t = random_tensor({m, d}, rng, 0.05, 1.0);
    for (int64_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < d; ++j) s += t.at(i, j);
        for (int64_t j = 0; j < d; ++j) t.at(i, j) /= s;
    }
    return t;
}

/// Central-difference check of an arbitrary graph expression built from
/// named input tensors (registered as parameters p0, p1, ...).
template <typename Build>
double fd_check_inputs(const std::vector<Tensor>& inputs, Build&& build, double step = 1e-5) {
    ParamStore ps;
    for (size_t i = 0; i < inputs.size(); ++i) ps.add("p" + std::to_string(i), inputs[i]);
    auto fn = [&](const ParamStore& p) {
        mvclab::ad::Graph g;
        std::vector<mvclab::ad::Var> vars;
        for (size_t i = 0; i < inputs.size(); ++i) vars.push_back(g.param(p, "p" + std::to_string(i)));
        mvclab::ad::Var loss = build(g, vars);
        mvclab::ad::LossEval ev;
        ev.value = g.scalar_value(loss);
        ev.grads = g.backward(loss);
        return ev;
    };
    return mvclab::ad::finite_diff_check(fn, ps, step);
}

/// Random fixed contraction weights so gradient checks exercise general
/// cotangents rather than all-ones.
inline Tensor contraction_like(const Tensor& t, std::mt19937_64& rng) { return random_tensor(t.shape(), rng); }

}  // namespace testutil
