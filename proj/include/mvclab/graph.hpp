#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvclab/params.hpp"
#include "mvclab/tensor.hpp"

namespace mvclab::ad {

/// Handle into a Graph's tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Per-parameter gradients, keyed by parameter name. Ordered map so that
/// iteration (optimizer updates, diagnostics) is deterministic.
using GradientMap = std::map<std::string, Tensor>;

/// Dynamic reverse-mode tape over dense double tensors. Nodes are appended
/// in forward order with values computed eagerly; backward() walks the tape
/// in exact reverse creation order. A graph is built, differentiated and
/// discarded per step, and is confined to one thread while in use.
class Graph {
public:
    // Leaves.
    Var input(Tensor v);
    Var constant(Tensor v) { return input(std::move(v)); }
    Var param(const ParamStore& ps, const std::string& name);

    // Primitive ops.
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);  // same shape, or b broadcast as a row vector
    Var subtract(Var a, Var b);
    Var scalar_multiply(Var a, double c);
    Var multiply(Var a, Var b);
    Var relu(Var a);
    Var max_with_zero(Var a) { return relu(a); }
    Var sigmoid(Var a);
    Var softmax_rows(Var a);  // max-subtracted for stability
    Var log(Var a);           // values must be > 0; clamp first
    Var exp(Var a);
    Var sqrt(Var a);  // values must be >= 0
    Var sum(Var a);   // scalar
    Var sum_axis(Var a, int axis);
    Var mean_axis(Var a, int axis);
    Var variance_axis(Var a, int axis);  // population (divide by n)
    Var squared_l2_norm(Var a);          // scalar
    Var cosine_similarity(Var a, Var b);  // [m,d],[n,d] -> [m,n] row-wise cosines
    Var transpose(Var a);
    Var clamp(Var a, double lo, double hi);
    Var gather_rows(Var a, std::vector<int64_t> idx);

    /// Stable for the graph's lifetime (nodes live in a deque).
    const Tensor& value(Var v) const;
    double scalar_value(Var v) const { return value(v).scalar_value(); }
    size_t size() const { return nodes_.size(); }

    /// Gradients of a scalar node with respect to every parameter leaf in
    /// the graph. Leaves the loss does not reach get zero tensors.
    GradientMap backward(Var loss) const;

private:
    enum class Op : uint8_t {
        Input,
        Param,
        Matmul,
        Add,
        Sub,
        ScalarMul,
        Mul,
        Relu,
        Sigmoid,
        SoftmaxRows,
        Log,
        Exp,
        Sqrt,
        Sum,
        SumAxis,
        MeanAxis,
        VarAxis,
        SquaredL2,
        Cosine,
        Transpose,
        Clamp,
        GatherRows,
    };

    struct Node {
        Op op = Op::Input;
        std::array<int, 2> in{{-1, -1}};
        Tensor value;
        double c0 = 0.0;  // ScalarMul factor / Clamp lo
        double c1 = 0.0;  // Clamp hi
        int axis = 0;
        std::vector<int64_t> gather;
        std::string param_name;
    };

    Var push(Node n);
    const Node& node(Var v) const;
    void check_valid(Var v) const;

    std::deque<Node> nodes_;
    std::unordered_map<std::string, int> param_leaves_;
};

/// Loss value plus its analytic gradients, as produced by one forward +
/// backward pass over a freshly built graph.
struct LossEval {
    double value = 0.0;
    GradientMap grads;
};

/// Central-difference oracle: max over parameter coordinates of
/// |analytic - central| / (|central| + 1e-8). `loss_fn` must be a pure
/// function of the store contents.
double finite_diff_check(const std::function<LossEval(const ParamStore&)>& loss_fn, const ParamStore& params,
                         double step);

}  // namespace mvclab::ad
