#include "mvclab/graph.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "mvclab/constants.hpp"
#include "mvclab/errors.hpp"

namespace mvclab::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

CMap as_mat(const Tensor& t) { return CMap(t.data(), t.rows(), t.cols()); }
MMap as_mat(Tensor& t) { return MMap(t.data(), t.rows(), t.cols()); }

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " + t.shape_str());
}

// b broadcasts over rows of a when it is a row vector {n} or {1,n}.
bool row_broadcast(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) return false;
    const bool b_row = (b.rank() == 1 && b.cols() == a.cols()) || (b.rank() == 2 && b.rows() == 1 && b.cols() == a.cols());
    if (a.rank() == 2 && b_row) return true;
    throw DimensionError("add/subtract shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

double row_norm(const Tensor& t, int64_t r) {
    double s = 0.0;
    for (int64_t j = 0; j < t.cols(); ++j) s += t.at(r, j) * t.at(r, j);
    return std::sqrt(s);
}

}  // namespace

Var Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::check_valid(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw ContractError("invalid graph var");
}

const Graph::Node& Graph::node(Var v) const {
    check_valid(v);
    return nodes_[static_cast<size_t>(v.id)];
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

Var Graph::input(Tensor v) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(v);
    return push(std::move(n));
}

Var Graph::param(const ParamStore& ps, const std::string& name) {
    auto it = param_leaves_.find(name);
    if (it != param_leaves_.end()) return Var{it->second};
    Node n;
    n.op = Op::Param;
    n.param_name = name;
    n.value = ps.get(name);
    Var v = push(std::move(n));
    param_leaves_[name] = v.id;
    return v;
}

Var Graph::matmul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_rank2(ta, "matmul");
    require_rank2(tb, "matmul");
    if (ta.cols() != tb.rows())
        throw DimensionError("matmul inner dimension mismatch " + ta.shape_str() + " x " + tb.shape_str());
    Node n;
    n.op = Op::Matmul;
    n.in = {a.id, b.id};
    Tensor out({ta.rows(), tb.cols()});
    as_mat(out) = as_mat(ta) * as_mat(tb);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    const bool bc = row_broadcast(ta, tb);
    Node n;
    n.op = Op::Add;
    n.in = {a.id, b.id};
    Tensor out = ta;
    if (bc) {
        for (int64_t i = 0; i < ta.rows(); ++i)
            for (int64_t j = 0; j < ta.cols(); ++j) out.at(i, j) += tb[j];
    } else {
        for (int64_t i = 0; i < ta.numel(); ++i) out[i] += tb[i];
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::subtract(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    const bool bc = row_broadcast(ta, tb);
    Node n;
    n.op = Op::Sub;
    n.in = {a.id, b.id};
    Tensor out = ta;
    if (bc) {
        for (int64_t i = 0; i < ta.rows(); ++i)
            for (int64_t j = 0; j < ta.cols(); ++j) out.at(i, j) -= tb[j];
    } else {
        for (int64_t i = 0; i < ta.numel(); ++i) out[i] -= tb[i];
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::scalar_multiply(Var a, double c) {
    Node n;
    n.op = Op::ScalarMul;
    n.in = {a.id, -1};
    n.c0 = c;
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= c;
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::multiply(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb)) throw DimensionError("multiply shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Node n;
    n.op = Op::Mul;
    n.in = {a.id, b.id};
    Tensor out = ta;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::relu(Var a) {
    Node n;
    n.op = Op::Relu;
    n.in = {a.id, -1};
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::sigmoid(Var a) {
    Node n;
    n.op = Op::Sigmoid;
    n.in = {a.id, -1};
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::softmax_rows(Var a) {
    const Tensor& ta = value(a);
    require_rank2(ta, "softmax_rows");
    Node n;
    n.op = Op::SoftmaxRows;
    n.in = {a.id, -1};
    Tensor out = ta;
    for (int64_t i = 0; i < ta.rows(); ++i) {
        double mx = out.at(i, 0);
        for (int64_t j = 1; j < ta.cols(); ++j) mx = std::max(mx, out.at(i, j));
        double s = 0.0;
        for (int64_t j = 0; j < ta.cols(); ++j) {
            out.at(i, j) = std::exp(out.at(i, j) - mx);
            s += out.at(i, j);
        }
        for (int64_t j = 0; j < ta.cols(); ++j) out.at(i, j) /= s;
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::log(Var a) {
    Node n;
    n.op = Op::Log;
    n.in = {a.id, -1};
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) {
        if (out[i] <= 0.0) throw DomainError("log of non-positive value; clamp inputs first");
        out[i] = std::log(out[i]);
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::exp(Var a) {
    Node n;
    n.op = Op::Exp;
    n.in = {a.id, -1};
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::exp(out[i]);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::sqrt(Var a) {
    Node n;
    n.op = Op::Sqrt;
    n.in = {a.id, -1};
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) {
        if (out[i] < 0.0) throw DomainError("sqrt of negative value");
        out[i] = std::sqrt(out[i]);
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::sum(Var a) {
    Node n;
    n.op = Op::Sum;
    n.in = {a.id, -1};
    double s = 0.0;
    const Tensor& ta = value(a);
    for (int64_t i = 0; i < ta.numel(); ++i) s += ta[i];
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

Var Graph::sum_axis(Var a, int axis) {
    const Tensor& ta = value(a);
    require_rank2(ta, "sum_axis");
    if (axis != 0 && axis != 1) throw ContractError("sum_axis: axis must be 0 or 1");
    Node n;
    n.op = Op::SumAxis;
    n.in = {a.id, -1};
    n.axis = axis;
    Tensor out = axis == 0 ? Tensor({int64_t{1}, ta.cols()}) : Tensor({ta.rows(), int64_t{1}});
    for (int64_t i = 0; i < ta.rows(); ++i)
        for (int64_t j = 0; j < ta.cols(); ++j) out[axis == 0 ? j : i] += ta.at(i, j);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::mean_axis(Var a, int axis) {
    const Tensor& ta = value(a);
    require_rank2(ta, "mean_axis");
    if (axis != 0 && axis != 1) throw ContractError("mean_axis: axis must be 0 or 1");
    const int64_t n_reduce = axis == 0 ? ta.rows() : ta.cols();
    if (n_reduce == 0) throw DimensionError("mean_axis over empty axis");
    Node n;
    n.op = Op::MeanAxis;
    n.in = {a.id, -1};
    n.axis = axis;
    Tensor out = axis == 0 ? Tensor({int64_t{1}, ta.cols()}) : Tensor({ta.rows(), int64_t{1}});
    for (int64_t i = 0; i < ta.rows(); ++i)
        for (int64_t j = 0; j < ta.cols(); ++j) out[axis == 0 ? j : i] += ta.at(i, j);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] /= static_cast<double>(n_reduce);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::variance_axis(Var a, int axis) {
    const Tensor& ta = value(a);
    require_rank2(ta, "variance_axis");
    if (axis != 0 && axis != 1) throw ContractError("variance_axis: axis must be 0 or 1");
    const int64_t n_reduce = axis == 0 ? ta.rows() : ta.cols();
    if (n_reduce == 0) throw DimensionError("variance_axis over empty axis");
    Node n;
    n.op = Op::VarAxis;
    n.in = {a.id, -1};
    n.axis = axis;
    Tensor mean = axis == 0 ? Tensor({int64_t{1}, ta.cols()}) : Tensor({ta.rows(), int64_t{1}});
    for (int64_t i = 0; i < ta.rows(); ++i)
        for (int64_t j = 0; j < ta.cols(); ++j) mean[axis == 0 ? j : i] += ta.at(i, j);
    for (int64_t i = 0; i < mean.numel(); ++i) mean[i] /= static_cast<double>(n_reduce);
    Tensor out = Tensor::zeros(mean.shape());
    for (int64_t i = 0; i < ta.rows(); ++i)
        for (int64_t j = 0; j < ta.cols(); ++j) {
            const int64_t k = axis == 0 ? j : i;
            const double d = ta.at(i, j) - mean[k];
            out[k] += d * d;
        }
    for (int64_t i = 0; i < out.numel(); ++i) out[i] /= static_cast<double>(n_reduce);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::squared_l2_norm(Var a) {
    Node n;
    n.op = Op::SquaredL2;
    n.in = {a.id, -1};
    double s = 0.0;
    const Tensor& ta = value(a);
    for (int64_t i = 0; i < ta.numel(); ++i) s += ta[i] * ta[i];
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

Var Graph::cosine_similarity(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_rank2(ta, "cosine_similarity");
    require_rank2(tb, "cosine_similarity");
    if (ta.cols() != tb.cols())
        throw DimensionError("cosine_similarity feature dim mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Node n;
    n.op = Op::Cosine;
    n.in = {a.id, b.id};
    Tensor out({ta.rows(), tb.rows()});
    as_mat(out) = as_mat(ta) * as_mat(tb).transpose();
    for (int64_t i = 0; i < ta.rows(); ++i) {
        const double na = std::max(row_norm(ta, i), kClampFloor);
        for (int64_t j = 0; j < tb.rows(); ++j) {
            const double nb = std::max(row_norm(tb, j), kClampFloor);
            out.at(i, j) /= na * nb;
        }
    }
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::transpose(Var a) {
    const Tensor& ta = value(a);
    require_rank2(ta, "transpose");
    Node n;
    n.op = Op::Transpose;
    n.in = {a.id, -1};
    Tensor out({ta.cols(), ta.rows()});
    for (int64_t i = 0; i < ta.rows(); ++i)
        for (int64_t j = 0; j < ta.cols(); ++j) out.at(j, i) = ta.at(i, j);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::clamp(Var a, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lo > hi");
    Node n;
    n.op = Op::Clamp;
    n.in = {a.id, -1};
    n.c0 = lo;
    n.c1 = hi;
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::min(std::max(out[i], lo), hi);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Graph::gather_rows(Var a, std::vector<int64_t> idx) {
    const Tensor& ta = value(a);
    require_rank2(ta, "gather_rows");
    for (int64_t r : idx)
        if (r < 0 || r >= ta.rows()) throw DimensionError("gather_rows index out of range");
    Node n;
    n.op = Op::GatherRows;
    n.in = {a.id, -1};
    Tensor out({static_cast<int64_t>(idx.size()), ta.cols()});
    for (size_t r = 0; r < idx.size(); ++r)
        for (int64_t j = 0; j < ta.cols(); ++j) out.at(static_cast<int64_t>(r), j) = ta.at(idx[r], j);
    n.gather = std::move(idx);
    n.value = std::move(out);
    return push(std::move(n));
}

GradientMap Graph::backward(Var loss) const {
    check_valid(loss);
    const Node& ln = nodes_[static_cast<size_t>(loss.id)];
    if (!ln.value.is_scalar()) throw ContractError("backward: loss node must be scalar, got " + ln.value.shape_str());

    std::vector<Tensor> grad(nodes_.size());
    std::vector<char> touched(nodes_.size(), 0);
    auto reach = [&](int id) -> Tensor& {
        if (!touched[static_cast<size_t>(id)]) {
            grad[static_cast<size_t>(id)] = Tensor::zeros(nodes_[static_cast<size_t>(id)].value.shape());
            touched[static_cast<size_t>(id)] = 1;
        }
        return grad[static_cast<size_t>(id)];
    };
    reach(loss.id)[0] = 1.0;

    for (int i = loss.id; i >= 0; --i) {
        if (!touched[static_cast<size_t>(i)]) continue;
        const Node& n = nodes_[static_cast<size_t>(i)];
        const Tensor& g = grad[static_cast<size_t>(i)];
        switch (n.op) {
            case Op::Input:
            case Op::Param:
                break;
            case Op::Matmul: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                const Tensor& b = nodes_[static_cast<size_t>(n.in[1])].value;
                Tensor& ga = reach(n.in[0]);
                Tensor& gb = reach(n.in[1]);
                as_mat(ga) += as_mat(g) * as_mat(b).transpose();
                as_mat(gb) += as_mat(a).transpose() * as_mat(g);
                break;
            }
            case Op::Add:
            case Op::Sub: {
                const double sign = n.op == Op::Add ? 1.0 : -1.0;
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                const Tensor& b = nodes_[static_cast<size_t>(n.in[1])].value;
                Tensor& ga = reach(n.in[0]);
                Tensor& gb = reach(n.in[1]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += g[k];
                if (a.same_shape(b)) {
                    for (int64_t k = 0; k < g.numel(); ++k) gb[k] += sign * g[k];
                } else {  // b row-broadcast: reduce over rows
                    for (int64_t r = 0; r < g.rows(); ++r)
                        for (int64_t c = 0; c < g.cols(); ++c) gb[c] += sign * g.at(r, c);
                }
                break;
            }
            case Op::ScalarMul: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += n.c0 * g[k];
                break;
            }
            case Op::Mul: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                const Tensor& b = nodes_[static_cast<size_t>(n.in[1])].value;
                Tensor& ga = reach(n.in[0]);
                Tensor& gb = reach(n.in[1]);
                for (int64_t k = 0; k < g.numel(); ++k) {
                    ga[k] += g[k] * b[k];
                    gb[k] += g[k] * a[k];
                }
                break;
            }
            case Op::Relu: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k)
                    if (a[k] > 0.0) ga[k] += g[k];
                break;
            }
            case Op::Sigmoid: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += g[k] * n.value[k] * (1.0 - n.value[k]);
                break;
            }
            case Op::SoftmaxRows: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t r = 0; r < n.value.rows(); ++r) {
                    double dot = 0.0;
                    for (int64_t c = 0; c < n.value.cols(); ++c) dot += g.at(r, c) * n.value.at(r, c);
                    for (int64_t c = 0; c < n.value.cols(); ++c)
                        ga.at(r, c) += n.value.at(r, c) * (g.at(r, c) - dot);
                }
                break;
            }
            case Op::Log: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += g[k] / a[k];
                break;
            }
            case Op::Exp: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += g[k] * n.value[k];
                break;
            }
            case Op::Sqrt: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k) ga[k] += g[k] * 0.5 / n.value[k];
                break;
            }
            case Op::Sum: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < ga.numel(); ++k) ga[k] += g[0];
                break;
            }
            case Op::SumAxis:
            case Op::MeanAxis: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                const int64_t n_reduce = n.axis == 0 ? a.rows() : a.cols();
                const double scale = n.op == Op::SumAxis ? 1.0 : 1.0 / static_cast<double>(n_reduce);
                for (int64_t r = 0; r < a.rows(); ++r)
                    for (int64_t c = 0; c < a.cols(); ++c) ga.at(r, c) += scale * g[n.axis == 0 ? c : r];
                break;
            }
            case Op::VarAxis: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                const int64_t n_reduce = n.axis == 0 ? a.rows() : a.cols();
                Tensor mean = Tensor::zeros(n.value.shape());
                for (int64_t r = 0; r < a.rows(); ++r)
                    for (int64_t c = 0; c < a.cols(); ++c) mean[n.axis == 0 ? c : r] += a.at(r, c);
                for (int64_t k = 0; k < mean.numel(); ++k) mean[k] /= static_cast<double>(n_reduce);
                for (int64_t r = 0; r < a.rows(); ++r)
                    for (int64_t c = 0; c < a.cols(); ++c) {
                        const int64_t k = n.axis == 0 ? c : r;
                        ga.at(r, c) += g[k] * 2.0 * (a.at(r, c) - mean[k]) / static_cast<double>(n_reduce);
                    }
                break;
            }
            case Op::SquaredL2: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < ga.numel(); ++k) ga[k] += 2.0 * g[0] * a[k];
                break;
            }
            case Op::Cosine: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                const Tensor& b = nodes_[static_cast<size_t>(n.in[1])].value;
                Tensor& ga = reach(n.in[0]);
                Tensor& gb = reach(n.in[1]);
                const int64_t m = a.rows(), nn = b.rows(), d = a.cols();
                std::vector<double> na(static_cast<size_t>(m)), nb(static_cast<size_t>(nn));
                std::vector<char> fa(static_cast<size_t>(m)), fb(static_cast<size_t>(nn));
                for (int64_t r = 0; r < m; ++r) {
                    const double v = row_norm(a, r);
                    fa[static_cast<size_t>(r)] = v > kClampFloor;
                    na[static_cast<size_t>(r)] = std::max(v, kClampFloor);
                }
                for (int64_t r = 0; r < nn; ++r) {
                    const double v = row_norm(b, r);
                    fb[static_cast<size_t>(r)] = v > kClampFloor;
                    nb[static_cast<size_t>(r)] = std::max(v, kClampFloor);
                }
                for (int64_t i2 = 0; i2 < m; ++i2) {
                    for (int64_t j = 0; j < nn; ++j) {
                        const double gij = g.at(i2, j);
                        if (gij == 0.0) continue;
                        const double s = n.value.at(i2, j);
                        const double inv = 1.0 / (na[static_cast<size_t>(i2)] * nb[static_cast<size_t>(j)]);
                        for (int64_t k = 0; k < d; ++k) {
                            double da = b.at(j, k) * inv;
                            if (fa[static_cast<size_t>(i2)])
                                da -= s * a.at(i2, k) / (na[static_cast<size_t>(i2)] * na[static_cast<size_t>(i2)]);
                            ga.at(i2, k) += gij * da;
                            double db = a.at(i2, k) * inv;
                            if (fb[static_cast<size_t>(j)])
                                db -= s * b.at(j, k) / (nb[static_cast<size_t>(j)] * nb[static_cast<size_t>(j)]);
                            gb.at(j, k) += gij * db;
                        }
                    }
                }
                break;
            }
            case Op::Transpose: {
                Tensor& ga = reach(n.in[0]);
                for (int64_t r = 0; r < g.rows(); ++r)
                    for (int64_t c = 0; c < g.cols(); ++c) ga.at(c, r) += g.at(r, c);
                break;
            }
            case Op::Clamp: {
                const Tensor& a = nodes_[static_cast<size_t>(n.in[0])].value;
                Tensor& ga = reach(n.in[0]);
                for (int64_t k = 0; k < g.numel(); ++k)
                    if (a[k] >= n.c0 && a[k] <= n.c1) ga[k] += g[k];
                break;
            }
            case Op::GatherRows: {
                Tensor& ga = reach(n.in[0]);
                for (size_t r = 0; r < n.gather.size(); ++r)
                    for (int64_t c = 0; c < g.cols(); ++c) ga.at(n.gather[r], c) += g.at(static_cast<int64_t>(r), c);
                break;
            }
        }
    }

    GradientMap out;
    for (const auto& [name, id] : param_leaves_) {
        if (touched[static_cast<size_t>(id)])
            out[name] = std::move(grad[static_cast<size_t>(id)]);
        else
            out[name] = Tensor::zeros(nodes_[static_cast<size_t>(id)].value.shape());
    }
    return out;
}

double finite_diff_check(const std::function<LossEval(const ParamStore&)>& loss_fn, const ParamStore& params,
                         double step) {
    if (step <= 0.0) throw ContractError("finite_diff_check: step must be positive");
    LossEval base = loss_fn(params);
    if (!std::isfinite(base.value)) throw DomainError("finite_diff_check: non-finite loss at base point");

    ParamStore work = params;
    double max_rel = 0.0;
    for (const std::string& name : params.names()) {
        Tensor& t = work.get(name);
        const Tensor* g = nullptr;
        if (auto it = base.grads.find(name); it != base.grads.end()) g = &it->second;
        for (int64_t i = 0; i < t.numel(); ++i) {
            const double orig = t[i];
            t[i] = orig + step;
            const double fp = loss_fn(work).value;
            t[i] = orig - step;
            const double fm = loss_fn(work).value;
            t[i] = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm)) throw DomainError("finite_diff_check: non-finite loss");
            const double cd = (fp - fm) / (2.0 * step);
            const double an = g ? (*g)[i] : 0.0;
            const double rel = std::abs(an - cd) / (std::abs(cd) + 1e-8);
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace mvclab::ad
