#include "mvclab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "mvclab/errors.hpp"

namespace mvclab {

namespace {
int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) throw DimensionError("negative dimension in tensor shape");
        n *= d;
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), v_(static_cast<size_t>(shape_numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> values) : shape_(std::move(shape)), v_(std::move(values)) {
    if (shape_numel(shape_) != static_cast<int64_t>(v_.size()))
        throw DimensionError("tensor value count " + std::to_string(v_.size()) + " does not match shape " + shape_str());
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int64_t> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : t.v_) x = v;
    return t;
}

Tensor Tensor::identity(int64_t n) {
    Tensor t({n, n});
    for (int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

int64_t Tensor::rows() const {
    if (shape_.size() > 2) throw DimensionError("rows() on rank>2 tensor " + shape_str());
    return shape_.size() == 2 ? shape_[0] : 1;
}

int64_t Tensor::cols() const {
    if (shape_.size() > 2) throw DimensionError("cols() on rank>2 tensor " + shape_str());
    if (shape_.empty()) return 1;
    return shape_.back();
}

double Tensor::scalar_value() const {
    if (v_.size() != 1) throw ContractError("scalar_value() on tensor of " + std::to_string(v_.size()) + " elements");
    return v_[0];
}

bool Tensor::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << ']';
    return os.str();
}

Tensor take_rows(const Tensor& t, const std::vector<int64_t>& idx) {
    const int64_t c = t.cols();
    Tensor out({static_cast<int64_t>(idx.size()), c});
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= t.rows()) throw DimensionError("take_rows index out of range");
        for (int64_t j = 0; j < c; ++j) out.at(static_cast<int64_t>(r), j) = t.at(idx[r], j);
    }
    return out;
}

Tensor hcat(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw DimensionError("hcat row mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out({a.rows(), a.cols() + b.cols()});
    for (int64_t i = 0; i < a.rows(); ++i) {
        for (int64_t j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j);
        for (int64_t j = 0; j < b.cols(); ++j) out.at(i, a.cols() + j) = b.at(i, j);
    }
    return out;
}

}  // namespace mvclab
