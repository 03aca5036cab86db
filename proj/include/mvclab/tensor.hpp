#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvclab {

/// Dense row-major double tensor. Rank 0 (scalar), 1 (vector) and 2 (matrix)
/// are the shapes the rest of the library produces.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape);
    Tensor(std::vector<int64_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor zeros(std::vector<int64_t> shape);
    static Tensor full(std::vector<int64_t> shape, double v);
    static Tensor identity(int64_t n);

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t numel() const { return static_cast<int64_t>(v_.size()); }
    bool is_scalar() const { return v_.size() == 1; }

    // Rank <= 2 views: rank 0 is 1x1, rank 1 is a 1xN row vector.
    int64_t rows() const;
    int64_t cols() const;

    double& operator[](int64_t i) { return v_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return v_[static_cast<size_t>(i)]; }
    double& at(int64_t r, int64_t c) { return v_[static_cast<size_t>(r * cols() + c)]; }
    double at(int64_t r, int64_t c) const { return v_[static_cast<size_t>(r * cols() + c)]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    double scalar_value() const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    std::string shape_str() const;

    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && v_ == o.v_; }

private:
    std::vector<int64_t> shape_;
    std::vector<double> v_;
};

/// Row slice copy: rows of `t` selected by `idx`, in order.
Tensor take_rows(const Tensor& t, const std::vector<int64_t>& idx);

/// Horizontal concatenation of matrices with equal row counts.
Tensor hcat(const Tensor& a, const Tensor& b);

}  // namespace mvclab
