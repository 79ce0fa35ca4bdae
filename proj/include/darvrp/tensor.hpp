#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "darvrp/common.hpp"

namespace darvrp {

/// Dense row-major float64 buffer, rank 1 or 2 everywhere in this kernel.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    explicit Tensor(std::size_t len) : rows_(1), cols_(len), data_(len, 0.0) {}
    Tensor(std::initializer_list<std::initializer_list<double>> rows);

    static Tensor row_vector(std::vector<double> values);
    static Tensor scalar(double v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0); }

    /// Debug-mode guard for the "all entries finite" kernel invariant.
    void check_finite(const char* label) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// out = a @ b. Shapes [m,k] x [k,n] -> [m,n]. out must not alias inputs.
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
// out = a @ b^T * scale. Shapes [m,k] x [n,k] -> [m,n].
void matmul_nt(const Tensor& a, const Tensor& b, double scale, Tensor& out);
// out = a^T @ b. Shapes [k,m] x [k,n] -> [m,n]. Used by backward passes.
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);

double l2_norm(const Tensor& t);

}  // namespace darvrp
