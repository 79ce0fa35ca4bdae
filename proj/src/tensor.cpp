#include "darvrp/tensor.hpp"

#include <cmath>

namespace darvrp {

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, "Tensor: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Tensor Tensor::row_vector(std::vector<double> values) {
    Tensor t;
    t.rows_ = 1;
    t.cols_ = values.size();
    t.data_ = std::move(values);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
}

void Tensor::check_finite(const char* label) const {
#ifndef NDEBUG
    for (double v : data_)
        if (!std::isfinite(v))
            throw ContractViolation(std::string("non-finite value in tensor: ") + label);
#else
    (void)label;
#endif
}

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
    require(a.cols() == b.rows(), "matmul: inner dimensions disagree");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    out = Tensor(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.row(p);
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

void matmul_nt(const Tensor& a, const Tensor& b, double scale, Tensor& out) {
    require(a.cols() == b.cols(), "matmul_nt: inner dimensions disagree");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    out = Tensor(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            orow[j] = acc * scale;
        }
    }
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    require(a.rows() == b.rows(), "matmul_tn: inner dimensions disagree");
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    out = Tensor(m, n);
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a.row(p);
        const double* brow = b.row(p);
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.row(i);
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

double l2_norm(const Tensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
    return std::sqrt(acc);
}

}  // namespace darvrp
