#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "ssml/common.hpp"

namespace ssml {

/// Row-major dense matrix of 64-bit reals. Entries are finite by invariant:
/// constructors taking data validate, and operations that can produce
/// non-finite values check their output.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(index_t rows, index_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    DenseMatrix(index_t rows, index_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        require(data_.size() == rows_ * cols_, "DenseMatrix: data length must equal rows*cols");
        ensure_finite("DenseMatrix construction");
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            require(r.size() == cols_, "DenseMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        ensure_finite("DenseMatrix construction");
    }

    static DenseMatrix identity(index_t n) {
        DenseMatrix m(n, n);
        for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return data_.size(); }

    double& operator()(index_t i, index_t j) { return data_[i * cols_ + j]; }
    double operator()(index_t i, index_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(index_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(index_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool operator==(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    void ensure_finite(const char* context) const {
        for (double v : data_)
            if (!std::isfinite(v)) detail::failf(context, ": non-finite entry");
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm_sq() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return s;
    }

    double frobenius_norm() const { return std::sqrt(frobenius_norm_sq()); }

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

/// C = A*B with each entry accumulated over the inner index in ascending
/// order, so results are identical regardless of thread count.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        detail::failf("matmul: shape mismatch (", a.rows(), "x", a.cols(), ") * (", b.rows(), "x",
                      b.cols(), ")");
    const index_t n = a.rows(), k = a.cols(), m = b.cols();
    DenseMatrix c(n, m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const index_t i = static_cast<index_t>(ii);
        double* ci = c.row_ptr(i);
        const double* ai = a.row_ptr(i);
        for (index_t l = 0; l < k; ++l) {
            const double av = ai[l];
            const double* bl = b.row_ptr(l);
            for (index_t j = 0; j < m; ++j) ci[j] += av * bl[j];
        }
    }
    c.ensure_finite("matmul");
    return c;
}

/// ||A*V - B||_F^2, summed in a fixed (row-major) order.
inline double frobenius_objective(const DenseMatrix& a, const DenseMatrix& v,
                                  const DenseMatrix& b) {
    if (a.cols() != v.rows() || a.rows() != b.rows() || v.cols() != b.cols())
        detail::failf("frobenius_objective: shape mismatch A(", a.rows(), "x", a.cols(), ") V(",
                      v.rows(), "x", v.cols(), ") B(", b.rows(), "x", b.cols(), ")");
    const DenseMatrix av = matmul(a, v);
    double s = 0.0;
    for (index_t i = 0; i < b.rows(); ++i)
        for (index_t j = 0; j < b.cols(); ++j) {
            const double d = av(i, j) - b(i, j);
            s += d * d;
        }
    require(std::isfinite(s), "frobenius_objective: non-finite result");
    return s;
}

}  // namespace ssml
