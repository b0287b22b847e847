#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssml/matrix.hpp"

namespace ssml {

/// Householder QR with column pivoting, the rank-revealing workhorse behind
/// least_squares and orthonormal_basis. The factor is held column-major
/// internally; reflectors are stored below the diagonal with the implicit
/// leading 1 convention. Diagonal entries of R satisfying
/// |R_kk| <= tol * |R_00| with tol = 2^-40 * max(n, p) are truncated, and the
/// solution components of the truncated columns are set to zero.
class ColPivQR {
public:
    explicit ColPivQR(const DenseMatrix& a) : n_(a.rows()), p_(a.cols()) {
        require(n_ >= 1 && p_ >= 1, "ColPivQR: empty matrix");
        a.ensure_finite("ColPivQR input");

        qr_.resize(n_ * p_);
        for (index_t j = 0; j < p_; ++j)
            for (index_t i = 0; i < n_; ++i) qr_[j * n_ + i] = a(i, j);

        perm_.resize(p_);
        std::vector<double> norms2(p_), orig2(p_);
        for (index_t j = 0; j < p_; ++j) {
            perm_[j] = j;
            double s = 0.0;
            for (index_t i = 0; i < n_; ++i) s += col(j)[i] * col(j)[i];
            norms2[j] = orig2[j] = s;
        }

        const index_t max_steps = std::min(n_, p_);
        beta_.assign(max_steps, 0.0);
        steps_ = 0;
        for (index_t k = 0; k < max_steps; ++k) {
            index_t pivot = k;
            for (index_t j = k + 1; j < p_; ++j)
                if (norms2[j] > norms2[pivot]) pivot = j;
            if (pivot != k) {
                for (index_t i = 0; i < n_; ++i) std::swap(col(k)[i], col(pivot)[i]);
                std::swap(perm_[k], perm_[pivot]);
                std::swap(norms2[k], norms2[pivot]);
                std::swap(orig2[k], orig2[pivot]);
            }

            double* x = col(k) + k;
            const index_t len = n_ - k;
            double sigma2 = 0.0;
            for (index_t i = 0; i < len; ++i) sigma2 += x[i] * x[i];
            const double sigma = std::sqrt(sigma2);
            if (sigma == 0.0) break;  // remaining columns are numerically zero

            const double alpha = x[0];
            const double rkk = (alpha >= 0.0) ? -sigma : sigma;
            const double v0 = alpha - rkk;
            // v = (1, x[1..]/v0); beta = 2 / v'v = -v0 / rkk
            for (index_t i = 1; i < len; ++i) x[i] /= v0;
            beta_[k] = -v0 / rkk;
            x[0] = rkk;
            steps_ = k + 1;

            const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(p_);
#pragma omp parallel for schedule(static) if (len * (p_ - k) > 16384)
            for (std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(k) + 1; jj < ncols; ++jj) {
                const index_t j = static_cast<index_t>(jj);
                double* cj = col(j) + k;
                double dot = cj[0];
                for (index_t i = 1; i < len; ++i) dot += x[i] * cj[i];
                const double w = beta_[k] * dot;
                cj[0] -= w;
                for (index_t i = 1; i < len; ++i) cj[i] -= w * x[i];
            }

            for (index_t j = k + 1; j < p_; ++j) {
                const double r = col(j)[k];
                norms2[j] -= r * r;
                if (norms2[j] < 1e-8 * orig2[j]) {
                    double s = 0.0;
                    for (index_t i = k + 1; i < n_; ++i) s += col(j)[i] * col(j)[i];
                    norms2[j] = s;
                }
            }
        }

        r00_ = (steps_ > 0) ? std::abs(col(0)[0]) : 0.0;
        tol_ = std::ldexp(static_cast<double>(std::max(n_, p_)), -40);
        rank_ = 0;
        for (index_t k = 0; k < steps_; ++k) {
            if (std::abs(col(k)[k]) <= tol_ * r00_) break;
            ++rank_;
        }
    }

    index_t rows() const { return n_; }
    index_t cols() const { return p_; }
    index_t rank() const { return rank_; }

    /// Minimizer of ||A X - B||_F^2 over X, truncated at the numerical rank.
    DenseMatrix solve(const DenseMatrix& b) const {
        if (b.rows() != n_)
            detail::failf("ColPivQR::solve: B has ", b.rows(), " rows, expected ", n_);
        b.ensure_finite("ColPivQR::solve input");
        const index_t q = b.cols();
        require(q >= 1, "ColPivQR::solve: empty right-hand side");

        // Column-major working copy of B.
        std::vector<double> y(n_ * q);
        for (index_t j = 0; j < q; ++j)
            for (index_t i = 0; i < n_; ++i) y[j * n_ + i] = b(i, j);

        DenseMatrix x(p_, q);
#pragma omp parallel for schedule(static) if (n_ * q > 16384)
        for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(q); ++jj) {
            const index_t j = static_cast<index_t>(jj);
            double* yj = y.data() + j * n_;
            // Reflectors at or beyond rank_ only touch rows the
            // back-substitution never reads, so skip them.
            for (index_t k = 0; k < rank_; ++k) {
                const double* v = col(k) + k;
                const index_t len = n_ - k;
                double dot = yj[k];
                for (index_t i = 1; i < len; ++i) dot += v[i] * yj[k + i];
                const double w = beta_[k] * dot;
                yj[k] -= w;
                for (index_t i = 1; i < len; ++i) yj[k + i] -= w * v[i];
            }
            // Back-substitution on the leading rank x rank triangle.
            std::vector<double> z(rank_);
            for (index_t ii = rank_; ii-- > 0;) {
                double s = yj[ii];
                for (index_t l = ii + 1; l < rank_; ++l) s -= col(l)[ii] * z[l];
                z[ii] = s / col(ii)[ii];
            }
            for (index_t k = 0; k < rank_; ++k) x(perm_[k], j) = z[k];
        }
        x.ensure_finite("ColPivQR::solve");
        return x;
    }

    /// First `rank` columns of Q: an orthonormal basis of range(A).
    DenseMatrix orthonormal_basis() const {
        require(rank_ >= 1, "orthonormal_basis: zero matrix");
        std::vector<double> qcols(n_ * rank_, 0.0);
        for (index_t j = 0; j < rank_; ++j) qcols[j * n_ + j] = 1.0;
        for (index_t j = 0; j < rank_; ++j) {
            double* cj = qcols.data() + j * n_;
            for (index_t k = std::min(j + 1, rank_); k-- > 0;) {
                const double* v = col(k) + k;
                const index_t len = n_ - k;
                double dot = cj[k];
                for (index_t i = 1; i < len; ++i) dot += v[i] * cj[k + i];
                const double w = beta_[k] * dot;
                cj[k] -= w;
                for (index_t i = 1; i < len; ++i) cj[k + i] -= w * v[i];
            }
        }
        DenseMatrix out(n_, rank_);
        for (index_t j = 0; j < rank_; ++j)
            for (index_t i = 0; i < n_; ++i) out(i, j) = qcols[j * n_ + i];
        return out;
    }

private:
    double* col(index_t j) { return qr_.data() + j * n_; }
    const double* col(index_t j) const { return qr_.data() + j * n_; }

    index_t n_, p_;
    index_t steps_ = 0;
    index_t rank_ = 0;
    std::vector<double> qr_;
    std::vector<double> beta_;
    std::vector<index_t> perm_;
    double r00_ = 0.0, tol_ = 0.0;
};

/// argmin_V ||A V - B||_F^2 by column-pivoted Householder QR.
inline DenseMatrix least_squares(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() >= 1 && a.cols() >= 1, "least_squares: empty design matrix");
    if (a.rows() != b.rows())
        detail::failf("least_squares: A has ", a.rows(), " rows but B has ", b.rows());
    if (a.max_abs() == 0.0) detail::fail("zero design matrix");
    return ColPivQR(a).solve(b);
}

/// Orthonormal basis of range(A); column count is the numerical rank.
inline DenseMatrix orthonormal_basis(const DenseMatrix& a) {
    require(a.rows() >= 1 && a.cols() >= 1, "orthonormal_basis: empty matrix");
    if (a.max_abs() == 0.0) detail::fail("orthonormal_basis: zero matrix");
    return ColPivQR(a).orthonormal_basis();
}

}  // namespace ssml
