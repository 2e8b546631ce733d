#pragma once

// Dense small-matrix algebra for diffusion tensors. Dimensions are tiny
// (d <= 4 in practice) so everything is plain loops over row-major storage.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"

namespace kinetic {

using Vec = std::vector<double>;

inline double norm2(const Vec& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double norm_inf(const Vec& v) {
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator+(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator*(double c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

/// General dense square matrix, row-major.
class Mat {
public:
    Mat() = default;
    explicit Mat(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}
    Mat(int dim, std::initializer_list<double> vals) : Mat(dim) {
        if (static_cast<int>(vals.size()) != dim * dim)
            throw DimensionMismatch("Mat initializer size mismatch");
        std::copy(vals.begin(), vals.end(), a_.begin());
    }

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Mat transpose() const {
        Mat t(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius() const {
        double s = 0;
        for (double x : a_) s += x * x;
        return std::sqrt(s);
    }

    Vec apply(const Vec& v) const {
        if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch("Mat apply size");
        Vec r(dim_, 0.0);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.dim_ != b.dim_) throw DimensionMismatch("Mat product dims");
        Mat c(a.dim_);
        for (int i = 0; i < a.dim_; ++i)
            for (int k = 0; k < a.dim_; ++k) {
                double aik = a(i, k);
                for (int j = 0; j < a.dim_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend Mat operator+(const Mat& a, const Mat& b) {
        if (a.dim_ != b.dim_) throw DimensionMismatch("Mat sum dims");
        Mat c(a.dim_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] + b.a_[i];
        return c;
    }

    friend Mat operator-(const Mat& a, const Mat& b) {
        if (a.dim_ != b.dim_) throw DimensionMismatch("Mat diff dims");
        Mat c(a.dim_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] - b.a_[i];
        return c;
    }

    friend Mat operator*(double c, const Mat& a) {
        Mat r(a.dim_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = c * a.a_[i];
        return r;
    }

private:
    int dim_ = 0;
    std::vector<double> a_;
};

/// Symmetric matrix; construction enforces symmetry to 1e-12 relative and
/// finiteness of the entries.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : m_(dim) {}
    SymMatrix(int dim, std::initializer_list<double> vals) : SymMatrix(Mat(dim, vals)) {}

    explicit SymMatrix(const Mat& m) : m_(m) {
        const double scale = std::max(1.0, m.frobenius());
        for (int i = 0; i < m.dim(); ++i)
            for (int j = 0; j < m.dim(); ++j) {
                if (!std::isfinite(m(i, j))) throw NotSymmetric("non-finite entry");
                if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                    throw NotSymmetric("matrix is not symmetric within 1e-12 relative");
            }
        // store the exactly symmetric part
        for (int i = 0; i < m.dim(); ++i)
            for (int j = 0; j < i; ++j) {
                double v = 0.5 * (m_(i, j) + m_(j, i));
                m_(i, j) = v;
                m_(j, i) = v;
            }
    }

    static SymMatrix identity(int dim) { return SymMatrix(Mat::identity(dim)); }

    static SymMatrix diag(const Vec& d) {
        Mat m(static_cast<int>(d.size()));
        for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
        return SymMatrix(m);
    }

    int dim() const { return m_.dim(); }
    double operator()(int i, int j) const { return m_(i, j); }
    void set(int i, int j, double v) { m_(i, j) = v; m_(j, i) = v; }
    const Mat& mat() const { return m_; }
    operator const Mat&() const { return m_; }
    double frobenius() const { return m_.frobenius(); }
    Vec apply(const Vec& v) const { return m_.apply(v); }

private:
    Mat m_;
};

/// Third-order tensor a_{ijk}; used for gradients of matrix fields where
/// entry (i,j,k) holds the k-th partial of the (i,j) matrix entry.
class Rank3Field {
public:
    Rank3Field() = default;
    explicit Rank3Field(int dim)
        : dim_(dim), a_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

    int dim() const { return dim_; }
    double& operator()(int i, int j, int k) {
        return a_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
    }
    double operator()(int i, int j, int k) const {
        return a_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
    }

    /// Slice holding all (i,j) entries of the k-th partial derivative.
    Mat partial(int k) const {
        Mat m(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j, k);
        return m;
    }

    double max_abs() const {
        double s = 0;
        for (double x : a_) s = std::max(s, std::abs(x));
        return s;
    }

private:
    int dim_ = 0;
    std::vector<double> a_;
};

/// Double vertical dot product (A : B)_i = sum_{j,k} a_ijk b_jk.
inline Vec double_dot(const Rank3Field& a, const Mat& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("double_dot dims");
    const int d = a.dim();
    Vec r(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) r[i] += a(i, j, k) * b(j, k);
    return r;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues ascending; columns of P are the eigenvectors,
/// A = P diag(lambda) P^T.
inline void jacobi_eigensym(const SymMatrix& a, Vec& eigval, Mat& p) {
    const int n = a.dim();
    Mat m = a.mat();
    p = Mat::identity(n);
    if (n == 1) {
        eigval = {m(0, 0)};
        return;
    }
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off <= 1e-30 * std::max(1.0, m.frobenius() * m.frobenius())) break;
        for (int q = 1; q < n; ++q) {
            for (int pp = 0; pp < q; ++pp) {
                double apq = m(pp, q);
                if (apq == 0.0) continue;
                double app = m(pp, pp), aqq = m(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double mkp = m(k, pp), mkq = m(k, q);
                    m(k, pp) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    double mpk = m(pp, k), mqk = m(q, k);
                    m(pp, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (int k = 0; k < n; ++k) {
                    double pkp = p(k, pp), pkq = p(k, q);
                    p(k, pp) = c * pkp - s * pkq;
                    p(k, q) = s * pkp + c * pkq;
                }
            }
        }
    }
    eigval.assign(n, 0.0);
    for (int i = 0; i < n; ++i) eigval[i] = m(i, i);
    // sort ascending, carrying eigenvector columns along
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return eigval[i] < eigval[j]; });
    Vec ev(n);
    Mat ps(n);
    for (int j = 0; j < n; ++j) {
        ev[j] = eigval[idx[j]];
        for (int i = 0; i < n; ++i) ps(i, j) = p(i, idx[j]);
    }
    eigval = ev;
    p = ps;
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
inline double spectral_norm_sym(const SymMatrix& a) {
    Vec ev;
    Mat p;
    jacobi_eigensym(a, ev, p);
    double s = 0;
    for (double l : ev) s = std::max(s, std::abs(l));
    return s;
}

inline double min_eigenvalue_sym(const SymMatrix& a) {
    Vec ev;
    Mat p;
    jacobi_eigensym(a, ev, p);
    return ev.front();
}

} // namespace kinetic
