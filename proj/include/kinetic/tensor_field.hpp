#pragma once

// Diffusion-tensor calculus: principal square roots, Sylvester-equation
// derivatives solved in the eigenbasis, divergences, the drift correction
// h = grad(sigma):sigma^T, and the structural residual
// Lambda = div D - 2 sigma div sigma^T.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/linalg.hpp"

namespace kinetic {

/// Principal square root: the unique symmetric positive definite sigma with
/// sigma sigma^T = D. Eigenvalues at or below eigen_tol = 1e-12 * max|lambda|
/// are rejected as not positive definite.
inline SymMatrix principal_sqrt(const SymMatrix& d) {
    Vec ev;
    Mat p;
    jacobi_eigensym(d, ev, p);
    double lmax = 0;
    for (double l : ev) lmax = std::max(lmax, std::abs(l));
    const double eigen_tol = 1e-12 * lmax;
    for (double l : ev)
        if (l <= eigen_tol)
            throw NotPositiveDefinite("eigenvalue " + std::to_string(l) +
                                      " not above tolerance " + std::to_string(eigen_tol));
    const int n = d.dim();
    Mat s(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int k = 0; k < n; ++k) acc += p(i, k) * std::sqrt(ev[k]) * p(j, k);
            s(i, j) = acc;
        }
    return SymMatrix(s);
}

/// Solve sigma sigma' + sigma' sigma = dD for sigma' = d(sigma)/dx_k, using
/// the componentwise closed form r_ij = h_ij / (sqrt(l_i) + sqrt(l_j)) in the
/// eigenbasis of D. O(d^3); denominators are bounded below by 2 sqrt(alpha)
/// under uniform ellipticity.
inline SymMatrix sylvester_sigma_derivative(const SymMatrix& d, const SymMatrix& dd) {
    if (d.dim() != dd.dim()) throw DimensionMismatch("sylvester dims");
    Vec ev;
    Mat p;
    jacobi_eigensym(d, ev, p);
    double lmax = 0;
    for (double l : ev) lmax = std::max(lmax, std::abs(l));
    const double eigen_tol = 1e-12 * lmax;
    for (double l : ev)
        if (l <= eigen_tol) throw NotPositiveDefinite("sylvester: D not positive definite");
    const int n = d.dim();
    const Mat pt = p.transpose();
    Mat h = pt * dd.mat() * p;
    Mat r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = h(i, j) / (std::sqrt(ev[i]) + std::sqrt(ev[j]));
    Mat sp = p * r * pt;
    // symmetric up to rounding; symmetrize before the typed constructor
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            double v = 0.5 * (sp(i, j) + sp(j, i));
            sp(i, j) = v;
            sp(j, i) = v;
        }
    return SymMatrix(sp);
}

enum class DerivMode { analytic_preferred, force_fd };

/// A diffusion model: drift b, tensor D, optionally analytic sigma and
/// gradients, declared ellipticity constant and per-direction derivative
/// bounds. All evaluators are pure; models are immutable once built.
struct TensorFieldModel {
    int dim = 0;
    std::string name;
    std::function<Vec(const Vec&)> drift;               // b(x)
    std::function<SymMatrix(const Vec&)> diff_tensor;   // D(x)
    std::function<Mat(const Vec&)> sigma;               // optional analytic sigma(x)
    std::function<Rank3Field(const Vec&)> grad_D;       // optional (i,j,k) = d_k D_ij
    std::function<Rank3Field(const Vec&)> grad_sigma;   // optional (i,j,k) = d_k sigma_ij
    std::function<Vec(const Vec&)> correction_h;        // optional closed-form grad(sigma):sigma^T
    std::function<Vec(const Vec&)> lambda_closed;       // optional closed-form structural residual
    double ellipticity_alpha = 0.0;                     // 0 means undeclared
    Vec deriv_bound_M;                                  // empty means undeclared
    double domain_L = 5.0;
    bool sigma_symmetric = true;

    bool has_sigma() const { return static_cast<bool>(sigma); }
};

inline double fd_step(const Vec& x) { return 1e-5 * (1.0 + norm2(x)); }

/// sigma(x): analytic when supplied, else the principal root of D(x).
inline Mat sigma_at(const TensorFieldModel& m, const Vec& x) {
    if (m.sigma) return m.sigma(x);
    return principal_sqrt(m.diff_tensor(x)).mat();
}

/// Gradient of D: analytic when supplied (and not forced to FD), else
/// central finite differences with step fd_h = 1e-5 (1 + |x|).
inline Rank3Field grad_D_at(const TensorFieldModel& m, const Vec& x,
                            DerivMode mode = DerivMode::analytic_preferred) {
    if (m.grad_D && mode == DerivMode::analytic_preferred) return m.grad_D(x);
    const int d = m.dim;
    const double h = fd_step(x);
    Rank3Field g(d);
    for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        SymMatrix dp = m.diff_tensor(xp), dm = m.diff_tensor(xm);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j, k) = (dp(i, j) - dm(i, j)) / (2.0 * h);
    }
    return g;
}

/// Gradient of sigma. Preference order: analytic grad_sigma, then the
/// Sylvester solve fed by analytic grad_D (valid for the symmetric principal
/// root), then central differences of sigma itself.
inline Rank3Field grad_sigma_at(const TensorFieldModel& m, const Vec& x,
                                DerivMode mode = DerivMode::analytic_preferred) {
    const int d = m.dim;
    if (mode == DerivMode::analytic_preferred) {
        if (m.grad_sigma) return m.grad_sigma(x);
        if (m.grad_D && m.sigma_symmetric) {
            const SymMatrix dmat = m.diff_tensor(x);
            const Rank3Field gd = m.grad_D(x);
            Rank3Field g(d);
            for (int k = 0; k < d; ++k) {
                SymMatrix ddk(d);
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j) ddk.set(i, j, 0.5 * (gd(i, j, k) + gd(j, i, k)));
                SymMatrix sp = sylvester_sigma_derivative(dmat, ddk);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) g(i, j, k) = sp(i, j);
            }
            return g;
        }
    }
    const double h = fd_step(x);
    Rank3Field g(d);
    for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        Mat sp = sigma_at(m, xp), sm = sigma_at(m, xm);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j, k) = (sp(i, j) - sm(i, j)) / (2.0 * h);
    }
    return g;
}

/// (div D)_i = sum_j d_j D_ij.
inline Vec divergence_D(const TensorFieldModel& m, const Vec& x,
                        DerivMode mode = DerivMode::analytic_preferred) {
    const Rank3Field g = grad_D_at(m, x, mode);
    const int d = m.dim;
    Vec r(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r[i] += g(i, j, j);
    return r;
}

/// (div sigma^T)_i = sum_j d_j sigma_ji.
inline Vec divergence_sigmaT(const TensorFieldModel& m, const Vec& x,
                             DerivMode mode = DerivMode::analytic_preferred) {
    const Rank3Field g = grad_sigma_at(m, x, mode);
    const int d = m.dim;
    Vec r(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r[i] += g(j, i, j);
    return r;
}

/// Structural residual Lambda(x) = div D - 2 sigma (div sigma^T). Identically
/// zero exactly when the Fick-form equation is the density equation of the
/// drift-uncorrected right-endpoint SDE.
inline Vec structural_residual(const TensorFieldModel& m, const Vec& x,
                               DerivMode mode = DerivMode::analytic_preferred) {
    const Vec dd = divergence_D(m, x, mode);
    const Vec ds = divergence_sigmaT(m, x, mode);
    const Mat s = sigma_at(m, x);
    const Vec sds = s.apply(ds);
    Vec r(m.dim);
    for (int i = 0; i < m.dim; ++i) r[i] = dd[i] - 2.0 * sds[i];
    return r;
}

/// Drift correction h = div D - sigma div sigma^T, evaluated through both of
/// its algebraically equal forms (the other being grad(sigma):sigma^T). The
/// two routes sharing no cancellation, a disagreement beyond tolerance flags
/// a derivative bug as IdentityMismatch.
inline Vec ito_correction_h(const TensorFieldModel& m, const Vec& x,
                            DerivMode mode = DerivMode::analytic_preferred) {
    const Vec dd = divergence_D(m, x, mode);
    const Vec ds = divergence_sigmaT(m, x, mode);
    const Mat s = sigma_at(m, x);
    const Vec sds = s.apply(ds);
    Vec route_a(m.dim);
    for (int i = 0; i < m.dim; ++i) route_a[i] = dd[i] - sds[i];
    const Rank3Field gs = grad_sigma_at(m, x, mode);
    const Vec route_b = double_dot(gs, s.transpose());
    const double tol = 1e-9 * std::max(1.0, s.frobenius() * s.frobenius());
    for (int i = 0; i < m.dim; ++i)
        if (std::abs(route_a[i] - route_b[i]) > tol)
            throw IdentityMismatch("h routes disagree: " + std::to_string(route_a[i]) +
                                   " vs " + std::to_string(route_b[i]));
    return route_b;
}

struct BoundCheckReport {
    Vec observed_max;  // per direction k: max over points of |d_k sigma_ij|
    Vec bound;         // per direction k: d^2 M_k / (2 sqrt(alpha))
    bool holds = false;
};

/// Check |d_k sigma_ij| <= d^2 M_k / (2 sqrt(alpha)) on the given points.
inline BoundCheckReport derivative_bound_check(const TensorFieldModel& m,
                                               const std::vector<Vec>& points,
                                               DerivMode mode = DerivMode::analytic_preferred) {
    if (m.ellipticity_alpha <= 0.0 || m.deriv_bound_M.empty())
        throw MissingBounds("model must declare ellipticity_alpha and deriv_bound_M");
    const int d = m.dim;
    BoundCheckReport rep;
    rep.observed_max.assign(d, 0.0);
    rep.bound.assign(d, 0.0);
    const double c = static_cast<double>(d) * d / (2.0 * std::sqrt(m.ellipticity_alpha));
    for (int k = 0; k < d; ++k) rep.bound[k] = c * m.deriv_bound_M[k];
    for (const Vec& x : points) {
        const Rank3Field g = grad_sigma_at(m, x, mode);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    rep.observed_max[k] = std::max(rep.observed_max[k], std::abs(g(i, j, k)));
    }
    rep.holds = true;
    for (int k = 0; k < d; ++k)
        if (rep.observed_max[k] > rep.bound[k]) rep.holds = false;
    return rep;
}

} // namespace kinetic
