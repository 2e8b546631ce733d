#pragma once

// Lambda-point Riemann-sum stochastic integrals, the right-endpoint
// multidimensional integral and its Ito conversion residual, the Fehlberg
// 255/512 integral with its identity check, the ill-posed ratio
// discretization, and lambda-integrals of deterministic integrands.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "kinetic/brownian.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/linalg.hpp"

namespace kinetic {

/// Sum_j Phi(W at t*_j) (W_{t_j} - W_{t_{j-1}}) for a scalar path.
/// Off-grid values come from the path's bridge sampler.
inline double lambda_riemann_sum(const std::function<double(double)>& phi,
                                 const BrownianPath& w, InterpretationTag tag) {
    const int n = w.partition().intervals();
    double s = 0;
    for (int j = 1; j <= n; ++j)
        s += phi(w.lambda_value(j, tag.lambda)) * w.increment(j);
    return s;
}

/// The lambda = 255/512 Riemann sum.
inline double fehlberg_integral(const std::function<double(double)>& phi,
                                const BrownianPath& w) {
    return lambda_riemann_sum(phi, w, InterpretationTag::fehlberg());
}

/// Right-hand side of the Fehlberg conversion identity: the Ito sum plus
/// (255/512) times the trapezoidal time integral of Phi'(W_t).
inline double fehlberg_identity_rhs(const std::function<double(double)>& phi,
                                    const std::function<double(double)>& dphi,
                                    const BrownianPath& w) {
    const int n = w.partition().intervals();
    double ito = 0, corr = 0;
    for (int j = 1; j <= n; ++j) {
        ito += phi(w.value(j - 1)) * w.increment(j);
        corr += 0.5 * (dphi(w.value(j - 1)) + dphi(w.value(j))) * w.partition().dt(j);
    }
    return ito + fehlberg_lambda * corr;
}

inline double fehlberg_identity_residual(const std::function<double(double)>& phi,
                                         const std::function<double(double)>& dphi,
                                         const BrownianPath& w) {
    return fehlberg_integral(phi, w) - fehlberg_identity_rhs(phi, dphi, w);
}

/// Matrix-valued integrand Psi(x, t) with its partial derivatives, as needed
/// by the conversion identity.
struct MatrixField {
    int dim = 0;
    std::function<Mat(const Vec&, double)> value;
    std::function<Mat(int, const Vec&, double)> partial; // d_k Psi
};

namespace detail {
inline void check_path_dims(const MatrixField& psi, const SamplePath& y) {
    if (psi.dim != y.dim) throw DimensionMismatch("integrand/path dimension mismatch");
}
} // namespace detail

/// Right-endpoint (Hanggi-Klimontovich) integral of Psi(Y_t, t) dY_t:
/// component i is Sum_j Psi_{i*}(Y_{t_j}, t_j) (Y_{t_j} - Y_{t_{j-1}}).
inline Vec hk_integral_multi(const MatrixField& psi, const SamplePath& y) {
    detail::check_path_dims(psi, y);
    const int d = y.dim, n = y.last_index();
    Vec s(d, 0.0);
    for (int j = 1; j <= n; ++j) {
        const Mat p = psi.value(y.state_vec(j), y.part.t(j));
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                s[i] += p(i, k) * (y.state(j, k) - y.state(j - 1, k));
    }
    return s;
}

/// Left-endpoint (Ito) sum of the same integrand.
inline Vec ito_integral_multi(const MatrixField& psi, const SamplePath& y) {
    detail::check_path_dims(psi, y);
    const int d = y.dim, n = y.last_index();
    Vec s(d, 0.0);
    for (int j = 1; j <= n; ++j) {
        const Mat p = psi.value(y.state_vec(j - 1), y.part.t(j - 1));
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                s[i] += p(i, k) * (y.state(j, k) - y.state(j - 1, k));
    }
    return s;
}

/// Residual of the right-endpoint-to-Ito conversion identity: the HK sum
/// minus the Ito sum minus Sum_{l,k} int (d_k Psi)_{*l} D_{lk} dt with the
/// correction integral done by the trapezoidal rule. Returns the Euclidean
/// norm of the d-vector residual; it vanishes under refinement.
inline double conversion_residual(const MatrixField& psi, const SamplePath& y,
                                  const std::function<SymMatrix(const Vec&, double)>& d_field) {
    detail::check_path_dims(psi, y);
    const int d = y.dim, n = y.last_index();
    const Vec hk = hk_integral_multi(psi, y);
    const Vec ito = ito_integral_multi(psi, y);
    Vec corr(d, 0.0);
    Vec integrand_prev(d, 0.0), integrand_cur(d, 0.0);
    auto eval_integrand = [&](int j, Vec& out) {
        std::fill(out.begin(), out.end(), 0.0);
        const Vec xj = y.state_vec(j);
        const double tj = y.part.t(j);
        const SymMatrix dmat = d_field(xj, tj);
        for (int k = 0; k < d; ++k) {
            const Mat dpsi = psi.partial(k, xj, tj);
            for (int l = 0; l < d; ++l)
                for (int i = 0; i < d; ++i) out[i] += dpsi(i, l) * dmat(l, k);
        }
    };
    eval_integrand(0, integrand_prev);
    for (int j = 1; j <= n; ++j) {
        eval_integrand(j, integrand_cur);
        const double dt = y.part.dt(j);
        for (int i = 0; i < d; ++i)
            corr[i] += 0.5 * (integrand_prev[i] + integrand_cur[i]) * dt;
        integrand_prev = integrand_cur;
    }
    double r2 = 0;
    for (int i = 0; i < d; ++i) {
        const double ri = hk[i] - ito[i] - corr[i];
        r2 += ri * ri;
    }
    return std::sqrt(r2);
}

/// Outcome of the ratio discretization
/// Sum_j (1/2)(W_{t_j}^2 / W_{t_{j-1}} + W_{t_{j-1}})(W_{t_j} - W_{t_{j-1}}).
/// Overflow is a recorded result, not an error: the scheme divides by path
/// values and is almost surely ill-posed on windows starting at 0.
struct HoResult {
    bool overflow = false;
    double sum = 0;                 // partial sum up to the overflow, or the full sum
    int overflow_j = -1;            // first offending term
    double w_abs_at_overflow = 0;   // |W_{t_{j-1}}| at that term
    double max_abs_term = 0;        // largest finite |summand| seen
    double max_abs_recip = 0;       // largest |1 / W_{t_{j-1}}| seen (the divergent factor)
};

inline HoResult ho_discretization_sum(const BrownianPath& w, double overflow_threshold = 1e12) {
    const int n = w.partition().intervals();
    HoResult r;
    for (int j = 1; j <= n; ++j) {
        const double wl = w.value(j - 1), wr = w.value(j);
        const double recip = 1.0 / std::abs(wl);
        r.max_abs_recip = std::max(r.max_abs_recip, recip);
        const double term = 0.5 * (wr * wr / wl + wl) * (wr - wl);
        if (!std::isfinite(term) || std::abs(term) > overflow_threshold) {
            r.overflow = true;
            r.overflow_j = j;
            r.w_abs_at_overflow = std::abs(wl);
            return r;
        }
        r.max_abs_term = std::max(r.max_abs_term, std::abs(term));
        r.sum += term;
    }
    return r;
}

/// Sum_j F(t*_j) (W_{t_j} - W_{t_{j-1}}) for deterministic F; the integrand
/// is evaluated at the exact lambda-point, no path interpolation involved.
inline double deterministic_lambda_integral(const std::function<double(double)>& f,
                                            const BrownianPath& w, InterpretationTag tag) {
    const int n = w.partition().intervals();
    double s = 0;
    for (int j = 1; j <= n; ++j)
        s += f(w.partition().lambda_point(j, tag.lambda)) * w.increment(j);
    return s;
}

/// Riemann-Stieltjes companion sum Sum_j W_{t_j} (F(t_j) - F(t_{j-1})); the
/// integration-by-parts identity states lambda-integral + this telescopes to
/// F(b) W_b - F(a) W_a.
inline double stieltjes_companion_sum(const std::function<double(double)>& f,
                                      const BrownianPath& w) {
    const int n = w.partition().intervals();
    double s = 0;
    for (int j = 1; j <= n; ++j)
        s += w.value(j) * (f(w.partition().t(j)) - f(w.partition().t(j - 1)));
    return s;
}

} // namespace kinetic
