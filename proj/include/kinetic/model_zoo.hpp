#pragma once

// Constructors for the diffusion models used throughout: six positive
// families satisfying div D = 2 sigma div sigma^T, the radially modulated
// variant, two cross-coupled negative families with their admissible
// elementary-function couplings, plus the scalar SDE models (heterogeneous
// diffusion, kinetic energy, scaled Brownian motion). Each constructor
// validates its hypotheses and builds analytic derivatives.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/brownian.hpp"
#include "kinetic/linalg.hpp"
#include "kinetic/tensor_field.hpp"

namespace kinetic {

// ---------------------------------------------------------------------------
// Elementary scalar fields with analytic gradients and closed-form bounds.

struct ScalarProfile {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    double inf_value = 0;
    double sup_value = 0;
    Vec sup_abs_grad; // per direction
    std::string desc;
};

inline ScalarProfile profile_constant(int d, double c) {
    ScalarProfile p;
    p.value = [c](const Vec&) { return c; };
    p.grad = [d](const Vec&) { return Vec(d, 0.0); };
    p.inf_value = c;
    p.sup_value = c;
    p.sup_abs_grad.assign(d, 0.0);
    p.desc = "const(" + std::to_string(c) + ")";
    return p;
}

/// c0 + amp * sin(k . x + phase)
inline ScalarProfile profile_offset_sin(int d, double c0, double amp, Vec wavevec,
                                        double phase = 0.0) {
    if (static_cast<int>(wavevec.size()) != d) throw ParamViolation("wavevector dim");
    ScalarProfile p;
    p.value = [c0, amp, wavevec, phase](const Vec& x) {
        double s = phase;
        for (std::size_t i = 0; i < x.size(); ++i) s += wavevec[i] * x[i];
        return c0 + amp * std::sin(s);
    };
    p.grad = [d, amp, wavevec, phase](const Vec& x) {
        double s = phase;
        for (std::size_t i = 0; i < x.size(); ++i) s += wavevec[i] * x[i];
        Vec g(d);
        const double c = amp * std::cos(s);
        for (int i = 0; i < d; ++i) g[i] = c * wavevec[i];
        return g;
    };
    p.inf_value = c0 - std::abs(amp);
    p.sup_value = c0 + std::abs(amp);
    p.sup_abs_grad.assign(d, 0.0);
    for (int i = 0; i < d; ++i) p.sup_abs_grad[i] = std::abs(amp * wavevec[i]);
    p.desc = "offset_sin";
    return p;
}

/// c0 + amp * exp(-|x - x0|^2 / ell^2)
inline ScalarProfile profile_gaussian(int d, double c0, double amp, Vec center, double ell) {
    if (static_cast<int>(center.size()) != d) throw ParamViolation("gaussian center dim");
    if (!(ell > 0)) throw ParamViolation("gaussian length scale must be positive");
    ScalarProfile p;
    p.value = [c0, amp, center, ell](const Vec& x) {
        double r2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = x[i] - center[i];
            r2 += z * z;
        }
        return c0 + amp * std::exp(-r2 / (ell * ell));
    };
    p.grad = [d, amp, center, ell](const Vec& x) {
        double r2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = x[i] - center[i];
            r2 += z * z;
        }
        const double e = amp * std::exp(-r2 / (ell * ell));
        Vec g(d);
        for (int i = 0; i < d; ++i) g[i] = -2.0 * (x[i] - center[i]) / (ell * ell) * e;
        return g;
    };
    p.inf_value = std::min(c0, c0 + amp);
    p.sup_value = std::max(c0, c0 + amp);
    p.sup_abs_grad.assign(d, std::abs(amp) * std::sqrt(2.0 / std::exp(1.0)) / ell);
    p.desc = "gaussian";
    return p;
}

/// c0 + amp * tanh((x_axis - c) / ell)
inline ScalarProfile profile_tanh_front(int d, double c0, double amp, int axis, double c,
                                        double ell) {
    if (axis < 0 || axis >= d) throw ParamViolation("tanh axis out of range");
    if (!(ell > 0)) throw ParamViolation("tanh length scale must be positive");
    ScalarProfile p;
    p.value = [c0, amp, axis, c, ell](const Vec& x) {
        return c0 + amp * std::tanh((x[axis] - c) / ell);
    };
    p.grad = [d, amp, axis, c, ell](const Vec& x) {
        Vec g(d, 0.0);
        double t = std::tanh((x[axis] - c) / ell);
        g[axis] = amp * (1.0 - t * t) / ell;
        return g;
    };
    p.inf_value = c0 - std::abs(amp);
    p.sup_value = c0 + std::abs(amp);
    p.sup_abs_grad.assign(d, 0.0);
    p.sup_abs_grad[axis] = std::abs(amp) / ell;
    p.desc = "tanh_front";
    return p;
}

/// One-variable profile with analytic derivative and closed-form bounds.
struct Profile1D {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    double inf_value = 0;
    double sup_value = 0;
    double sup_abs_deriv = 0;
    std::string desc;
};

inline Profile1D profile1d_constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, c, c, 0.0, "const"};
}

inline Profile1D profile1d_sin(double c0, double amp, double k, double phase = 0.0) {
    Profile1D p;
    p.value = [=](double s) { return c0 + amp * std::sin(k * s + phase); };
    p.deriv = [=](double s) { return amp * k * std::cos(k * s + phase); };
    p.inf_value = c0 - std::abs(amp);
    p.sup_value = c0 + std::abs(amp);
    p.sup_abs_deriv = std::abs(amp * k);
    p.desc = "sin";
    return p;
}

inline Profile1D profile1d_gaussian(double c0, double amp, double center, double ell) {
    if (!(ell > 0)) throw ParamViolation("gaussian length scale must be positive");
    Profile1D p;
    p.value = [=](double s) {
        double z = (s - center) / ell;
        return c0 + amp * std::exp(-z * z);
    };
    p.deriv = [=](double s) {
        double z = (s - center) / ell;
        return -2.0 * amp * z / ell * std::exp(-z * z);
    };
    p.inf_value = std::min(c0, c0 + amp);
    p.sup_value = std::max(c0, c0 + amp);
    p.sup_abs_deriv = std::abs(amp) * std::sqrt(2.0 / std::exp(1.0)) / ell;
    p.desc = "gaussian";
    return p;
}

inline Profile1D profile1d_tanh(double c0, double amp, double center, double ell) {
    if (!(ell > 0)) throw ParamViolation("tanh length scale must be positive");
    Profile1D p;
    p.value = [=](double s) { return c0 + amp * std::tanh((s - center) / ell); };
    p.deriv = [=](double s) {
        double t = std::tanh((s - center) / ell);
        return amp * (1.0 - t * t) / ell;
    };
    p.inf_value = c0 - std::abs(amp);
    p.sup_value = c0 + std::abs(amp);
    p.sup_abs_deriv = std::abs(amp) / ell;
    p.desc = "tanh";
    return p;
}

/// s^H on [0, inf); H > 0.
inline Profile1D profile1d_power(double h_exp) {
    if (!(h_exp > 0)) throw ParamViolation("power-law exponent must be positive");
    Profile1D p;
    p.value = [h_exp](double s) { return std::pow(std::max(s, 0.0), h_exp); };
    p.deriv = [h_exp](double s) {
        return s > 0 ? h_exp * std::pow(s, h_exp - 1.0) : 0.0;
    };
    p.inf_value = 0.0;
    p.sup_value = std::numeric_limits<double>::infinity();
    p.sup_abs_deriv = std::numeric_limits<double>::infinity();
    p.desc = "power";
    return p;
}

// ---------------------------------------------------------------------------
// Positive cases.

/// Case 1: constant positive definite tensor.
inline TensorFieldModel make_positive_case1(const SymMatrix& d0) {
    const int d = d0.dim();
    const double lmin = min_eigenvalue_sym(d0);
    if (lmin <= 0) throw ParamViolation("case 1: D0 must be positive definite");
    const SymMatrix s0 = principal_sqrt(d0);
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos1_const";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [d0](const Vec&) { return d0; };
    m.sigma = [s0](const Vec&) { return s0.mat(); };
    m.grad_D = [d](const Vec&) { return Rank3Field(d); };
    m.grad_sigma = [d](const Vec&) { return Rank3Field(d); };
    m.correction_h = [d](const Vec&) { return Vec(d, 0.0); };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = lmin;
    m.deriv_bound_M.assign(d, 0.0);
    return m;
}

/// Case 2: isotropic tensor D = g(x) I with inf g >= alpha > 0.
inline TensorFieldModel make_positive_case2(int d, const ScalarProfile& g) {
    if (!(g.inf_value > 0)) throw ParamViolation("case 2: inf g must be positive");
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos2_isotropic";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [d, g](const Vec& x) {
        Mat mm(d);
        const double v = g.value(x);
        for (int i = 0; i < d; ++i) mm(i, i) = v;
        return SymMatrix(mm);
    };
    m.sigma = [d, g](const Vec& x) {
        Mat mm(d);
        const double v = std::sqrt(g.value(x));
        for (int i = 0; i < d; ++i) mm(i, i) = v;
        return mm;
    };
    m.grad_D = [d, g](const Vec& x) {
        Rank3Field r(d);
        const Vec gr = g.grad(x);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) r(i, i, k) = gr[k];
        return r;
    };
    m.grad_sigma = [d, g](const Vec& x) {
        Rank3Field r(d);
        const Vec gr = g.grad(x);
        const double den = 2.0 * std::sqrt(g.value(x));
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) r(i, i, k) = gr[k] / den;
        return r;
    };
    m.correction_h = [g](const Vec& x) { return 0.5 * g.grad(x); };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = g.inf_value;
    m.deriv_bound_M = g.sup_abs_grad;
    return m;
}

/// Case 3: diagonal anisotropic tensor D = diag(g_1, ..., g_d).
inline TensorFieldModel make_positive_case3(const std::vector<ScalarProfile>& gs) {
    const int d = static_cast<int>(gs.size());
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& g : gs) {
        if (!(g.inf_value > 0)) throw ParamViolation("case 3: inf g_k must be positive");
        alpha = std::min(alpha, g.inf_value);
    }
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos3_diag";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [d, gs](const Vec& x) {
        Mat mm(d);
        for (int i = 0; i < d; ++i) mm(i, i) = gs[i].value(x);
        return SymMatrix(mm);
    };
    m.sigma = [d, gs](const Vec& x) {
        Mat mm(d);
        for (int i = 0; i < d; ++i) mm(i, i) = std::sqrt(gs[i].value(x));
        return mm;
    };
    m.grad_D = [d, gs](const Vec& x) {
        Rank3Field r(d);
        for (int i = 0; i < d; ++i) {
            const Vec gr = gs[i].grad(x);
            for (int k = 0; k < d; ++k) r(i, i, k) = gr[k];
        }
        return r;
    };
    m.grad_sigma = [d, gs](const Vec& x) {
        Rank3Field r(d);
        for (int i = 0; i < d; ++i) {
            const Vec gr = gs[i].grad(x);
            const double den = 2.0 * std::sqrt(gs[i].value(x));
            for (int k = 0; k < d; ++k) r(i, i, k) = gr[k] / den;
        }
        return r;
    };
    m.correction_h = [d, gs](const Vec& x) {
        Vec h(d);
        for (int i = 0; i < d; ++i) h[i] = 0.5 * gs[i].grad(x)[i];
        return h;
    };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = alpha;
    m.deriv_bound_M.assign(d, 0.0);
    for (int k = 0; k < d; ++k)
        for (const auto& g : gs) m.deriv_bound_M[k] = std::max(m.deriv_bound_M[k], g.sup_abs_grad[k]);
    return m;
}

/// Case 4: orthogonally diagonalizable tensor D = R diag(g_k) R^T with a
/// constant orthogonal R.
inline TensorFieldModel make_positive_case4(const Mat& r, const std::vector<ScalarProfile>& gs) {
    const int d = static_cast<int>(gs.size());
    if (r.dim() != d) throw ParamViolation("case 4: R dimension mismatch");
    const Mat rtr = r.transpose() * r;
    if ((rtr - Mat::identity(d)).frobenius() > 1e-12)
        throw ParamViolation("case 4: R must be orthogonal (||R^T R - I||_F <= 1e-12)");
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& g : gs) {
        if (!(g.inf_value > 0)) throw ParamViolation("case 4: inf g_k must be positive");
        alpha = std::min(alpha, g.inf_value);
    }
    const Mat rt = r.transpose();
    auto sandwich = [r, rt, d](const Vec& diag) {
        Mat lam(d);
        for (int i = 0; i < d; ++i) lam(i, i) = diag[i];
        return r * lam * rt;
    };
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos4_rotated";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [gs, sandwich, d](const Vec& x) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = gs[i].value(x);
        return SymMatrix(sandwich(v));
    };
    m.sigma = [gs, sandwich, d](const Vec& x) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = std::sqrt(gs[i].value(x));
        return sandwich(v);
    };
    m.grad_D = [gs, sandwich, d](const Vec& x) {
        Rank3Field out(d);
        for (int k = 0; k < d; ++k) {
            Vec v(d);
            for (int i = 0; i < d; ++i) v[i] = gs[i].grad(x)[k];
            const Mat mk = sandwich(v);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out(i, j, k) = mk(i, j);
        }
        return out;
    };
    m.grad_sigma = [gs, sandwich, d](const Vec& x) {
        Rank3Field out(d);
        for (int k = 0; k < d; ++k) {
            Vec v(d);
            for (int i = 0; i < d; ++i)
                v[i] = gs[i].grad(x)[k] / (2.0 * std::sqrt(gs[i].value(x)));
            const Mat mk = sandwich(v);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out(i, j, k) = mk(i, j);
        }
        return out;
    };
    // structural condition holds, so h = (1/2) div D = (1/2) sum_k r_k (grad g_k . r_k)
    m.correction_h = [gs, r, d](const Vec& x) {
        Vec h(d, 0.0);
        for (int k = 0; k < d; ++k) {
            const Vec gr = gs[k].grad(x);
            double proj = 0;
            for (int i = 0; i < d; ++i) proj += gr[i] * r(i, k);
            for (int i = 0; i < d; ++i) h[i] += 0.5 * r(i, k) * proj;
        }
        return h;
    };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = alpha;
    m.deriv_bound_M.assign(d, 0.0);
    for (int k = 0; k < d; ++k) {
        double s = 0;
        for (const auto& g : gs) s += g.sup_abs_grad[k];
        m.deriv_bound_M[k] = s; // |R diag(dg) R^T|_ij <= sum_k |dg_k|
    }
    return m;
}

/// Case 5: privileged orientation, D = f v v^T + g (I - v v^T), |v| = 1.
inline TensorFieldModel make_positive_case5(const Vec& v, const ScalarProfile& f,
                                            const ScalarProfile& g) {
    const int d = static_cast<int>(v.size());
    if (std::abs(norm2(v) - 1.0) > 1e-12)
        throw ParamViolation("case 5: orientation v must be a unit vector");
    if (!(f.inf_value > 0) || !(g.inf_value > 0))
        throw ParamViolation("case 5: inf f and inf g must be positive");
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos5_oriented";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [d, v, f, g](const Vec& x) {
        Mat mm(d);
        const double fv = f.value(x), gv = g.value(x);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                mm(i, j) = gv * (i == j ? 1.0 : 0.0) + (fv - gv) * v[i] * v[j];
        return SymMatrix(mm);
    };
    m.sigma = [d, v, f, g](const Vec& x) {
        Mat mm(d);
        const double sf = std::sqrt(f.value(x)), sg = std::sqrt(g.value(x));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                mm(i, j) = sg * (i == j ? 1.0 : 0.0) + (sf - sg) * v[i] * v[j];
        return mm;
    };
    m.grad_D = [d, v, f, g](const Vec& x) {
        Rank3Field r(d);
        const Vec gf = f.grad(x), gg = g.grad(x);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    r(i, j, k) = gg[k] * (i == j ? 1.0 : 0.0) + (gf[k] - gg[k]) * v[i] * v[j];
        return r;
    };
    m.grad_sigma = [d, v, f, g](const Vec& x) {
        Rank3Field r(d);
        const Vec gf = f.grad(x), gg = g.grad(x);
        const double df = 1.0 / (2.0 * std::sqrt(f.value(x)));
        const double dg = 1.0 / (2.0 * std::sqrt(g.value(x)));
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    r(i, j, k) = gg[k] * dg * (i == j ? 1.0 : 0.0) +
                                 (gf[k] * df - gg[k] * dg) * v[i] * v[j];
        return r;
    };
    m.correction_h = [d, v, f, g](const Vec& x) {
        const Vec gf = f.grad(x), gg = g.grad(x);
        double proj = 0;
        for (int i = 0; i < d; ++i) proj += (gf[i] - gg[i]) * v[i];
        Vec h(d);
        for (int i = 0; i < d; ++i) h[i] = 0.5 * (gg[i] + v[i] * proj);
        return h;
    };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = std::min(f.inf_value, g.inf_value);
    m.deriv_bound_M.assign(d, 0.0);
    for (int k = 0; k < d; ++k)
        m.deriv_bound_M[k] = g.sup_abs_grad[k] + f.sup_abs_grad[k] + g.sup_abs_grad[k];
    return m;
}

/// Case 6: scalar-modulated constant anisotropic tensor D = g(x) B.
inline TensorFieldModel make_positive_case6(const SymMatrix& b, const ScalarProfile& g) {
    const int d = b.dim();
    const double cb = min_eigenvalue_sym(b);
    if (cb <= 0) throw ParamViolation("case 6: B must be positive definite");
    if (!(g.inf_value > 0)) throw ParamViolation("case 6: inf g must be positive");
    const SymMatrix bh = principal_sqrt(b);
    double bmax = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) bmax = std::max(bmax, std::abs(b(i, j)));
    TensorFieldModel m;
    m.dim = d;
    m.name = "pos6_modulated";
    m.drift = [d](const Vec&) { return Vec(d, 0.0); };
    m.diff_tensor = [b, g, d](const Vec& x) {
        return SymMatrix(g.value(x) * b.mat());
    };
    m.sigma = [bh, g](const Vec& x) { return std::sqrt(g.value(x)) * bh.mat(); };
    m.grad_D = [b, g, d](const Vec& x) {
        Rank3Field r(d);
        const Vec gr = g.grad(x);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) r(i, j, k) = gr[k] * b(i, j);
        return r;
    };
    m.grad_sigma = [bh, g, d](const Vec& x) {
        Rank3Field r(d);
        const Vec gr = g.grad(x);
        const double den = 2.0 * std::sqrt(g.value(x));
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) r(i, j, k) = gr[k] / den * bh(i, j);
        return r;
    };
    m.correction_h = [b, g](const Vec& x) { return 0.5 * b.apply(g.grad(x)); };
    m.lambda_closed = [d](const Vec&) { return Vec(d, 0.0); };
    m.ellipticity_alpha = g.inf_value * cb;
    m.deriv_bound_M.assign(d, 0.0);
    for (int k = 0; k < d; ++k) m.deriv_bound_M[k] = g.sup_abs_grad[k] * bmax;
    return m;
}

/// Radially modulated variant of Case 6: g(x) = h(|x|) with h'(0) = 0.
/// Higher odd derivatives vanishing at 0 remain the profile author's
/// responsibility.
inline TensorFieldModel make_radial_case(const SymMatrix& b, const Profile1D& h, int d) {
    if (std::abs(h.deriv(0.0)) > 1e-10)
        throw ParamViolation("radial case: h'(0) must vanish (|h'(0)| <= 1e-10)");
    if (!(h.inf_value > 0)) throw ParamViolation("radial case: inf h must be positive");
    ScalarProfile g;
    g.value = [h](const Vec& x) { return h.value(norm2(x)); };
    g.grad = [h, d](const Vec& x) {
        const double r = norm2(x);
        Vec gr(d, 0.0);
        if (r < 1e-12) return gr; // grad g(0) = 0 by the h'(0) = 0 condition
        const double q = h.deriv(r) / r;
        for (int i = 0; i < d; ++i) gr[i] = q * x[i];
        return gr;
    };
    g.inf_value = h.inf_value;
    g.sup_value = h.sup_value;
    g.sup_abs_grad.assign(d, h.sup_abs_deriv);
    g.desc = "radial(" + h.desc + ")";
    TensorFieldModel m = make_positive_case6(b, g);
    m.name = "pos_radial";
    return m;
}

// ---------------------------------------------------------------------------
// Negative cases (d = 2).

/// Negative Case 1: sigma = [[alpha, tau(x)], [tau(x), beta]] with
/// sup|tau| <= tau_max < sqrt(alpha beta). The structural residual has the
/// closed form ((beta - alpha) d2 tau, (alpha - beta) d1 tau).
inline TensorFieldModel make_negative_case1(double alpha, double beta,
                                            const ScalarProfile& tau) {
    if (!(alpha > 0) || !(beta > 0))
        throw ParamViolation("negative case 1: alpha and beta must be positive");
    const double tau_max = std::max(std::abs(tau.inf_value), std::abs(tau.sup_value));
    if (!(tau_max < std::sqrt(alpha * beta)))
        throw ParamViolation("negative case 1: sup|tau| must stay below sqrt(alpha beta)");
    const double delta1 = alpha * beta - tau_max * tau_max;
    TensorFieldModel m;
    m.dim = 2;
    m.name = "neg1_cross";
    m.drift = [](const Vec&) { return Vec(2, 0.0); };
    m.diff_tensor = [alpha, beta, tau](const Vec& x) {
        const double t = tau.value(x);
        Mat mm(2);
        mm(0, 0) = alpha * alpha + t * t;
        mm(1, 1) = beta * beta + t * t;
        mm(0, 1) = mm(1, 0) = (alpha + beta) * t;
        return SymMatrix(mm);
    };
    m.sigma = [alpha, beta, tau](const Vec& x) {
        const double t = tau.value(x);
        Mat mm(2);
        mm(0, 0) = alpha;
        mm(1, 1) = beta;
        mm(0, 1) = mm(1, 0) = t;
        return mm;
    };
    m.grad_D = [alpha, beta, tau](const Vec& x) {
        const double t = tau.value(x);
        const Vec gt = tau.grad(x);
        Rank3Field r(2);
        for (int k = 0; k < 2; ++k) {
            r(0, 0, k) = 2.0 * t * gt[k];
            r(1, 1, k) = 2.0 * t * gt[k];
            r(0, 1, k) = r(1, 0, k) = (alpha + beta) * gt[k];
        }
        return r;
    };
    m.grad_sigma = [tau](const Vec& x) {
        const Vec gt = tau.grad(x);
        Rank3Field r(2);
        for (int k = 0; k < 2; ++k) r(0, 1, k) = r(1, 0, k) = gt[k];
        return r;
    };
    m.correction_h = [alpha, beta, tau](const Vec& x) {
        const double t = tau.value(x);
        const Vec gt = tau.grad(x);
        return Vec{t * gt[0] + beta * gt[1], alpha * gt[0] + t * gt[1]};
    };
    m.lambda_closed = [alpha, beta, tau](const Vec& x) {
        const Vec gt = tau.grad(x);
        return Vec{(beta - alpha) * gt[1], (alpha - beta) * gt[0]};
    };
    m.ellipticity_alpha = (delta1 / (alpha + beta)) * (delta1 / (alpha + beta));
    const double sup_dt = std::max(tau.sup_abs_grad[0], tau.sup_abs_grad[1]);
    m.deriv_bound_M.assign(2, std::max(2.0 * tau_max, alpha + beta) * sup_dt);
    return m;
}

/// Negative Case 2: sigma = [[a(x1), eps], [eps, b(x2)]] with
/// a >= a0 > 0, b >= b0 > 0 and inf(ab) - eps^2 >= delta2 > 0. The residual
/// has the closed form -eps (d2 b, d1 a).
inline TensorFieldModel make_negative_case2(double eps, const Profile1D& a,
                                            const Profile1D& b, double delta2) {
    if (!(a.inf_value > 0) || !(b.inf_value > 0))
        throw ParamViolation("negative case 2: a and b must be bounded below by positives");
    if (!(delta2 > 0)) throw ParamViolation("negative case 2: delta2 must be positive");
    if (!(a.inf_value * b.inf_value - eps * eps >= delta2))
        throw ParamViolation("negative case 2: inf(a) inf(b) - eps^2 >= delta2 violated");
    // closed-form amplitude inequality above is the binding constraint;
    // the dense sample grid below is a safety net on the default domain
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j) {
            double x1 = -5.0 + 10.0 * i / 200.0, x2 = -5.0 + 10.0 * j / 200.0;
            if (a.value(x1) * b.value(x2) - eps * eps < delta2 * (1.0 - 1e-12))
                throw ParamViolation("negative case 2: grid validation found ab - eps^2 < delta2");
        }
    TensorFieldModel m;
    m.dim = 2;
    m.name = "neg2_separable";
    m.drift = [](const Vec&) { return Vec(2, 0.0); };
    m.diff_tensor = [eps, a, b](const Vec& x) {
        const double av = a.value(x[0]), bv = b.value(x[1]);
        Mat mm(2);
        mm(0, 0) = av * av + eps * eps;
        mm(1, 1) = bv * bv + eps * eps;
        mm(0, 1) = mm(1, 0) = eps * (av + bv);
        return SymMatrix(mm);
    };
    m.sigma = [eps, a, b](const Vec& x) {
        Mat mm(2);
        mm(0, 0) = a.value(x[0]);
        mm(1, 1) = b.value(x[1]);
        mm(0, 1) = mm(1, 0) = eps;
        return mm;
    };
    m.grad_D = [eps, a, b](const Vec& x) {
        const double av = a.value(x[0]), bv = b.value(x[1]);
        const double da = a.deriv(x[0]), db = b.deriv(x[1]);
        Rank3Field r(2);
        r(0, 0, 0) = 2.0 * av * da;
        r(0, 1, 0) = r(1, 0, 0) = eps * da;
        r(1, 1, 1) = 2.0 * bv * db;
        r(0, 1, 1) = r(1, 0, 1) = eps * db;
        return r;
    };
    m.grad_sigma = [a, b](const Vec& x) {
        Rank3Field r(2);
        r(0, 0, 0) = a.deriv(x[0]);
        r(1, 1, 1) = b.deriv(x[1]);
        return r;
    };
    m.correction_h = [a, b](const Vec& x) {
        return Vec{a.value(x[0]) * a.deriv(x[0]), b.value(x[1]) * b.deriv(x[1])};
    };
    m.lambda_closed = [eps, a, b](const Vec& x) {
        return Vec{-eps * b.deriv(x[1]), -eps * a.deriv(x[0])};
    };
    const double trace_sup = a.sup_value + b.sup_value;
    m.ellipticity_alpha = (delta2 / trace_sup) * (delta2 / trace_sup);
    m.deriv_bound_M = {std::max(2.0 * a.sup_value, std::abs(eps)) * a.sup_abs_deriv,
                       std::max(2.0 * b.sup_value, std::abs(eps)) * b.sup_abs_deriv};
    return m;
}

// ---------------------------------------------------------------------------
// Scalar SDE models.

/// A scalar SDE written in Ito form, with optional closed-form solution as a
/// function of the driving Brownian value and an optional stopping rule on
/// the driver.
struct ScalarSdeSpec {
    std::string name;
    double k = 0;
    double alpha_exp = 0;
    std::function<double(double)> drift;            // Ito-form drift
    std::function<double(double)> noise_amp;        // sigma(x) >= 0 on domain
    std::function<double(double)> noise_amp_deriv;  // d sigma / dx
    double domain_floor = -std::numeric_limits<double>::infinity();
    bool requires_positive_x0 = false;

    enum class StopKind { none, w_above, w_below };
    StopKind stop_kind = StopKind::none;
    std::function<double(double)> stop_level;  // level on W, given x0
    PathStatus stop_outcome = PathStatus::alive;

    std::function<double(double, double)> analytic;  // (x0, W_t) -> X_t
    bool has_analytic = false;

    // kinetic-energy extras: the drift constants of the Ito and
    // Fehlberg-form writings of the same equation
    double ito_drift_const = std::numeric_limits<double>::quiet_NaN();
    double fehlberg_drift_const = std::numeric_limits<double>::quiet_NaN();

    // scaled Brownian motion: deterministic amplitude F(t) on [t_a, t_b]
    std::function<double(double)> time_amp;
    double t_a = 0, t_b = 0;
};

/// Heterogeneous diffusion dX = (alpha k^2 / 2) X^{2 alpha - 1} dt + k X^alpha dW.
/// Exponents {1, 2, 1/2, 3/4, 1/4} carry closed-form solutions and stopping
/// times; any other exponent builds a spec without an oracle.
inline ScalarSdeSpec make_het_diffusion(double alpha_exp, double k) {
    if (!(k > 0)) throw ParamViolation("het diffusion: k must be positive");
    ScalarSdeSpec s;
    s.name = "het_diffusion";
    s.k = k;
    s.alpha_exp = alpha_exp;
    s.domain_floor = 0.0;
    // fractional powers need the nonnegativity clamp; integer exponents stay
    // unclamped so an excursion below zero keeps honest dynamics (and a
    // near-singularity overshoot diverges instead of freezing)
    const bool fractional = std::rint(alpha_exp) != alpha_exp;
    auto clamp = [fractional](double x) { return fractional ? std::max(x, 0.0) : x; };
    s.drift = [alpha_exp, k, clamp](double x) {
        return 0.5 * alpha_exp * k * k * std::pow(clamp(x), 2.0 * alpha_exp - 1.0);
    };
    s.noise_amp = [alpha_exp, k, clamp](double x) {
        return k * std::pow(clamp(x), alpha_exp);
    };
    s.noise_amp_deriv = [alpha_exp, k, clamp](double x) {
        return alpha_exp * k * std::pow(clamp(x), alpha_exp - 1.0);
    };
    if (alpha_exp == 1.0) {
        s.has_analytic = true;
        s.analytic = [k](double x0, double w) { return x0 * std::exp(k * w); };
    } else if (alpha_exp == 2.0) {
        s.has_analytic = true;
        s.analytic = [k](double x0, double w) {
            if (x0 == 0.0) return 0.0;
            return 1.0 / (1.0 / x0 - k * w);
        };
        s.stop_kind = ScalarSdeSpec::StopKind::w_above;
        s.stop_level = [k](double x0) {
            return x0 == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (x0 * k);
        };
        s.stop_outcome = PathStatus::blown_up;
    } else if (alpha_exp == 0.5) {
        s.has_analytic = true;
        s.analytic = [k](double x0, double w) {
            const double r = 0.5 * k * w + std::sqrt(x0);
            return r * r;
        };
        // x0 = 0 reproduces the globally reflecting solution; the zero-hit
        // stopping time applies to positive starts
        s.stop_kind = ScalarSdeSpec::StopKind::w_below;
        s.stop_level = [k](double x0) {
            return x0 == 0.0 ? -std::numeric_limits<double>::infinity()
                             : -2.0 * std::sqrt(x0) / k;
        };
        s.stop_outcome = PathStatus::absorbed;
    } else if (alpha_exp == 0.75) {
        s.has_analytic = true;
        // x0 = 0 selects the identically-zero solution
        s.analytic = [k](double x0, double w) {
            if (x0 == 0.0) return 0.0;
            const double r = 0.25 * k * w + std::pow(x0, 0.25);
            return r * r * r * r;
        };
        s.stop_kind = ScalarSdeSpec::StopKind::w_below;
        s.stop_level = [k](double x0) {
            return x0 == 0.0 ? -std::numeric_limits<double>::infinity()
                             : -4.0 * std::pow(x0, 0.25) / k;
        };
        s.stop_outcome = PathStatus::absorbed;
    } else if (alpha_exp == 0.25) {
        s.has_analytic = true;
        s.requires_positive_x0 = true; // Ito form needs x0 > 0
        s.analytic = [k](double x0, double w) {
            const double r = 0.75 * k * w + std::pow(x0, 0.75);
            return std::cbrt(r * r * r * r);
        };
        s.stop_kind = ScalarSdeSpec::StopKind::w_below;
        s.stop_level = [k](double x0) { return -4.0 / (3.0 * k) * std::pow(x0, 0.75); };
        s.stop_outcome = PathStatus::absorbed;
    }
    return s;
}

/// Kinetic energy of a particle with Brownian velocity:
/// dQ = (k^2/2) dt + k sqrt(2Q) dW, Q_0 = 0, solving Q = k^2 W^2 / 2.
/// The same equation in Fehlberg form carries the drift constant k^2/1024.
inline ScalarSdeSpec make_kinetic_energy(double k) {
    if (!(k > 0)) throw ParamViolation("kinetic energy: k must be positive");
    ScalarSdeSpec s;
    s.name = "kinetic_energy";
    s.k = k;
    s.domain_floor = 0.0;
    s.ito_drift_const = 0.5 * k * k;
    s.fehlberg_drift_const = k * k / 1024.0;
    s.drift = [k](double) { return 0.5 * k * k; };
    s.noise_amp = [k](double q) { return k * std::sqrt(2.0 * std::max(q, 0.0)); };
    s.noise_amp_deriv = [k](double q) {
        const double qc = std::max(q, 1e-300);
        return k / std::sqrt(2.0 * qc);
    };
    s.has_analytic = true;
    s.analytic = [k](double q0, double w) {
        if (q0 != 0.0) throw DomainViolation("kinetic energy oracle is stated for Q0 = 0");
        return 0.5 * k * k * w * w;
    };
    return s;
}

/// Scaled Brownian motion dX = F(t) dW with F continuous and of bounded
/// variation on [a, b]. The total-variation estimate must stabilise under
/// grid refinement (heuristic: flag divergence if it doubles when the grid
/// doubles).
inline ScalarSdeSpec make_scaled_bm(const Profile1D& f, double a, double b) {
    if (!(b > a) || a < 0) throw ParamViolation("scaled bm: need 0 <= a < b");
    auto tv = [&](int m) {
        double s = 0, prev = f.value(a);
        for (int j = 1; j <= m; ++j) {
            double cur = f.value(a + (b - a) * j / m);
            s += std::abs(cur - prev);
            prev = cur;
        }
        return s;
    };
    const double tv1 = tv(1024), tv2 = tv(2048), tv4 = tv(4096);
    if ((tv1 > 1e-12 && tv2 > 1.9 * tv1) || (tv2 > 1e-12 && tv4 > 1.9 * tv2))
        throw ParamViolation("scaled bm: total variation estimate diverges under refinement");
    ScalarSdeSpec s;
    s.name = "scaled_bm";
    s.time_amp = f.value;
    s.t_a = a;
    s.t_b = b;
    s.drift = [](double) { return 0.0; };
    s.noise_amp = [](double) { return 1.0; };
    s.noise_amp_deriv = [](double) { return 0.0; };
    return s;
}

} // namespace kinetic
