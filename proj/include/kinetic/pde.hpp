#pragma once

// Explicit finite-difference solver for the convection-diffusion equation on
// [-L, L]^d, d in {1, 2}, in two writings of the same operator:
//   fick:         du/dt = -div(b u) + (1/2) div(D grad u)
//   ito_standard: du/dt = -sum_i d_i(b~_i u) + (1/2) sum_ij d_i d_j(D_ij u)
// Both are discretized in flux form with no-flux boundaries, so total mass
// telescopes exactly. Convection is upwinded in the fick variant (positivity
// over order) and centered in the ito variant, which is therefore fully
// second order but not positivity preserving.

#include <cmath>
#include <functional>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/linalg.hpp"
#include "kinetic/tensor_field.hpp"

namespace kinetic {

struct GridSpec {
    int dim = 1;
    int nx = 0, ny = 0; // cells per axis (ny ignored in 1D)
    double L = 5.0;

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && nx == o.nx && (dim == 1 || ny == o.ny) && L == o.L;
    }
};

/// Rectangular grid of cell-averaged density values.
struct DensityGrid {
    GridSpec spec;
    std::vector<double> values; // nx (1D) or nx*ny row-major (2D)
    double time = 0;

    double dx() const { return 2.0 * spec.L / spec.nx; }
    double dy() const { return 2.0 * spec.L / spec.ny; }
    double cell_volume() const { return spec.dim == 1 ? dx() : dx() * dy(); }
    double xc(int i) const { return -spec.L + (i + 0.5) * dx(); }
    double yc(int j) const { return -spec.L + (j + 0.5) * dy(); }
    std::size_t index(int i, int j = 0) const {
        return spec.dim == 1 ? static_cast<std::size_t>(i)
                             : static_cast<std::size_t>(i) * spec.ny + j;
    }

    double mass() const {
        double s = 0;
        for (double v : values) s += v;
        return s * cell_volume();
    }

    double min_value() const {
        double s = values.empty() ? 0.0 : values.front();
        for (double v : values) s = std::min(s, v);
        return s;
    }

    /// Clip the tiny negatives allowed by the centered stencils; reporting
    /// and histogramming see nonnegative densities.
    DensityGrid clipped() const {
        DensityGrid g = *this;
        for (double& v : g.values) v = std::max(v, 0.0);
        return g;
    }
};

inline DensityGrid make_grid(const GridSpec& spec) {
    DensityGrid g;
    g.spec = spec;
    g.values.assign(spec.dim == 1 ? spec.nx : static_cast<std::size_t>(spec.nx) * spec.ny, 0.0);
    return g;
}

/// Cell-averaged isotropic Gaussian initial density (exact cell masses via
/// erf differences, so discrete mass matches the continuum to rounding).
inline DensityGrid gaussian_density(const GridSpec& spec, const Vec& mean, double s) {
    DensityGrid g = make_grid(spec);
    auto cell_mass_1d = [s](double lo, double hi, double mu) {
        const double r = 1.0 / (s * std::sqrt(2.0));
        return 0.5 * (std::erf((hi - mu) * r) - std::erf((lo - mu) * r));
    };
    if (spec.dim == 1) {
        for (int i = 0; i < spec.nx; ++i) {
            const double lo = -spec.L + i * g.dx();
            g.values[i] = cell_mass_1d(lo, lo + g.dx(), mean[0]) / g.dx();
        }
    } else {
        for (int i = 0; i < spec.nx; ++i) {
            const double lox = -spec.L + i * g.dx();
            const double mx = cell_mass_1d(lox, lox + g.dx(), mean[0]);
            for (int j = 0; j < spec.ny; ++j) {
                const double loy = -spec.L + j * g.dy();
                g.values[g.index(i, j)] =
                    mx * cell_mass_1d(loy, loy + g.dy(), mean[1]) / (g.dx() * g.dy());
            }
        }
    }
    return g;
}

inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    if (!(a.spec == b.spec)) throw GridMismatch("density grids differ");
    double s = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return s * a.cell_volume();
}

/// Conservative 2:1 coarsening (children averaged), for refinement gaps.
inline DensityGrid restrict_half(const DensityGrid& fine) {
    GridSpec cs = fine.spec;
    if (cs.nx % 2 || (cs.dim == 2 && cs.ny % 2)) throw GridMismatch("odd grid cannot restrict");
    cs.nx /= 2;
    if (cs.dim == 2) cs.ny /= 2;
    DensityGrid c = make_grid(cs);
    c.time = fine.time;
    if (cs.dim == 1) {
        for (int i = 0; i < cs.nx; ++i)
            c.values[i] = 0.5 * (fine.values[2 * i] + fine.values[2 * i + 1]);
    } else {
        for (int i = 0; i < cs.nx; ++i)
            for (int j = 0; j < cs.ny; ++j)
                c.values[c.index(i, j)] =
                    0.25 * (fine.values[fine.index(2 * i, 2 * j)] +
                            fine.values[fine.index(2 * i + 1, 2 * j)] +
                            fine.values[fine.index(2 * i, 2 * j + 1)] +
                            fine.values[fine.index(2 * i + 1, 2 * j + 1)]);
    }
    return c;
}

struct HistogramResult {
    DensityGrid grid;
    long leaked = 0;
    long total = 0;
};

/// Cell counts normalized to a density: count / (N * cell volume).
/// Out-of-grid samples are excluded from the counts but kept in N, so the
/// mass deficit equals the leak fraction.
inline HistogramResult histogram_density(const std::vector<double>& samples, int dim,
                                         const GridSpec& spec) {
    HistogramResult r;
    r.grid = make_grid(spec);
    const long n = static_cast<long>(samples.size()) / dim;
    r.total = n;
    const double dx = r.grid.dx();
    const double dy = spec.dim == 2 ? r.grid.dy() : 1.0;
    for (long p = 0; p < n; ++p) {
        const double x = samples[static_cast<std::size_t>(p) * dim];
        const int i = static_cast<int>(std::floor((x + spec.L) / dx));
        if (i < 0 || i >= spec.nx) {
            ++r.leaked;
            continue;
        }
        if (spec.dim == 1) {
            r.grid.values[i] += 1.0;
        } else {
            const double y = samples[static_cast<std::size_t>(p) * dim + 1];
            const int j = static_cast<int>(std::floor((y + spec.L) / dy));
            if (j < 0 || j >= spec.ny) {
                ++r.leaked;
                continue;
            }
            r.grid.values[r.grid.index(i, j)] += 1.0;
        }
    }
    const double norm = 1.0 / (static_cast<double>(n) * r.grid.cell_volume());
    for (double& v : r.grid.values) v *= norm;
    return r;
}

enum class PdeVariant { fick, ito_standard };

struct PdeForm {
    PdeVariant variant = PdeVariant::fick;
    std::function<Vec(const Vec&)> drift;             // b for fick, b~ for ito_standard
    std::function<SymMatrix(const Vec&)> tensor;      // D(x)
    int dim = 1;
};

/// b~ = b + (1/2) div D, the drift of the standard Fokker-Planck writing.
inline std::function<Vec(const Vec&)> drift_for_ito_form(const TensorFieldModel& m) {
    auto model = m;
    return [model](const Vec& x) {
        const Vec b = model.drift(x);
        const Vec dd = divergence_D(model, x);
        Vec r(model.dim);
        for (int i = 0; i < model.dim; ++i) r[i] = b[i] + 0.5 * dd[i];
        return r;
    };
}

inline PdeForm fick_form(const TensorFieldModel& m) {
    PdeForm f;
    f.variant = PdeVariant::fick;
    f.drift = m.drift;
    f.tensor = m.diff_tensor;
    f.dim = m.dim;
    return f;
}

/// The standard form equivalent to fick_form(m) on classical solutions.
inline PdeForm ito_form(const TensorFieldModel& m) {
    PdeForm f;
    f.variant = PdeVariant::ito_standard;
    f.drift = drift_for_ito_form(m);
    f.tensor = m.diff_tensor;
    f.dim = m.dim;
    return f;
}

/// The standard form with a caller-chosen drift (e.g. b + h for the
/// right-endpoint SDE's density equation).
inline PdeForm ito_form_with_drift(const TensorFieldModel& m,
                                   std::function<Vec(const Vec&)> drift) {
    PdeForm f;
    f.variant = PdeVariant::ito_standard;
    f.drift = std::move(drift);
    f.tensor = m.diff_tensor;
    f.dim = m.dim;
    return f;
}

struct PdeOptions {
    double dt = 0;          // 0 = derive from the stability bound
    double safety = 0.9;
    double mass_tol = 1e-6; // MassLoss beyond this drift
};

namespace pde_detail {

inline double spectral_norm_2x2(double a, double b, double c) {
    // symmetric [[a, b], [b, c]]
    const double half = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return std::max(std::abs(half + disc), std::abs(half - disc));
}

} // namespace pde_detail

/// March the density to time T. Throws StabilityViolation when a straight
/// user dt violates the explicit step bound, MassLoss when conservation
/// drifts beyond tolerance (boundary leakage: enlarge L).
inline DensityGrid solve_pde(const PdeForm& form, const DensityGrid& u0, double t_end,
                             const PdeOptions& opt = {}) {
    DensityGrid u = u0;
    const GridSpec& gs = u.spec;
    const double mass0 = u.mass();
    if (t_end <= 0) return u;

    if (gs.dim == 1) {
        const int n = gs.nx;
        const double dx = u.dx();
        std::vector<double> bf(n + 1, 0.0), df_face(n + 1, 0.0), dc(n, 0.0);
        double max_s = 0, max_b = 0;
        for (int f = 0; f <= n; ++f) {
            const double xf = -gs.L + f * dx;
            bf[f] = form.drift(Vec{xf})[0];
            df_face[f] = form.tensor(Vec{xf})(0, 0);
            max_b = std::max(max_b, std::abs(bf[f]));
        }
        for (int i = 0; i < n; ++i) {
            dc[i] = form.tensor(Vec{u.xc(i)})(0, 0);
            max_s = std::max(max_s, std::abs(dc[i]));
        }
        for (int f = 0; f <= n; ++f) max_s = std::max(max_s, std::abs(df_face[f]));
        double bound = opt.safety * dx * dx / (2.0 * 1.0 * max_s);
        if (max_b > 0) bound = std::min(bound, opt.safety * dx / max_b);
        double dt = opt.dt;
        if (dt <= 0) dt = bound;
        else if (dt > bound)
            throw StabilityViolation("pde dt exceeds the explicit step bound");
        const long steps = std::max<long>(1, static_cast<long>(std::ceil(t_end / dt)));
        dt = t_end / static_cast<double>(steps);

        std::vector<double> flux(n + 1, 0.0), un(n, 0.0);
        const bool fick = form.variant == PdeVariant::fick;
        for (long s = 0; s < steps; ++s) {
            for (int f = 1; f < n; ++f) {
                const double ul = u.values[f - 1], ur = u.values[f];
                double conv;
                if (fick)
                    conv = -bf[f] * (bf[f] >= 0 ? ul : ur);
                else
                    conv = -bf[f] * 0.5 * (ul + ur);
                const double diffu = fick
                                         ? 0.5 * df_face[f] * (ur - ul) / dx
                                         : 0.5 * (dc[f] * ur - dc[f - 1] * ul) / dx;
                flux[f] = conv + diffu;
            }
            flux[0] = flux[n] = 0.0;
            for (int i = 0; i < n; ++i)
                un[i] = u.values[i] + dt * (flux[i + 1] - flux[i]) / dx;
            u.values.swap(un);
        }
        u.time = u0.time + t_end;
        if (std::abs(u.mass() - mass0) > opt.mass_tol * std::max(1.0, std::abs(mass0)))
            throw MassLoss("pde mass conservation drifted beyond tolerance");
        return u;
    }

    // ----- 2D -----
    const int nx = gs.nx, ny = gs.ny;
    const double dx = u.dx(), dy = u.dy();
    const bool fick = form.variant == PdeVariant::fick;

    // coefficients cached at cells and faces
    std::vector<double> d11c(static_cast<std::size_t>(nx) * ny), d12c(d11c.size()),
        d22c(d11c.size());
    std::vector<double> b1xf(static_cast<std::size_t>(nx + 1) * ny),
        d11xf(b1xf.size()), d12xf(b1xf.size());
    std::vector<double> b2yf(static_cast<std::size_t>(nx) * (ny + 1)),
        d22yf(b2yf.size()), d12yf(b2yf.size());
    double max_s = 0, max_b = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const SymMatrix dmat = form.tensor(Vec{u.xc(i), u.yc(j)});
            const std::size_t c = u.index(i, j);
            d11c[c] = dmat(0, 0);
            d12c[c] = dmat(0, 1);
            d22c[c] = dmat(1, 1);
            max_s = std::max(max_s, pde_detail::spectral_norm_2x2(dmat(0, 0), dmat(0, 1), dmat(1, 1)));
        }
    for (int f = 0; f <= nx; ++f)
        for (int j = 0; j < ny; ++j) {
            const Vec xf{-gs.L + f * dx, u.yc(j)};
            const SymMatrix dmat = form.tensor(xf);
            const Vec b = form.drift(xf);
            const std::size_t c = static_cast<std::size_t>(f) * ny + j;
            b1xf[c] = b[0];
            d11xf[c] = dmat(0, 0);
            d12xf[c] = dmat(0, 1);
            max_b = std::max(max_b, norm2(b));
        }
    for (int i = 0; i < nx; ++i)
        for (int g = 0; g <= ny; ++g) {
            const Vec yf{u.xc(i), -gs.L + g * dy};
            const SymMatrix dmat = form.tensor(yf);
            const Vec b = form.drift(yf);
            const std::size_t c = static_cast<std::size_t>(i) * (ny + 1) + g;
            b2yf[c] = b[1];
            d22yf[c] = dmat(1, 1);
            d12yf[c] = dmat(0, 1);
            max_b = std::max(max_b, norm2(b));
        }
    const double dmin = std::min(dx, dy);
    double bound = opt.safety * dmin * dmin / (2.0 * 2.0 * max_s);
    if (max_b > 0) bound = std::min(bound, opt.safety * dmin / max_b);
    double dt = opt.dt;
    if (dt <= 0) dt = bound;
    else if (dt > bound)
        throw StabilityViolation("pde dt exceeds the explicit step bound");
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(t_end / dt)));
    dt = t_end / static_cast<double>(steps);

    auto uval = [&](const std::vector<double>& v, int i, int j) {
        // reflected ghosts for the transverse derivative in the mixed term
        i = std::max(0, std::min(nx - 1, i));
        j = std::max(0, std::min(ny - 1, j));
        return v[static_cast<std::size_t>(i) * ny + j];
    };

    std::vector<double> fx(static_cast<std::size_t>(nx + 1) * ny, 0.0);
    std::vector<double> fy(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
    std::vector<double> un(u.values.size(), 0.0);
    for (long s = 0; s < steps; ++s) {
        const std::vector<double>& v = u.values;
        for (int f = 1; f < nx; ++f)
            for (int j = 0; j < ny; ++j) {
                const std::size_t c = static_cast<std::size_t>(f) * ny + j;
                const double ul = uval(v, f - 1, j), ur = uval(v, f, j);
                double conv = fick ? -b1xf[c] * (b1xf[c] >= 0 ? ul : ur)
                                   : -b1xf[c] * 0.5 * (ul + ur);
                double diffu;
                if (fick) {
                    const double dudx = (ur - ul) / dx;
                    const double dudy = 0.25 / dy *
                        (uval(v, f - 1, j + 1) - uval(v, f - 1, j - 1) +
                         uval(v, f, j + 1) - uval(v, f, j - 1));
                    diffu = 0.5 * (d11xf[c] * dudx + d12xf[c] * dudy);
                } else {
                    const double ddx = (d11c[u.index(f, j)] * ur - d11c[u.index(f - 1, j)] * ul) / dx;
                    auto d12u = [&](int i2, int j2) {
                        const int ic = std::max(0, std::min(nx - 1, i2));
                        const int jc = std::max(0, std::min(ny - 1, j2));
                        return d12c[u.index(ic, jc)] * v[u.index(ic, jc)];
                    };
                    const double ddy = 0.25 / dy *
                        (d12u(f - 1, j + 1) - d12u(f - 1, j - 1) +
                         d12u(f, j + 1) - d12u(f, j - 1));
                    diffu = 0.5 * (ddx + ddy);
                }
                fx[c] = conv + diffu;
            }
        for (int j = 0; j < ny; ++j) {
            fx[static_cast<std::size_t>(0) * ny + j] = 0.0;
            fx[static_cast<std::size_t>(nx) * ny + j] = 0.0;
        }
        for (int i = 0; i < nx; ++i)
            for (int g = 1; g < ny; ++g) {
                const std::size_t c = static_cast<std::size_t>(i) * (ny + 1) + g;
                const double ul = uval(v, i, g - 1), ur = uval(v, i, g);
                double conv = fick ? -b2yf[c] * (b2yf[c] >= 0 ? ul : ur)
                                   : -b2yf[c] * 0.5 * (ul + ur);
                double diffu;
                if (fick) {
                    const double dudy = (ur - ul) / dy;
                    const double dudx = 0.25 / dx *
                        (uval(v, i + 1, g - 1) - uval(v, i - 1, g - 1) +
                         uval(v, i + 1, g) - uval(v, i - 1, g));
                    diffu = 0.5 * (d22yf[c] * dudy + d12yf[c] * dudx);
                } else {
                    const double ddy = (d22c[u.index(i, g)] * ur - d22c[u.index(i, g - 1)] * ul) / dy;
                    auto d12u = [&](int i2, int j2) {
                        const int ic = std::max(0, std::min(nx - 1, i2));
                        const int jc = std::max(0, std::min(ny - 1, j2));
                        return d12c[u.index(ic, jc)] * v[u.index(ic, jc)];
                    };
                    const double ddx = 0.25 / dx *
                        (d12u(i + 1, g - 1) - d12u(i - 1, g - 1) +
                         d12u(i + 1, g) - d12u(i - 1, g));
                    diffu = 0.5 * (ddy + ddx);
                }
                fy[c] = conv + diffu;
            }
        for (int i = 0; i < nx; ++i) {
            fy[static_cast<std::size_t>(i) * (ny + 1) + 0] = 0.0;
            fy[static_cast<std::size_t>(i) * (ny + 1) + ny] = 0.0;
        }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const std::size_t c = u.index(i, j);
                un[c] = v[c] +
                        dt * ((fx[static_cast<std::size_t>(i + 1) * ny + j] -
                               fx[static_cast<std::size_t>(i) * ny + j]) / dx +
                              (fy[static_cast<std::size_t>(i) * (ny + 1) + j + 1] -
                               fy[static_cast<std::size_t>(i) * (ny + 1) + j]) / dy);
            }
        u.values.swap(un);
    }
    u.time = u0.time + t_end;
    if (std::abs(u.mass() - mass0) > opt.mass_tol * std::max(1.0, std::abs(mass0)))
        throw MassLoss("pde mass conservation drifted beyond tolerance");
    return u;
}

} // namespace kinetic
