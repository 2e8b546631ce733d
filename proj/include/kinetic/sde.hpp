#pragma once

// Euler-Maruyama simulation of SDEs under any interpretation through the
// drift-corrected Ito form: one stepper, many interpretations. Analytic
// solution oracles and stopping-time detection live alongside.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "kinetic/brownian.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/model_zoo.hpp"
#include "kinetic/rng.hpp"
#include "kinetic/tensor_field.hpp"

namespace kinetic {

/// An SDE reduced to Ito form: dX = drift_eff dt + sigma dW. The callables
/// write into caller-provided buffers so the stepping loop never allocates.
struct EffectiveItoSde {
    int dim = 0;
    std::function<void(const double*, double*)> drift;  // writes dim values
    std::function<void(const double*, double*)> sigma;  // writes dim*dim, row-major
    std::string provenance_model;
    double provenance_lambda = 0.0;
};

/// Convert a model under the lambda-interpretation to Ito form:
/// drift_eff = b + lambda * grad(sigma):sigma^T. Exact at lambda in {0, 1};
/// intermediate lambda in d > 1 is the natural interpolation and is kept out
/// of the acceptance surface.
inline EffectiveItoSde interpretation_to_ito(const TensorFieldModel& m, InterpretationTag tag,
                                             DerivMode mode = DerivMode::analytic_preferred) {
    EffectiveItoSde s;
    s.dim = m.dim;
    s.provenance_model = m.name;
    s.provenance_lambda = tag.lambda;
    const int d = m.dim;
    const double lam = tag.lambda;
    auto model = m; // value copy shared by the closures
    if (lam == 0.0) {
        s.drift = [model, d](const double* x, double* out) {
            Vec xv(x, x + d);
            const Vec b = model.drift(xv);
            for (int i = 0; i < d; ++i) out[i] = b[i];
        };
    } else if (model.correction_h && mode == DerivMode::analytic_preferred) {
        s.drift = [model, d, lam](const double* x, double* out) {
            Vec xv(x, x + d);
            const Vec b = model.drift(xv);
            const Vec h = model.correction_h(xv);
            for (int i = 0; i < d; ++i) out[i] = b[i] + lam * h[i];
        };
    } else {
        s.drift = [model, d, lam, mode](const double* x, double* out) {
            Vec xv(x, x + d);
            const Vec b = model.drift(xv);
            const Vec h = ito_correction_h(model, xv, mode);
            for (int i = 0; i < d; ++i) out[i] = b[i] + lam * h[i];
        };
    }
    s.sigma = [model, d](const double* x, double* out) {
        Vec xv(x, x + d);
        const Mat sg = sigma_at(model, xv);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i * d + j] = sg(i, j);
    };
    return s;
}

/// Drift-corrected Ito form of a scalar spec under the lambda-interpretation
/// of its noise term: drift_eff = base_drift + lambda * sigma'(x) sigma(x).
inline EffectiveItoSde scalar_to_ito(const ScalarSdeSpec& spec, double base_drift_const,
                                     InterpretationTag tag) {
    EffectiveItoSde s;
    s.dim = 1;
    s.provenance_model = spec.name;
    s.provenance_lambda = tag.lambda;
    const double lam = tag.lambda;
    auto amp = spec.noise_amp;
    auto damp = spec.noise_amp_deriv;
    s.drift = [base_drift_const, lam, amp, damp](const double* x, double* out) {
        out[0] = base_drift_const + lam * damp(x[0]) * amp(x[0]);
    };
    s.sigma = [amp](const double* x, double* out) { out[0] = amp(x[0]); };
    return s;
}

/// The spec's own Ito form, ready for the stepper.
inline EffectiveItoSde from_scalar_spec(const ScalarSdeSpec& spec) {
    EffectiveItoSde s;
    s.dim = 1;
    s.provenance_model = spec.name;
    s.provenance_lambda = 0.0;
    auto drift = spec.drift;
    auto amp = spec.noise_amp;
    s.drift = [drift](const double* x, double* out) { out[0] = drift(x[0]); };
    s.sigma = [amp](const double* x, double* out) { out[0] = amp(x[0]); };
    return s;
}

/// Guard rails for the stepper. Trips are recorded outcomes, not errors;
/// states after a trip are not produced.
struct SimGuards {
    double x_max = 1e9;               // blow-up threshold on |X_i|
    bool detect_absorption = false;   // scalar floor-hit detection
    double absorb_floor = 0.0;
    bool clamp_eval = false;          // evaluate coefficients at max(x, eval_floor)
    double eval_floor = 0.0;
};

namespace detail {
constexpr int max_sim_dim = 8;
}

/// Forward Euler on the corrected Ito form along a given driver path.
inline SamplePath euler_maruyama(const EffectiveItoSde& sde, const Vec& x0,
                                 const BrownianPath& w, const SimGuards& guards = {}) {
    const int d = sde.dim;
    if (static_cast<int>(x0.size()) != d || w.dim() != d)
        throw DimensionMismatch("euler_maruyama dimensions");
    if (d > detail::max_sim_dim) throw DimensionMismatch("simulation dimension too large");
    const int n = w.partition().intervals();
    SamplePath path;
    path.part = w.partition();
    path.dim = d;
    path.states.reserve(static_cast<std::size_t>(n + 1) * d);
    double x[detail::max_sim_dim], xc[detail::max_sim_dim];
    double b[detail::max_sim_dim], sg[detail::max_sim_dim * detail::max_sim_dim];
    for (int i = 0; i < d; ++i) {
        x[i] = x0[i];
        path.states.push_back(x[i]);
    }
    path.stop_index = 0;
    path.stop_time = w.partition().a();
    for (int j = 1; j <= n; ++j) {
        const double dt = w.partition().dt(j);
        for (int i = 0; i < d; ++i)
            xc[i] = guards.clamp_eval ? std::max(x[i], guards.eval_floor) : x[i];
        sde.drift(xc, b);
        sde.sigma(xc, sg);
        for (int i = 0; i < d; ++i) {
            double dx = b[i] * dt;
            for (int k = 0; k < d; ++k) dx += sg[i * d + k] * w.increment(j, k);
            x[i] += dx;
        }
        bool blown = false, absorbed = false;
        for (int i = 0; i < d; ++i)
            if (!std::isfinite(x[i]) || std::abs(x[i]) >= guards.x_max) blown = true;
        if (!blown && guards.detect_absorption && d == 1 && x[0] <= guards.absorb_floor)
            absorbed = true;
        if (blown || absorbed) {
            path.status = blown ? PathStatus::blown_up : PathStatus::absorbed;
            path.stop_index = j;
            path.stop_time = w.partition().t(j);
            for (int i = 0; i < d; ++i)
                path.states.push_back(absorbed ? guards.absorb_floor
                                               : (std::isfinite(x[i]) ? x[i] : guards.x_max));
            return path;
        }
        for (int i = 0; i < d; ++i) path.states.push_back(x[i]);
        path.stop_index = j;
        path.stop_time = w.partition().t(j);
    }
    return path;
}

/// Evaluate a closed-form solution along the driver and stop it at its
/// stopping time, if the spec declares one.
inline SamplePath analytic_path(const ScalarSdeSpec& spec, double x0, const BrownianPath& w) {
    if (!spec.has_analytic) throw DomainViolation("spec has no analytic solution");
    if (spec.requires_positive_x0 && !(x0 > 0))
        throw DomainViolation(spec.name + ": Ito form requires x0 > 0");
    if (x0 < 0) throw DomainViolation(spec.name + ": x0 must be nonnegative");
    const int n = w.partition().intervals();
    SamplePath path;
    path.part = w.partition();
    path.dim = 1;
    path.states.reserve(n + 1);
    const double level = spec.stop_kind == ScalarSdeSpec::StopKind::none
                             ? 0.0
                             : spec.stop_level(x0);
    for (int j = 0; j <= n; ++j) {
        const double wj = w.value(j);
        bool stop = false;
        if (spec.stop_kind == ScalarSdeSpec::StopKind::w_above && wj >= level) stop = true;
        if (spec.stop_kind == ScalarSdeSpec::StopKind::w_below && wj <= level) stop = true;
        if (stop) {
            path.status = spec.stop_outcome;
            path.stop_index = j;
            path.stop_time = w.partition().t(j);
            path.states.push_back(spec.stop_outcome == PathStatus::absorbed
                                      ? 0.0
                                      : spec.analytic(x0, wj));
            return path;
        }
        path.states.push_back(spec.analytic(x0, wj));
        path.stop_index = j;
        path.stop_time = w.partition().t(j);
    }
    return path;
}

/// First grid index at which the spec's stopping rule fires on this driver,
/// or -1 if it never does.
inline int stopping_index(const ScalarSdeSpec& spec, double x0, const BrownianPath& w) {
    if (spec.stop_kind == ScalarSdeSpec::StopKind::none) return -1;
    const double level = spec.stop_level(x0);
    const int n = w.partition().intervals();
    for (int j = 0; j <= n; ++j) {
        const double wj = w.value(j);
        if (spec.stop_kind == ScalarSdeSpec::StopKind::w_above && wj >= level) return j;
        if (spec.stop_kind == ScalarSdeSpec::StopKind::w_below && wj <= level) return j;
    }
    return -1;
}

/// Terminal states and status tally of an ensemble. Each path derives its
/// own stream from (seed, path index), so any thread count yields the same
/// bytes.
struct EnsembleResult {
    int dim = 1;
    std::vector<double> terminal;        // N x dim; stopped paths hold their last state
    std::vector<PathStatus> status;      // per path
    std::vector<double> stop_times;      // time of trip, or T
    long n_alive = 0, n_blown = 0, n_absorbed = 0;
};

inline EnsembleResult simulate_ensemble(
    const EffectiveItoSde& sde, const std::function<Vec(RngStream&)>& x0_sampler, long n_paths,
    std::uint64_t seed, double t_end, double dt, const SimGuards& guards = {}, int threads = 1) {
    const int d = sde.dim;
    if (d > detail::max_sim_dim) throw DimensionMismatch("simulation dimension too large");
    if (n_paths < 1) throw ParamViolation("ensemble needs at least one path");
    const long n_steps = std::lround(t_end / dt);
    if (n_steps < 1 || std::abs(n_steps * dt - t_end) > 1e-9 * t_end)
        throw ParamViolation("t_end must be an integer multiple of dt");
    EnsembleResult res;
    res.dim = d;
    res.terminal.assign(static_cast<std::size_t>(n_paths) * d, 0.0);
    res.status.assign(n_paths, PathStatus::alive);
    res.stop_times.assign(n_paths, t_end);

    auto run_range = [&](long lo, long hi) {
        double x[detail::max_sim_dim], xc[detail::max_sim_dim];
        double b[detail::max_sim_dim], sg[detail::max_sim_dim * detail::max_sim_dim];
        for (long p = lo; p < hi; ++p) {
            RngStream xs(seed, {rng_tag::x0_sample, static_cast<std::uint64_t>(p)});
            const Vec x0 = x0_sampler(xs);
            for (int i = 0; i < d; ++i) x[i] = x0[i];
            RngStream ws(seed, {rng_tag::ensemble_path, static_cast<std::uint64_t>(p)});
            const double sqdt = std::sqrt(dt);
            PathStatus st = PathStatus::alive;
            double stop_t = t_end;
            for (long j = 1; j <= n_steps; ++j) {
                for (int i = 0; i < d; ++i)
                    xc[i] = guards.clamp_eval ? std::max(x[i], guards.eval_floor) : x[i];
                sde.drift(xc, b);
                sde.sigma(xc, sg);
                for (int i = 0; i < d; ++i) x[i] += b[i] * dt;
                for (int k = 0; k < d; ++k) {
                    const double dw = sqdt * ws.next_normal();
                    for (int i = 0; i < d; ++i) x[i] += sg[i * d + k] * dw;
                }
                bool blown = false;
                for (int i = 0; i < d; ++i)
                    if (!std::isfinite(x[i]) || std::abs(x[i]) >= guards.x_max) blown = true;
                bool absorbed = !blown && guards.detect_absorption && d == 1 &&
                                x[0] <= guards.absorb_floor;
                if (blown || absorbed) {
                    st = blown ? PathStatus::blown_up : PathStatus::absorbed;
                    stop_t = j * dt;
                    if (absorbed) x[0] = guards.absorb_floor;
                    if (blown)
                        for (int i = 0; i < d; ++i)
                            if (!std::isfinite(x[i])) x[i] = guards.x_max;
                    break;
                }
            }
            for (int i = 0; i < d; ++i) res.terminal[static_cast<std::size_t>(p) * d + i] = x[i];
            res.status[p] = st;
            res.stop_times[p] = stop_t;
        }
    };

    threads = std::max(1, threads);
    if (threads == 1) {
        run_range(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_paths + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const long lo = t * chunk, hi = std::min<long>(n_paths, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (long p = 0; p < n_paths; ++p) {
        switch (res.status[p]) {
            case PathStatus::alive: ++res.n_alive; break;
            case PathStatus::blown_up: ++res.n_blown; break;
            case PathStatus::absorbed: ++res.n_absorbed; break;
        }
    }
    return res;
}

} // namespace kinetic
