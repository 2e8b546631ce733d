#pragma once

// Named model catalog: every model the CLI and the experiment configs can
// reference, with per-model parameter defaults read from the [model] section.

#include <functional>
#include <string>
#include <vector>

#include "kinetic/config.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/model_zoo.hpp"

namespace kinetic {

struct ModelEntry {
    std::string name;
    std::string kind; // "tensor" | "scalar"
    std::string description;
    std::function<TensorFieldModel(const Config&)> build_tensor;
    std::function<ScalarSdeSpec(const Config&)> build_scalar;
};

namespace registry_detail {

inline ScalarProfile coupling_profile(const Config& c, int d, const std::string& family,
                                      double amp) {
    if (family == "periodic") {
        Vec wave(d, 0.0);
        wave[0] = c.get_double("model", "k1", 1.0);
        if (d > 1) wave[1] = c.get_double("model", "k2", 1.0);
        return profile_offset_sin(d, 0.0, amp, wave, c.get_double("model", "phase", 0.0));
    }
    if (family == "gaussian") {
        Vec center(d, 0.0);
        center[0] = c.get_double("model", "x01", 0.0);
        if (d > 1) center[1] = c.get_double("model", "x02", 0.0);
        return profile_gaussian(d, 0.0, amp, center, c.get_double("model", "ell", 1.0));
    }
    if (family == "front") {
        return profile_tanh_front(d, 0.0, amp, 0, c.get_double("model", "c", 0.0),
                                  c.get_double("model", "ell", 1.0));
    }
    throw ParamViolation("unknown coupling family: " + family);
}

inline Profile1D axis_profile(const Config& c, const std::string& family, double c0, double amp,
                              const std::string& suffix) {
    if (family == "periodic")
        return profile1d_sin(c0, amp, c.get_double("model", "k" + suffix, 1.0),
                             c.get_double("model", "phase" + suffix, 0.0));
    if (family == "gaussian")
        return profile1d_gaussian(c0, amp, c.get_double("model", "center" + suffix, 0.0),
                                  c.get_double("model", "ell" + suffix, 1.0));
    if (family == "front")
        return profile1d_tanh(c0, amp, c.get_double("model", "center" + suffix, 0.0),
                              c.get_double("model", "ell" + suffix, 1.0));
    throw ParamViolation("unknown coupling family: " + family);
}

} // namespace registry_detail

/// Positive case dispatcher (cases 1..6), parameters from [model].
inline TensorFieldModel make_positive_case(int case_id, const Config& c) {
    switch (case_id) {
        case 1: {
            const double d11 = c.get_double("model", "d11", 1.0);
            const double d22 = c.get_double("model", "d22", 2.0);
            const double d12 = c.get_double("model", "d12", 0.0);
            return make_positive_case1(SymMatrix(2, {d11, d12, d12, d22}));
        }
        case 2: {
            const int d = c.get_int("model", "dim", 2);
            const double c0 = c.get_double("model", "c0", 1.0);
            const double amp = c.get_double("model", "amp", 0.5);
            Vec wave(d, 0.0);
            wave[0] = c.get_double("model", "k1", 1.0);
            if (d > 1) wave[1] = c.get_double("model", "k2", 1.0);
            return make_positive_case2(d, profile_offset_sin(d, c0, amp, wave));
        }
        case 3: {
            std::vector<ScalarProfile> gs;
            gs.push_back(profile_offset_sin(2, c.get_double("model", "c01", 1.0),
                                            c.get_double("model", "amp1", 0.4), {1.0, 0.0}));
            gs.push_back(profile_offset_sin(2, c.get_double("model", "c02", 1.5),
                                            c.get_double("model", "amp2", 0.3), {0.0, 1.0},
                                            1.5707963267948966));
            return make_positive_case3(gs);
        }
        case 4: {
            const double th = c.get_double("model", "angle", 0.5235987755982988);
            Mat r(2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
            std::vector<ScalarProfile> gs;
            gs.push_back(profile_offset_sin(2, c.get_double("model", "c01", 1.0),
                                            c.get_double("model", "amp1", 0.4), {1.0, 0.0}));
            gs.push_back(profile_offset_sin(2, c.get_double("model", "c02", 1.5),
                                            c.get_double("model", "amp2", 0.3), {0.0, 1.0},
                                            1.5707963267948966));
            return make_positive_case4(r, gs);
        }
        case 5: {
            const double th = c.get_double("model", "v_angle", 0.9);
            const Vec v{std::cos(th), std::sin(th)};
            const auto f = profile_offset_sin(2, c.get_double("model", "f0", 2.0),
                                              c.get_double("model", "f_amp", 0.5), {1.0, 0.0});
            const auto g = profile_offset_sin(2, c.get_double("model", "g0", 1.0),
                                              c.get_double("model", "g_amp", 0.25), {0.0, 1.0});
            return make_positive_case5(v, f, g);
        }
        case 6: {
            const double b11 = c.get_double("model", "b11", 2.0);
            const double b22 = c.get_double("model", "b22", 1.0);
            const double b12 = c.get_double("model", "b12", 0.5);
            const auto g = profile_gaussian(2, c.get_double("model", "c0", 1.0),
                                            c.get_double("model", "amp", 0.5), {0.0, 0.0},
                                            c.get_double("model", "ell", 2.0));
            return make_positive_case6(SymMatrix(2, {b11, b12, b12, b22}), g);
        }
        default: throw ParamViolation("positive case id must be 1..6");
    }
}

/// Negative case dispatcher (cases 1..2) with a coupling family.
inline TensorFieldModel make_negative_case(int case_id, const Config& c,
                                           const std::string& family) {
    if (case_id == 1) {
        const double alpha = c.get_double("model", "alpha", 1.0);
        const double beta = c.get_double("model", "beta", 2.0);
        const double eps = c.get_double("model", "eps", 0.5);
        return make_negative_case1(alpha, beta, registry_detail::coupling_profile(c, 2, family, eps));
    }
    if (case_id == 2) {
        const double eps = c.get_double("model", "eps", 0.3);
        const double delta2 = c.get_double("model", "delta2", 0.25);
        const auto a = registry_detail::axis_profile(c, family, c.get_double("model", "a0", 1.0),
                                                     c.get_double("model", "eta_a", 0.4), "_a");
        const auto b = registry_detail::axis_profile(c, family, c.get_double("model", "b0", 1.0),
                                                     c.get_double("model", "eta_b", 0.4), "_b");
        return make_negative_case2(eps, a, b, delta2);
    }
    throw ParamViolation("negative case id must be 1..2");
}

inline const std::vector<ModelEntry>& model_registry() {
    static const std::vector<ModelEntry> reg = [] {
        std::vector<ModelEntry> v;
        auto tensor = [&v](const std::string& name, const std::string& desc,
                           std::function<TensorFieldModel(const Config&)> b) {
            v.push_back({name, "tensor", desc, std::move(b), {}});
        };
        auto scalar = [&v](const std::string& name, const std::string& desc,
                           std::function<ScalarSdeSpec(const Config&)> b) {
            v.push_back({name, "scalar", desc, {}, std::move(b)});
        };
        tensor("pos1_const", "constant positive definite tensor",
               [](const Config& c) { return make_positive_case(1, c); });
        tensor("pos2_iso_sin_1d", "isotropic g(x) = c0 + amp sin(k x), d = 1",
               [](const Config& c) {
                   Config cc = c;
                   cc.apply_override("model.dim=1");
                   return make_positive_case(2, cc);
               });
        tensor("pos2_iso_sin", "isotropic g(x) = c0 + amp sin(k1 x1 + k2 x2), d = 2",
               [](const Config& c) { return make_positive_case(2, c); });
        tensor("pos3_diag", "diagonal anisotropic diag(g1(x), g2(x))",
               [](const Config& c) { return make_positive_case(3, c); });
        tensor("pos4_rotated", "constant-rotation diagonalizable R diag(g) R^T",
               [](const Config& c) { return make_positive_case(4, c); });
        tensor("pos5_oriented", "privileged orientation f v v^T + g (I - v v^T)",
               [](const Config& c) { return make_positive_case(5, c); });
        tensor("pos6_modulated", "scalar-modulated anisotropic g(x) B",
               [](const Config& c) { return make_positive_case(6, c); });
        tensor("pos_radial", "radially modulated h(|x|) B with h'(0) = 0",
               [](const Config& c) {
                   const double b11 = c.get_double("model", "b11", 2.0);
                   const double b22 = c.get_double("model", "b22", 1.0);
                   const double b12 = c.get_double("model", "b12", 0.5);
                   const auto h = profile1d_gaussian(c.get_double("model", "c0", 2.0),
                                                     c.get_double("model", "amp", 1.0), 0.0,
                                                     c.get_double("model", "ell", 1.0));
                   return make_radial_case(SymMatrix(2, {b11, b12, b12, b22}), h, 2);
               });
        tensor("neg1_periodic", "cross-coupled sigma with periodic tau",
               [](const Config& c) { return make_negative_case(1, c, "periodic"); });
        tensor("neg1_gaussian", "cross-coupled sigma with gaussian tau",
               [](const Config& c) { return make_negative_case(1, c, "gaussian"); });
        tensor("neg1_front", "cross-coupled sigma with front-like tau",
               [](const Config& c) { return make_negative_case(1, c, "front"); });
        tensor("neg2_periodic", "separable cross-coupled tensor, periodic a and b",
               [](const Config& c) { return make_negative_case(2, c, "periodic"); });
        tensor("neg2_gaussian", "separable cross-coupled tensor, gaussian a and b",
               [](const Config& c) { return make_negative_case(2, c, "gaussian"); });
        tensor("neg2_front", "separable cross-coupled tensor, front-like a and b",
               [](const Config& c) { return make_negative_case(2, c, "front"); });
        auto het = [](double a) {
            return [a](const Config& c) {
                return make_het_diffusion(a, c.get_double("model", "k", 1.0));
            };
        };
        scalar("het_alpha1", "heterogeneous diffusion, exponent 1", het(1.0));
        scalar("het_alpha2", "heterogeneous diffusion, exponent 2 (blow-up)", het(2.0));
        scalar("het_alpha05", "heterogeneous diffusion, exponent 1/2 (zero hit)", het(0.5));
        scalar("het_alpha075", "heterogeneous diffusion, exponent 3/4", het(0.75));
        scalar("het_alpha025", "heterogeneous diffusion, exponent 1/4 (x0 > 0 only)", het(0.25));
        scalar("kinetic_energy", "kinetic energy of a Brownian velocity",
               [](const Config& c) { return make_kinetic_energy(c.get_double("model", "k", 1.0)); });
        scalar("sbm_power", "scaled Brownian motion with F(t) = t^H",
               [](const Config& c) {
                   return make_scaled_bm(profile1d_power(c.get_double("model", "H", 0.5)),
                                         c.get_double("model", "a", 0.0),
                                         c.get_double("model", "b", 1.0));
               });
        return v;
    }();
    return reg;
}

inline const ModelEntry& find_model(const std::string& name) {
    for (const auto& e : model_registry())
        if (e.name == name) return e;
    throw ParamViolation("unknown model: " + name);
}

inline TensorFieldModel build_tensor_model(const std::string& name, const Config& c) {
    const auto& e = find_model(name);
    if (!e.build_tensor) throw ParamViolation(name + " is not a tensor-field model");
    TensorFieldModel m = e.build_tensor(c);
    m.name = name;
    return m;
}

inline ScalarSdeSpec build_scalar_model(const std::string& name, const Config& c) {
    const auto& e = find_model(name);
    if (!e.build_scalar) throw ParamViolation(name + " is not a scalar SDE model");
    ScalarSdeSpec s = e.build_scalar(c);
    s.name = name;
    return s;
}

} // namespace kinetic
