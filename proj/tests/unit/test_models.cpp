#include <doctest.h>

#include <cmath>

#include "kinetic/model_zoo.hpp"
#include "kinetic/registry.hpp"

using namespace kinetic;

TEST_CASE("constructor hypotheses are enforced") {
    // case 2: inf g must stay positive
    CHECK_THROWS_AS(make_positive_case2(2, profile_offset_sin(2, 1.0, 1.5, {1.0, 0.0})),
                    ParamViolation);
    // case 4: R must be orthogonal
    CHECK_THROWS_AS(
        make_positive_case4(Mat(2, {1, 0.1, 0, 1}),
                            {profile_constant(2, 1.0), profile_constant(2, 2.0)}),
        ParamViolation);
    // case 5: |v| = 1
    CHECK_THROWS_AS(make_positive_case5({0.5, 0.2}, profile_constant(2, 2.0),
                                        profile_constant(2, 1.0)),
                    ParamViolation);
    // case 6: B positive definite
    CHECK_THROWS_AS(make_positive_case6(SymMatrix(2, {1, 2, 2, 1}), profile_constant(2, 1.0)),
                    ParamViolation);
    // negative case 1: sup|tau| < sqrt(alpha beta)
    CHECK_THROWS_AS(make_negative_case1(1.0, 2.0, profile_offset_sin(2, 0.0, 1.5, {1.0, 1.0})),
                    ParamViolation);
    // negative case 2: amplitude inequality
    CHECK_THROWS_AS(make_negative_case2(0.8, profile1d_gaussian(1.0, -0.8, 0.0, 1.0),
                                        profile1d_gaussian(1.0, -0.8, 0.0, 1.0), 0.25),
                    ParamViolation);
    // radial: h'(0) must vanish
    CHECK_THROWS_AS(make_radial_case(SymMatrix::identity(2),
                                     profile1d_gaussian(2.0, 1.0, 0.5, 1.0), 2),
                    ParamViolation);
    // het diffusion needs positive k
    CHECK_THROWS_AS(make_het_diffusion(1.0, 0.0), ParamViolation);
}

TEST_CASE("case 4 with R = I reduces to case 3") {
    std::vector<ScalarProfile> gs{profile_offset_sin(2, 1.0, 0.4, {1.0, 0.0}),
                                  profile_offset_sin(2, 1.5, 0.3, {0.0, 1.0})};
    const auto c3 = make_positive_case3(gs);
    const auto c4 = make_positive_case4(Mat::identity(2), gs);
    for (const Vec& x : {Vec{0.2, -0.9}, Vec{1.1, 0.7}}) {
        CHECK((c3.diff_tensor(x).mat() - c4.diff_tensor(x).mat()).frobenius() < 1e-14);
        CHECK((c3.sigma(x) - c4.sigma(x)).frobenius() < 1e-14);
        CHECK(norm2(c3.correction_h(x) - c4.correction_h(x)) < 1e-14);
    }
}

TEST_CASE("case 5 in three dimensions carries spectrum {f, g, g}") {
    // v = e1, f = 2 + cos(x2), g = 1
    const auto f = profile_offset_sin(3, 2.0, 1.0, {0.0, 1.0, 0.0}, 1.5707963267948966);
    const auto g = profile_constant(3, 1.0);
    const auto m = make_positive_case5({1.0, 0.0, 0.0}, f, g);
    const Vec x{0.4, 1.2, -0.3};
    Vec ev;
    Mat p;
    jacobi_eigensym(m.diff_tensor(x), ev, p);
    const double fx = 2.0 + std::cos(1.2);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[2] == doctest::Approx(fx).epsilon(1e-12));
    CHECK(norm2(structural_residual(m, x)) < 1e-10);
    CHECK(m.ellipticity_alpha == doctest::Approx(1.0));
}

TEST_CASE("radial modulation: constant profile reduces to case 6; gradient formula") {
    const SymMatrix b = SymMatrix::identity(2);
    const auto mc = make_radial_case(b, profile1d_constant(3.0), 2);
    const auto c6 = make_positive_case6(b, profile_constant(2, 3.0));
    const Vec x{0.7, -0.4};
    CHECK((mc.diff_tensor(x).mat() - c6.diff_tensor(x).mat()).frobenius() < 1e-14);

    // h(r) = 2 + exp(-r^2), B = I: div D at (1, 0) is h'(1) (1, 0)
    const auto mr = make_radial_case(b, profile1d_gaussian(2.0, 1.0, 0.0, 1.0), 2);
    const Vec dd = divergence_D(mr, {1.0, 0.0});
    CHECK(dd[0] == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(dd[1] == doctest::Approx(0.0).epsilon(1e-12));

    // identity holds on a grid including the origin
    for (const Vec& p : {Vec{0.0, 0.0}, Vec{0.3, 0.0}, Vec{-1.0, 2.0}})
        CHECK(norm2(structural_residual(mr, p)) < 1e-10);
}

TEST_CASE("negative families turn structural when degenerate") {
    // alpha = beta: residual vanishes although tau varies
    const auto m_eq = make_negative_case1(1.5, 1.5, profile_offset_sin(2, 0.0, 0.5, {1.0, 1.0}));
    for (const Vec& x : {Vec{0.2, 0.2}, Vec{-1.0, 0.5}}) {
        CHECK(norm2(structural_residual(m_eq, x)) < 1e-10);
        CHECK(norm2(m_eq.lambda_closed(x)) < 1e-15);
    }
    // eps = 0: residual vanishes although a, b vary
    const auto m_0 = make_negative_case2(0.0, profile1d_gaussian(1.0, 0.4, 0.0, 1.0),
                                         profile1d_gaussian(1.0, 0.4, 0.0, 1.0), 0.5);
    for (const Vec& x : {Vec{0.4, -0.2}, Vec{1.0, 1.0}})
        CHECK(norm2(structural_residual(m_0, x)) < 1e-10);
}

TEST_CASE("heterogeneous diffusion closed forms") {
    const auto a1 = make_het_diffusion(1.0, 1.0);
    CHECK(a1.analytic(1.0, 0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-15));
    CHECK(a1.analytic(1.0, 0.3) == doctest::Approx(1.3498588075760032).epsilon(1e-15));

    const auto a2 = make_het_diffusion(2.0, 1.0);
    CHECK(a2.analytic(0.0, 5.0) == 0.0);
    CHECK(a2.analytic(1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(a2.stop_level(1.0) == doctest::Approx(1.0));
    CHECK(a2.stop_outcome == PathStatus::blown_up);

    const auto ah = make_het_diffusion(0.5, 2.0);
    CHECK(ah.analytic(1.0, -1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ah.stop_level(1.0) == doctest::Approx(-1.0)); // -2 sqrt(x0)/k
    CHECK(ah.stop_outcome == PathStatus::absorbed);

    const auto a34 = make_het_diffusion(0.75, 1.0);
    const double w = 0.4;
    const double r = 0.25 * w + 1.0;
    CHECK(a34.analytic(1.0, w) == doctest::Approx(r * r * r * r).epsilon(1e-14));

    const auto a14 = make_het_diffusion(0.25, 1.0);
    CHECK(a14.requires_positive_x0);
    const double q = 0.75 * w + 1.0;
    CHECK(a14.analytic(1.0, w) == doctest::Approx(std::cbrt(q * q * q * q)).epsilon(1e-14));

    // exponents outside the studied set build a spec without an oracle
    const auto ax = make_het_diffusion(0.6, 1.0);
    CHECK(!ax.has_analytic);
    CHECK(ax.drift(1.3) == doctest::Approx(0.5 * 0.6 * std::pow(1.3, 0.2)).epsilon(1e-14));
}

TEST_CASE("kinetic energy model and its two drift writings") {
    // k = 1, W = 2 gives Q = k^2 W^2 / 2 = 2
    CHECK(make_kinetic_energy(1.0).analytic(0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    const double k = 2.0;
    const auto ke = make_kinetic_energy(k);
    CHECK(ke.analytic(0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15)); // k^2 W^2 / 2
    CHECK(ke.analytic(0.0, 0.0) == 0.0);
    CHECK(ke.ito_drift_const == doctest::Approx(0.5 * k * k));
    CHECK(ke.fehlberg_drift_const == doctest::Approx(k * k / 1024.0));
    // sigma'(q) sigma(q) = k^2 for every q > 0
    for (double q : {0.1, 0.7, 3.0})
        CHECK(ke.noise_amp_deriv(q) * ke.noise_amp(q) == doctest::Approx(k * k).epsilon(1e-12));
    CHECK_THROWS_AS(ke.analytic(0.5, 1.0), DomainViolation);
}

TEST_CASE("scaled Brownian motion: bounded variation guard") {
    CHECK_NOTHROW(make_scaled_bm(profile1d_power(0.5), 0.0, 1.0));
    CHECK_NOTHROW(make_scaled_bm(profile1d_sin(0.0, 1.0, 3.0), 0.0, 1.0));
    Profile1D wild;
    wild.value = [](double t) { return std::sin(5.0e4 * 3.141592653589793 * t * t); };
    wild.deriv = [](double) { return 0.0; };
    wild.inf_value = -1;
    wild.sup_value = 1;
    wild.sup_abs_deriv = 1e9;
    wild.desc = "underresolved oscillation";
    CHECK_THROWS_AS(make_scaled_bm(wild, 0.0, 1.0), ParamViolation);
}

TEST_CASE("registry builds every catalogued model") {
    Config empty = Config::parse_text("");
    for (const auto& e : model_registry()) {
        if (e.kind == "tensor") {
            const auto m = build_tensor_model(e.name, empty);
            CHECK(m.dim >= 1);
            CHECK(m.ellipticity_alpha > 0);
        } else {
            CHECK_NOTHROW(build_scalar_model(e.name, empty));
        }
    }
    CHECK_THROWS_AS(build_tensor_model("no_such_model", empty), ParamViolation);
    CHECK_THROWS_AS(build_tensor_model("kinetic_energy", empty), ParamViolation);
}
