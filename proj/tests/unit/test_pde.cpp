#include <doctest.h>

#include <cmath>

#include "kinetic/model_zoo.hpp"
#include "kinetic/pde.hpp"
#include "kinetic/rng.hpp"

using namespace kinetic;

namespace {

DensityGrid analytic_gaussian(const GridSpec& gs, double s) {
    return gaussian_density(gs, Vec(gs.dim, 0.0), s);
}

} // namespace

TEST_CASE("pure diffusion with D = 2I spreads like the heat kernel") {
    const auto m = make_positive_case1(SymMatrix::diag({2.0}));
    const GridSpec gs{1, 512, 0, 5.0};
    const double s0 = 0.3, T = 0.25;
    const auto u0 = analytic_gaussian(gs, s0);
    const auto u = solve_pde(fick_form(m), u0, T);
    // du/dt = (1/2) d/dx (2 du/dx): variance grows by 2 t per axis
    const auto expect = analytic_gaussian(gs, std::sqrt(s0 * s0 + 2.0 * T));
    CHECK(l1_distance(u, expect) < 1e-3);
    CHECK(std::abs(u.mass() - u0.mass()) < 1e-8);
    CHECK(u.min_value() >= -1e-12);

    const auto m2 = make_positive_case1(SymMatrix::diag({2.0, 2.0}));
    const GridSpec gs2{2, 96, 96, 5.0};
    const auto v0 = analytic_gaussian(gs2, s0);
    const auto v = solve_pde(fick_form(m2), v0, T);
    const auto expect2 = analytic_gaussian(gs2, std::sqrt(s0 * s0 + 2.0 * T));
    CHECK(l1_distance(v, expect2) < 5e-3);
    CHECK(std::abs(v.mass() - v0.mass()) < 1e-8);
}

TEST_CASE("constant tensors make the two forms coincide") {
    const auto m = make_positive_case1(SymMatrix::diag({1.0, 2.0}));
    const GridSpec gs{2, 48, 48, 5.0};
    const auto u0 = analytic_gaussian(gs, 0.3);
    const auto a = solve_pde(fick_form(m), u0, 0.1);
    const auto b = solve_pde(ito_form(m), u0, 0.1);
    CHECK(l1_distance(a, b) < 1e-12);
}

TEST_CASE("isotropic model: fick and standard forms agree to second order") {
    const auto m = make_positive_case2(1, profile_offset_sin(1, 1.0, 0.5, {1.0}));
    const GridSpec gs{1, 256, 0, 5.0};
    const auto u0 = analytic_gaussian(gs, 0.3);
    const auto a = solve_pde(fick_form(m), u0, 0.25);
    const auto b = solve_pde(ito_form(m), u0, 0.25);
    CHECK(l1_distance(a, b) < 2e-3);
    CHECK(std::abs(a.mass() - u0.mass()) < 1e-8);
    CHECK(a.min_value() >= -1e-12);
}

TEST_CASE("user time steps beyond the stability bound are rejected") {
    const auto m = make_positive_case1(SymMatrix::diag({2.0}));
    const GridSpec gs{1, 128, 0, 5.0};
    const auto u0 = analytic_gaussian(gs, 0.3);
    PdeOptions opt;
    opt.dt = 1.0; // far beyond dx^2 / (2 max D)
    CHECK_THROWS_AS(solve_pde(fick_form(m), u0, 0.25, opt), StabilityViolation);
}

TEST_CASE("l1 distance: coincidence, disjoint masses, shifted gaussian") {
    const GridSpec gs{1, 256, 0, 5.0};
    const auto a = analytic_gaussian(gs, 0.3);
    CHECK(l1_distance(a, a) == 0.0);

    auto d1 = make_grid(gs), d2 = make_grid(gs);
    d1.values[30] = 1.0 / d1.cell_volume();
    d2.values[200] = 1.0 / d2.cell_volume();
    CHECK(l1_distance(d1, d2) == doctest::Approx(2.0).epsilon(1e-12));

    const double s = 0.3, dx = a.dx();
    const auto shifted = gaussian_density(gs, {dx}, s);
    const double expect = 2.0 * dx / (s * std::sqrt(2.0 * 3.14159265358979324));
    CHECK(l1_distance(a, shifted) == doctest::Approx(expect).epsilon(0.02));

    const GridSpec other{1, 128, 0, 5.0};
    CHECK_THROWS_AS(l1_distance(a, make_grid(other)), GridMismatch);
}

TEST_CASE("histograms: point mass, leak accounting, Monte Carlo rate") {
    const GridSpec gs{1, 64, 0, 5.0};
    std::vector<double> samples(100, 0.12);
    const auto h = histogram_density(samples, 1, gs);
    const int cell = static_cast<int>(std::floor((0.12 + 5.0) / h.grid.dx()));
    CHECK(h.grid.values[cell] == doctest::Approx(1.0 / h.grid.cell_volume()));
    CHECK(h.grid.mass() == doctest::Approx(1.0));
    CHECK(h.leaked == 0);

    std::vector<double> leaky{0.0, 0.5, 7.5, -9.0}; // half leak out of [-5, 5]
    const auto hl = histogram_density(leaky, 1, gs);
    CHECK(hl.leaked == 2);
    CHECK(hl.grid.mass() == doctest::Approx(0.5));

    // L1 against the sampled density shrinks roughly like N^{-1/2}
    auto l1_at = [&](long n) {
        RngStream rs(99, {rng_tag::property_test, 7});
        std::vector<double> xs(n);
        for (long i = 0; i < n; ++i) xs[i] = 0.5 * rs.next_normal();
        const auto hh = histogram_density(xs, 1, gs);
        return l1_distance(hh.grid, gaussian_density(gs, {0.0}, 0.5));
    };
    const double r = l1_at(4000) / l1_at(64000);
    CHECK(r > 2.0);
    CHECK(r < 8.0);
}

TEST_CASE("standard-form drift: constant, isotropic, cross-coupled at the origin") {
    const auto mc = make_positive_case1(SymMatrix::diag({1.0, 2.0}));
    auto btc = drift_for_ito_form(mc);
    CHECK(norm2(btc({0.4, -0.7})) < 1e-15);

    const auto mi = make_positive_case2(2, profile_offset_sin(2, 1.0, 0.5, {1.0, 1.0}));
    auto bti = drift_for_ito_form(mi);
    const Vec x{0.3, 0.2};
    const Vec expect = 0.5 * Vec{0.5 * std::cos(0.5), 0.5 * std::cos(0.5)};
    CHECK(norm2(bti(x) - expect) < 1e-12);

    // alpha = 1, beta = 2, tau = 0.5 sin(x1 + x2) at the origin:
    // b~ - b = (1/2)(3 d2 tau, 3 d1 tau) = (0.75, 0.75)
    const auto mn = make_negative_case1(1.0, 2.0, profile_offset_sin(2, 0.0, 0.5, {1.0, 1.0}));
    auto btn = drift_for_ito_form(mn);
    const Vec b0 = btn({0.0, 0.0});
    CHECK(b0[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(b0[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("cell-averaged gaussian initial data resolve unit mass") {
    for (double s : {0.3, 0.5}) {
        const auto g1 = gaussian_density(GridSpec{1, 128, 0, 5.0}, {0.0}, s);
        CHECK(std::abs(g1.mass() - 1.0) < 1e-3);
        const auto g2 = gaussian_density(GridSpec{2, 64, 64, 5.0}, {0.0, 0.0}, s);
        CHECK(std::abs(g2.mass() - 1.0) < 1e-3);
    }
}

TEST_CASE("restriction averages children conservatively") {
    const auto fine = gaussian_density(GridSpec{2, 64, 64, 5.0}, {0.0, 0.0}, 0.4);
    const auto coarse = restrict_half(fine);
    CHECK(coarse.spec.nx == 32);
    CHECK(coarse.mass() == doctest::Approx(fine.mass()).epsilon(1e-12));
}
