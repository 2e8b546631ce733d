#include <doctest.h>

#include <cmath>

#include "kinetic/integrals.hpp"
#include "kinetic/stats.hpp"

using namespace kinetic;

TEST_CASE("constant integrands telescope exactly for every lambda") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 777), 1, 1);
    const double span = w.value(777) - w.value(0);
    for (double lam : {0.0, 0.25, 0.5, 255.0 / 512.0, 1.0}) {
        const double s =
            lambda_riemann_sum([](double) { return 3.5; }, w, InterpretationTag(lam));
        CHECK(s == doctest::Approx(3.5 * span).epsilon(1e-13));
    }
}

TEST_CASE("lambda sums of W dW approach the closed form W_T^2/2 + (lambda - 1/2) T") {
    // median over seeds decreases under refinement and lands near the limit
    auto id = [](double x) { return x; };
    for (double lam : {0.5, 1.0}) {
        std::vector<double> final_errs;
        int improved = 0;
        const int seeds = 40;
        for (int s = 0; s < seeds; ++s) {
            auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 8), 1, 500 + s);
            double coarse = 0, fine = 0;
            for (int lev = 0; lev < 4; ++lev) {
                const double wt = w.value(w.partition().intervals());
                const double closed = 0.5 * wt * wt + (lam - 0.5);
                const double err =
                    std::abs(lambda_riemann_sum(id, w, InterpretationTag(lam)) - closed);
                if (lev == 0) coarse = err;
                if (lev == 3) fine = err;
                if (lev < 3) {
                    w.refine_midpoints();
                    w.refine_midpoints();
                }
            }
            final_errs.push_back(fine);
            improved += fine < coarse ? 1 : 0;
        }
        CHECK(median(final_errs) < 0.02);
        CHECK(improved >= 0.8 * seeds);
    }
}

TEST_CASE("lambda monotonicity: S_n(l1) - S_n(l0) tracks (l1 - l0) T") {
    auto id = [](double x) { return x; };
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 14), 1, 9);
    const double s0 = lambda_riemann_sum(id, w, InterpretationTag(0.0));
    const double s_half = lambda_riemann_sum(id, w, InterpretationTag(0.5));
    const double s1 = lambda_riemann_sum(id, w, InterpretationTag(1.0));
    CHECK(s1 - s0 == doctest::Approx(1.0).epsilon(0.1));
    CHECK(s_half - s0 == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("Fehlberg integral: zero integrand, id closed form, identity residual") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 14), 1, 17);
    CHECK(fehlberg_integral([](double) { return 0.0; }, w) == 0.0);

    auto id = [](double x) { return x; };
    const double wt = w.value(w.partition().intervals());
    // 255/512 - 1/2 = -1/512: the limit sits T/512 below the Stratonovich one
    const double closed = 0.5 * wt * wt + (fehlberg_lambda - 0.5);
    CHECK(std::abs(fehlberg_integral(id, w) - closed) < 0.05);
    CHECK(closed == doctest::Approx(0.5 * wt * wt - 1.0 / 512.0));

    // residual of the conversion identity decreases under refinement
    auto sq = [](double x) { return x * x; };
    auto dsq = [](double x) { return 2.0 * x; };
    std::vector<double> med_lo, med_hi;
    for (int s = 0; s < 30; ++s) {
        auto ws = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 8), 1, 900 + s);
        med_lo.push_back(std::abs(fehlberg_identity_residual(sq, dsq, ws)));
        ws.refine_midpoints();
        ws.refine_midpoints();
        ws.refine_midpoints();
        ws.refine_midpoints();
        med_hi.push_back(std::abs(fehlberg_identity_residual(sq, dsq, ws)));
    }
    CHECK(median(med_hi) < median(med_lo));
    CHECK(median(med_hi) < 0.02);
}

TEST_CASE("right-endpoint integral: constants telescope, scalar case consistency") {
    // 2-d constant matrix integrand against a sampled path
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 512), 2, 23);
    SamplePath y;
    y.part = w.partition();
    y.dim = 2;
    y.stop_index = 512;
    for (int j = 0; j <= 512; ++j) {
        y.states.push_back(w.value(j, 0));
        y.states.push_back(w.value(j, 1));
    }
    MatrixField cf;
    cf.dim = 2;
    cf.value = [](const Vec&, double) { return Mat(2, {1.0, 2.0, -0.5, 3.0}); };
    cf.partial = [](int, const Vec&, double) { return Mat(2); };
    const Vec hk = hk_integral_multi(cf, y);
    const Vec dy{y.state(512, 0) - y.state(0, 0), y.state(512, 1) - y.state(0, 1)};
    CHECK(hk[0] == doctest::Approx(1.0 * dy[0] + 2.0 * dy[1]).epsilon(1e-12));
    CHECK(hk[1] == doctest::Approx(-0.5 * dy[0] + 3.0 * dy[1]).epsilon(1e-12));
    // exact conversion residual for constant integrands
    CHECK(conversion_residual(cf, y, [](const Vec&, double) {
              return SymMatrix::identity(2);
          }) < 1e-12);

    // scalar Psi(y) = y against Y = W recovers the lambda = 1 sum
    const auto w1 = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 12), 1, 29);
    SamplePath y1;
    y1.part = w1.partition();
    y1.dim = 1;
    y1.stop_index = 1 << 12;
    for (int j = 0; j <= (1 << 12); ++j) y1.states.push_back(w1.value(j));
    MatrixField idf;
    idf.dim = 1;
    idf.value = [](const Vec& x, double) { return Mat(1, {x[0]}); };
    idf.partial = [](int, const Vec&, double) { return Mat(1, {1.0}); };
    const Vec hk1 = hk_integral_multi(idf, y1);
    const double lam1 =
        lambda_riemann_sum([](double x) { return x; }, w1, InterpretationTag::hk());
    CHECK(hk1[0] == doctest::Approx(lam1).epsilon(1e-12));

    // conversion residual |HK - Ito - T| matches the closed-form gap
    const double resid = conversion_residual(idf, y1, [](const Vec&, double) {
        return SymMatrix::identity(1);
    });
    CHECK(resid < 0.1);
    // and decreases under refinement in the median
    std::vector<double> r_lo, r_hi;
    for (int s = 0; s < 25; ++s) {
        auto wr = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 8), 1, 1300 + s);
        auto make_path = [](const BrownianPath& wp) {
            SamplePath p;
            p.part = wp.partition();
            p.dim = 1;
            p.stop_index = wp.partition().intervals();
            for (int j = 0; j <= p.stop_index; ++j) p.states.push_back(wp.value(j));
            return p;
        };
        auto dfield = [](const Vec&, double) { return SymMatrix::identity(1); };
        r_lo.push_back(conversion_residual(idf, make_path(wr), dfield));
        wr.refine_midpoints();
        wr.refine_midpoints();
        wr.refine_midpoints();
        wr.refine_midpoints();
        r_hi.push_back(conversion_residual(idf, make_path(wr), dfield));
    }
    CHECK(median(r_hi) < median(r_lo));
    CHECK_THROWS_AS(hk_integral_multi(cf, y1), DimensionMismatch);
}

TEST_CASE("ratio discretization: division by W_0 = 0 overflows at the first term") {
    for (int s = 0; s < 25; ++s) {
        const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 256), 1, 2000 + s);
        const auto r = ho_discretization_sum(w);
        CHECK(r.overflow);
        CHECK(r.overflow_j == 1);
        CHECK(r.w_abs_at_overflow == 0.0);
    }
}

TEST_CASE("ratio discretization stays finite on a window avoiding zero") {
    // pick a realization whose |W| stays away from 0 on [1, 2]
    int seed = 1;
    double wmin = 0;
    for (; seed < 100; ++seed) {
        const auto w = BrownianPath::generate(Partition::uniform(1.0, 2.0, 512), 1, seed);
        wmin = 1e300;
        for (int j = 0; j <= 512; ++j) wmin = std::min(wmin, std::abs(w.value(j)));
        if (wmin > 0.05) break;
    }
    REQUIRE(wmin > 0.05);
    const auto w = BrownianPath::generate(Partition::uniform(1.0, 2.0, 512), 1, seed);
    const auto r = ho_discretization_sum(w);
    CHECK(!r.overflow);
    CHECK(std::isfinite(r.sum));
    CHECK(r.max_abs_recip <= 1.0 / wmin + 1e-12);
}

TEST_CASE("overflow fraction on shrinking windows is nondecreasing in n") {
    auto frac_at = [](int n) {
        int ovf = 0;
        for (int s = 0; s < 60; ++s) {
            std::vector<double> t(n);
            for (int j = 1; j <= n; ++j) t[j - 1] = static_cast<double>(j) / n;
            const auto w = BrownianPath::generate(Partition(std::move(t)), 1, 3000 + s);
            ovf += ho_discretization_sum(w).overflow ? 1 : 0;
        }
        return static_cast<double>(ovf) / 60.0;
    };
    CHECK(frac_at(1 << 10) >= frac_at(1 << 6));
}

TEST_CASE("deterministic integrands: exactness, by parts, lambda independence") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << 12), 1, 31);
    const double span = w.value(1 << 12) - w.value(0);
    for (double lam : {0.0, 0.5, 1.0})
        CHECK(deterministic_lambda_integral([](double) { return 1.0; }, w,
                                            InterpretationTag(lam)) ==
              doctest::Approx(span).epsilon(1e-13));

    // F(t) = t: lambda-integral plus companion sum telescopes to F(b) W_b;
    // exact at lambda = 0, within the refinement error otherwise
    auto lin = [](double t) { return t; };
    const double boundary = 1.0 * w.value(1 << 12);
    const double ilin0 = deterministic_lambda_integral(lin, w, InterpretationTag::ito());
    CHECK(ilin0 + stieltjes_companion_sum(lin, w) == doctest::Approx(boundary).epsilon(1e-12));
    for (double lam : {0.5, 1.0}) {
        const double il = deterministic_lambda_integral(lin, w, InterpretationTag(lam));
        CHECK(std::abs(il + stieltjes_companion_sum(lin, w) - boundary) < 1e-3);
    }

    // F(t) = sqrt(t): interpretation independent under refinement, with the
    // lambda gap controlled by diameter^{1/2} TV(F) at every level
    auto rt = [](double t) { return std::sqrt(std::max(t, 0.0)); };
    for (int log2n : {8, 14}) {
        const auto wf = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1 << log2n), 1, 37);
        const double i0 = deterministic_lambda_integral(rt, wf, InterpretationTag::ito());
        const double tv = 1.0; // sqrt(t) is monotone on [0,1]
        const double bound = std::sqrt(wf.partition().diameter()) * tv;
        for (double lam : {0.25, 0.5, 255.0 / 512.0, 0.75, 1.0}) {
            const double gap =
                std::abs(deterministic_lambda_integral(rt, wf, InterpretationTag(lam)) - i0);
            CHECK(gap < bound);
            if (log2n == 14) CHECK(gap < 1e-3);
        }
    }
}
