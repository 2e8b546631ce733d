#include <doctest.h>

#include <cmath>

#include "kinetic/brownian.hpp"
#include "kinetic/stats.hpp"

using namespace kinetic;

TEST_CASE("partition basics and lambda points") {
    const Partition p = Partition::uniform(0.0, 1.0, 4);
    CHECK(p.intervals() == 4);
    CHECK(p.diameter() == doctest::Approx(0.25));
    CHECK(p.lambda_point(1, 0.0) == doctest::Approx(0.0));
    CHECK(p.lambda_point(1, 1.0) == doctest::Approx(0.25));
    CHECK(p.lambda_point(3, 0.5) == doctest::Approx(0.625));
    CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5, 1.0}), ParamViolation);
    CHECK_THROWS_AS(InterpretationTag(1.5), ParamViolation);
    CHECK(InterpretationTag::fehlberg().lambda == doctest::Approx(255.0 / 512.0));
}

TEST_CASE("generated values are running sums of the stored increments") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 2.0, 257), 2, 99);
    CHECK(w.value(0, 0) == 0.0);
    CHECK(w.value(0, 1) == 0.0);
    for (int j = 1; j <= 257; ++j)
        for (int k = 0; k < 2; ++k) {
            const double rebuilt = w.value(j - 1, k) + w.increment(j, k);
            CHECK(rebuilt == w.value(j, k)); // bit-exact by construction
        }
}

TEST_CASE("windows away from the origin start at N(0, a)") {
    const auto w = BrownianPath::generate(Partition::uniform(1.0, 2.0, 64), 1, 5);
    CHECK(w.value(0) != 0.0);
}

TEST_CASE("same seed and partition give identical paths") {
    const auto a = BrownianPath::generate(Partition::uniform(0.0, 1.0, 128), 1, 42);
    const auto b = BrownianPath::generate(Partition::uniform(0.0, 1.0, 128), 1, 42);
    for (int j = 0; j <= 128; ++j) CHECK(a.value(j) == b.value(j));
    const auto c = BrownianPath::generate(Partition::uniform(0.0, 1.0, 128), 1, 43);
    bool any_diff = false;
    for (int j = 1; j <= 128; ++j) any_diff = any_diff || (a.value(j) != c.value(j));
    CHECK(any_diff);
}

TEST_CASE("midpoint refinement keeps coarse values bit-exact") {
    auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 64), 2, 7);
    std::vector<double> coarse;
    for (int j = 0; j <= 64; ++j)
        for (int k = 0; k < 2; ++k) coarse.push_back(w.value(j, k));
    w.refine_midpoints();
    w.refine_midpoints();
    CHECK(w.partition().intervals() == 256);
    for (int j = 0; j <= 64; ++j)
        for (int k = 0; k < 2; ++k)
            CHECK(w.value(4 * j, k) == coarse[static_cast<std::size_t>(j) * 2 + k]);
    // increments stay consistent with values after refinement
    for (int j = 1; j <= 256; ++j)
        CHECK(w.increment(j, 0) == w.value(j, 0) - w.value(j - 1, 0));
}

TEST_CASE("restriction is the bit-exact strided view") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 1000), 1, 21);
    const auto c = BrownianPath::restriction(w, 10);
    CHECK(c.partition().intervals() == 100);
    for (int j = 0; j <= 100; ++j) CHECK(c.value(j) == w.value(10 * j));
    CHECK_THROWS_AS(BrownianPath::restriction(w, 7), ParamViolation);
}

TEST_CASE("lambda values: exact endpoints and reproducible bridge draws") {
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, 32), 1, 3);
    for (int j = 1; j <= 32; ++j) {
        CHECK(w.lambda_value(j, 0.0) == w.value(j - 1));
        CHECK(w.lambda_value(j, 1.0) == w.value(j));
        CHECK(w.lambda_value(j, 0.5) == w.lambda_value(j, 0.5));
        CHECK(w.lambda_value(j, 0.5) != w.lambda_value(j, 0.25));
    }
}

TEST_CASE("bridge draws have the conditional bridge moments") {
    // residual B = W* - ((1-l) W_l + l W_r) should be centered with variance
    // l (1 - l) dt, independent across intervals
    const int n = 20000;
    const double lam = 0.3, dt = 1.0 / n;
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 1.0, n), 1, 8);
    std::vector<double> b;
    for (int j = 1; j <= n; ++j)
        b.push_back(w.lambda_value(j, lam) - ((1.0 - lam) * w.value(j - 1) + lam * w.value(j)));
    const double m = mean(b);
    double v = 0;
    for (double x : b) v += (x - m) * (x - m);
    v /= (n - 1);
    const double expect = lam * (1.0 - lam) * dt;
    CHECK(std::abs(m) < 4.0 * std::sqrt(expect / n));
    CHECK(v == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("increment variance matches the grid spacing") {
    const int n = 40000;
    const auto w = BrownianPath::generate(Partition::uniform(0.0, 2.0, n), 1, 12);
    double v = 0;
    for (int j = 1; j <= n; ++j) v += w.increment(j) * w.increment(j);
    v /= n;
    CHECK(v == doctest::Approx(2.0 / n).epsilon(0.05));
}
