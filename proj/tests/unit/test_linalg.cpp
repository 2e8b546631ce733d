#include <doctest.h>

#include "kinetic/linalg.hpp"
#include "kinetic/rng.hpp"
#include "kinetic/tensor_field.hpp"

using namespace kinetic;

namespace {

SymMatrix random_spd(RngStream& rs, int d) {
    Mat m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rs.next_normal();
    Mat spd = m * m.transpose();
    for (int i = 0; i < d; ++i) spd(i, i) += 0.5;
    return SymMatrix(spd);
}

SymMatrix random_sym(RngStream& rs, int d) {
    Mat m(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double v = 2.0 * rs.next_unit() - 1.0;
            m(i, j) = v;
            m(j, i) = v;
        }
    return SymMatrix(m);
}

} // namespace

TEST_CASE("principal_sqrt on diagonal and identity inputs") {
    const SymMatrix d = SymMatrix::diag({4.0, 9.0});
    const SymMatrix s = principal_sqrt(d);
    CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

    for (int dim : {1, 2, 3, 4}) {
        const SymMatrix id = SymMatrix::identity(dim);
        const SymMatrix r = principal_sqrt(id);
        CHECK((r.mat() - id.mat()).frobenius() < 1e-14);
    }
}

TEST_CASE("principal_sqrt of [[2,1],[1,2]] matches the eigendecomposition") {
    const SymMatrix d(2, {2, 1, 1, 2});
    const SymMatrix s = principal_sqrt(d);
    // P diag(sqrt 3, 1) P^T with P the (1,1)/(1,-1) basis
    const double a = (std::sqrt(3.0) + 1.0) / 2.0;
    const double b = (std::sqrt(3.0) - 1.0) / 2.0;
    CHECK(s(0, 0) == doctest::Approx(a).epsilon(1e-14));
    CHECK(s(1, 1) == doctest::Approx(a).epsilon(1e-14));
    CHECK(s(0, 1) == doctest::Approx(b).epsilon(1e-14));
    const Mat sq = s.mat() * s.mat();
    CHECK((sq - d.mat()).frobenius() < 1e-12);
}

TEST_CASE("principal_sqrt rejects indefinite and asymmetric inputs") {
    CHECK_THROWS_AS(principal_sqrt(SymMatrix(2, {1, 0, 0, -0.5})), NotPositiveDefinite);
    CHECK_THROWS_AS(principal_sqrt(SymMatrix(2, {1, 2, 2, 1})), NotPositiveDefinite);
    CHECK_THROWS_AS(SymMatrix(2, {1, 0.5, 0.2, 1}), NotSymmetric);
}

TEST_CASE("squared principal root reproduces random SPD inputs") {
    RngStream rs(11, {rng_tag::property_test, 1});
    for (int d = 1; d <= 4; ++d) {
        for (int i = 0; i < 50; ++i) {
            const SymMatrix m = random_spd(rs, d);
            const SymMatrix s = principal_sqrt(m);
            const Mat sq = s.mat() * s.mat();
            CHECK((sq - m.mat()).frobenius() <= 1e-10 * std::max(1.0, m.frobenius()));
        }
    }
}

TEST_CASE("sylvester derivative: isotropic closed form and zero input") {
    // D = g I, dD = g' I  =>  sigma' = g' / (2 sqrt g) I
    const double g = 4.0, dg = 0.6;
    const SymMatrix d = SymMatrix::diag({g, g, g});
    const SymMatrix dd = SymMatrix::diag({dg, dg, dg});
    const SymMatrix sp = sylvester_sigma_derivative(d, dd);
    for (int i = 0; i < 3; ++i)
        CHECK(sp(i, i) == doctest::Approx(dg / (2.0 * std::sqrt(g))).epsilon(1e-13));

    const SymMatrix z = sylvester_sigma_derivative(d, SymMatrix(3));
    CHECK(z.frobenius() == doctest::Approx(0.0).epsilon(1e-15));

    CHECK_THROWS_AS(sylvester_sigma_derivative(SymMatrix(2, {1, 0, 0, -1}), SymMatrix(2)),
                    NotPositiveDefinite);
}

TEST_CASE("sylvester derivative reconstructs and matches finite differences") {
    RngStream rs(13, {rng_tag::property_test, 2});
    for (int d = 1; d <= 4; ++d) {
        for (int i = 0; i < 100; ++i) {
            const SymMatrix dm = random_spd(rs, d);
            const SymMatrix dd = random_sym(rs, d);
            const SymMatrix sp = sylvester_sigma_derivative(dm, dd);
            const SymMatrix sg = principal_sqrt(dm);
            const Mat rec = sg.mat() * sp.mat() + sp.mat() * sg.mat() - dd.mat();
            CHECK(rec.frobenius() <= 1e-9 * std::max(1.0, dd.frobenius()));

            const double h = 1e-5;
            const SymMatrix sm = principal_sqrt(SymMatrix(dm.mat() - h * dd.mat()));
            const SymMatrix sl = principal_sqrt(SymMatrix(dm.mat() + h * dd.mat()));
            const Mat fd = (1.0 / (2.0 * h)) * (sl.mat() - sm.mat());
            CHECK((sp.mat() - fd).frobenius() <= 1e-5 * std::max(1e-12, fd.frobenius()));
        }
    }
}

TEST_CASE("jacobi eigendecomposition reassembles the matrix") {
    RngStream rs(17, {rng_tag::property_test, 3});
    for (int d = 2; d <= 4; ++d) {
        const SymMatrix m = random_sym(rs, d);
        Vec ev;
        Mat p;
        jacobi_eigensym(m, ev, p);
        Mat lam(d);
        for (int i = 0; i < d; ++i) lam(i, i) = ev[i];
        const Mat back = p * lam * p.transpose();
        CHECK((back - m.mat()).frobenius() < 1e-12 * std::max(1.0, m.frobenius()));
        for (int i = 1; i < d; ++i) CHECK(ev[i] >= ev[i - 1]);
    }
}

TEST_CASE("double dot product contracts the last two indices") {
    Rank3Field a(2);
    a(0, 0, 0) = 1;
    a(0, 1, 1) = 2;
    a(1, 1, 0) = 3;
    Mat b(2, {1, 2, 3, 4});
    const Vec r = double_dot(a, b);
    CHECK(r[0] == doctest::Approx(1 * 1 + 2 * 4));
    CHECK(r[1] == doctest::Approx(3 * 3));
}
