#include "tomo/projection.hpp"
#include "tomo/random.hpp"
#include "tomo/states.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace tomo;

TEST_SUITE_BEGIN("projection");

TEST_CASE("simplex projection examples") {
    RVector onehot(3);
    onehot << 1.0, 0.0, 0.0;
    CHECK((simplex_project(onehot) - onehot).cwiseAbs().maxCoeff() <= 1e-15);

    RVector even(2);
    even << 0.6, 0.6;
    const RVector balanced = simplex_project(even);
    CHECK(balanced(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(balanced(1) == doctest::Approx(0.5).epsilon(1e-14));

    RVector spread(2);
    spread << 2.0, -1.0;
    const RVector clipped = simplex_project(spread);
    CHECK(clipped(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(clipped(1) == doctest::Approx(0.0));

    CHECK_THROWS_AS(simplex_project(RVector()), std::invalid_argument);
}

TEST_CASE("simplex projection handles unsorted input in input order") {
    RVector v(3);
    v << -1.0, 2.0, 0.3;
    const RVector out = simplex_project(v);
    CHECK(out(0) == doctest::Approx(0.0));
    CHECK(out(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out(2) == doctest::Approx(0.0));
}

TEST_CASE("simplex projection matches the grid-search oracle") {
    Rng rng(71);
    for (int trial = 0; trial < 40; ++trial) {
        const Index d = (trial % 2 == 0) ? 2 : 3;
        RVector v(d);
        for (Index i = 0; i < d; ++i) v(i) = 3.0 * rng.normal();
        const RVector impl = simplex_project(v);
        const RVector grid = oracles::simplex_grid_nearest(v);

        CHECK(impl.minCoeff() >= 0.0);
        CHECK(std::abs(impl.sum() - 1.0) <= 1e-12);
        // the oracle point can only be (approximately) as close
        CHECK((v - impl).norm() <= (v - grid).norm() + 1e-9);
        CHECK((impl - grid).cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("projection to states: examples") {
    Rng rng(73);
    const Matrix rho = oracles::random_density(rng, 3);
    CHECK((project_to_states(rho) - rho).cwiseAbs().maxCoeff() <= 1e-10);

    Matrix diag = Matrix::Zero(2, 2);
    diag.diagonal() << 2.0, -1.0;
    const Matrix projected = project_to_states(diag);
    CHECK(projected(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(projected(1, 1)) <= 1e-12);
}

TEST_CASE("projection to states: idempotence, membership, optimality") {
    Rng rng(79);
    for (int trial = 0; trial < 60; ++trial) {
        const Index d = (trial % 2 == 0) ? 2 : 3;
        const Matrix h = oracles::random_hermitian(rng, d);
        RVector spectrum;
        const Matrix p = project_to_states(h, &spectrum);

        CHECK(check_density(p).ok());
        CHECK(spectrum.minCoeff() >= 0.0);
        CHECK((project_to_states(p) - p).norm() <= 1e-10);

        const double impl_dist = (h - p).norm();
        const Matrix dykstra = oracles::dykstra_nearest_state(h);
        CHECK(std::abs(impl_dist - (h - dykstra).norm()) <= 1e-6);
        if (d == 2) {
            CHECK(std::abs(impl_dist - oracles::bloch_nearest_distance(h)) <= 1e-9);
        }
    }
}

TEST_CASE("projection beats random feasible states") {
    Rng rng(83);
    const Matrix h = oracles::random_hermitian(rng, 2);
    const Matrix p = project_to_states(h);
    const double dist = (h - p).norm();
    for (int trial = 0; trial < 100000; ++trial) {
        const Matrix candidate = oracles::random_density(rng, 2);
        CHECK(dist <= (h - candidate).norm() + 1e-8);
    }
}

TEST_CASE("projection preserves eigenvalue order") {
    Rng rng(89);
    for (int trial = 0; trial < 50; ++trial) {
        RVector v(5);
        for (Index i = 0; i < 5; ++i) v(i) = 2.0 * rng.normal();
        std::sort(v.data(), v.data() + v.size(), std::greater<double>());
        const RVector out = simplex_project(v);
        for (Index i = 0; i + 1 < out.size(); ++i) {
            CHECK(out(i) >= out(i + 1));
        }
    }
}

TEST_CASE("projection is unitarily covariant away from degeneracies") {
    Rng rng(97);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 4;
        // spectrum with gaps well above the 1e-6 degeneracy floor
        RVector spectrum(d);
        for (Index i = 0; i < d; ++i) {
            spectrum(i) = 2.0 - 0.7 * static_cast<double>(i) +
                          0.05 * rng.uniform();
        }
        const Matrix basis = oracles::random_unitary(rng, d);
        const Matrix h = basis * spectrum.asDiagonal() * basis.adjoint();
        const Matrix u = oracles::random_unitary(rng, d);

        const Matrix lhs = project_to_states(u * h * u.adjoint());
        const Matrix rhs = u * project_to_states(h) * u.adjoint();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("projection rejects non-Hermitian input but symmetrizes round-off") {
    Matrix skew(2, 2);
    skew << Cplx(1.0, 0.0), Cplx(0.5, 0.0), Cplx(-0.5, 0.0), Cplx(0.0, 0.0);
    CHECK_THROWS_AS(project_to_states(skew), std::invalid_argument);

    Matrix nearly = maximally_mixed(2);
    nearly(0, 1) += Cplx(0.0, 1e-10);   // residual 1e-10, below the 1e-8 gate
    const Matrix projected = project_to_states(nearly);
    CHECK(check_density(projected).ok());
}

TEST_SUITE_END();
