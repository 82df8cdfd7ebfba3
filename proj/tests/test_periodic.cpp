#include <doctest.h>

#include <cmath>

#include "perideval/analysis.hpp"
#include "perideval/periodic.hpp"
#include "perideval/rng.hpp"
#include "support.hpp"

using namespace perideval;
using test_support::forcing;
using test_support::scalar_matrix;

namespace {

constexpr double kPi = 3.14159265358979323846;

PeriodicTrajectory random_trajectory(double omega, int steps, int n, Rng& rng, double lo,
                                     double hi) {
    PeriodicTrajectory u;
    u.omega = omega;
    u.steps = steps;
    u.values.reserve(static_cast<std::size_t>(steps));
    for (int j = 0; j < steps; ++j) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
        u.values.push_back(std::move(v));
    }
    return u;
}

double sup_diff(const PeriodicTrajectory& a, const PeriodicTrajectory& b) {
    double m = 0.0;
    for (int j = 0; j < a.steps; ++j)
        m = std::max(m, (a.values[static_cast<std::size_t>(j)] -
                         b.values[static_cast<std::size_t>(j)])
                            .cwiseAbs()
                            .maxCoeff());
    return m;
}

} // namespace

TEST_SUITE("periodic") {

TEST_CASE("apply_nemytskii on constant trajectories") {
    const auto f = make_affine(0.3, 0.2, 0.25, forcing(1.0, 0.0, 0.0, 1.0, 1));
    const auto u = constant_trajectory(1.0, 16, Vector::Constant(1, 2.0));
    const auto fu = apply_nemytskii(f, u);
    for (const auto& v : fu.values) CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-14));

    // forcing-only: output equals h0 regardless of u
    const auto f0 = make_affine(0.0, 0.0, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 1));
    const auto h = apply_nemytskii(f0, u);
    for (int j = 0; j < 16; ++j) {
        const double t = j / 16.0;
        CHECK(h.values[static_cast<std::size_t>(j)][0] ==
              doctest::Approx(1.0 + 0.5 * std::sin(2.0 * kPi * t)).epsilon(1e-12));
    }

    const auto fs = make_saturating(1.0, 0.0, 0.25, forcing(0.0, 0.0, 0.0, 1.0, 1));
    const auto su = apply_nemytskii(fs, constant_trajectory(1.0, 16, Vector::Ones(1)));
    for (const auto& v : su.values) CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("apply_nemytskii delay handling") {
    const auto f = make_affine(0.0, 1.0, 0.25, forcing(0.0, 0.0, 0.0, 1.0, 1));
    // tau = 0.25 against dt = 0.1 is not commensurate
    const auto u = constant_trajectory(1.0, 10, Vector::Ones(1));
    CHECK_THROWS_AS(apply_nemytskii(f, u), ConfigError);

    // interpolation mode reads the wrapped linear interpolant
    PeriodicTrajectory ramp;
    ramp.omega = 1.0;
    ramp.steps = 10;
    for (int j = 0; j < 10; ++j) ramp.values.push_back(Vector::Constant(1, static_cast<double>(j)));
    const auto out = apply_nemytskii(f, ramp, true);
    // delayed position for j = 5 is 5 - 2.5 = 2.5 -> midpoint of 2 and 3
    CHECK(out.values[5][0] == doctest::Approx(2.5).epsilon(1e-12));

    PeriodicTrajectory bad = constant_trajectory(1.0, 16, Vector::Constant(1, -1.0));
    const auto fd = make_affine(0.1, 0.1, 0.25, forcing(1.0, 0.0, 0.0, 1.0, 1));
    CHECK_THROWS_AS(apply_nemytskii(fd, bad), ConeViolationError);
}

TEST_CASE("monodromy inverse examples") {
    const Generator one = build_generator(scalar_matrix(1.0));
    CHECK(monodromy_inverse(one, std::log(2.0))(0, 0) == doctest::Approx(2.0).epsilon(1e-13));

    Matrix d(2, 2);
    d << 1.0, 0.0, 0.0, 2.0;
    const Matrix inv = monodromy_inverse(build_generator(d), 1.0);
    CHECK(inv(0, 0) == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-13));
    CHECK(inv(1, 1) == doctest::Approx(1.0 / (1.0 - std::exp(-2.0))).epsilon(1e-13));
    CHECK(std::abs(inv(0, 1)) <= 1e-14);

    CHECK_THROWS_AS(monodromy_inverse(build_generator(scalar_matrix(-1.0)), 1.0), ValidationError);
    // lambda1 barely positive: (I - T(omega)) is numerically singular
    CHECK_THROWS_AS(monodromy_inverse(build_generator(scalar_matrix(1e-13)), 1.0),
                    SingularityError);
}

TEST_CASE("neumann series cross-checks the direct inverse") {
    const Generator one = build_generator(scalar_matrix(1.0));

    const NeumannSeries first = neumann_inverse(one, 1.0, 1);
    CHECK(first.sum(0, 0) == 1.0);

    // geometric series: partial sums approach 1/(1 - e^{-1}) ~ 1.58198
    const NeumannSeries fifty = neumann_inverse(one, 1.0, 50);
    const double direct = monodromy_inverse(one, 1.0)(0, 0);
    CHECK(std::abs(fifty.sum(0, 0) - direct) <= 1e-12);
    CHECK(direct == doctest::Approx(1.58197670686932642).epsilon(1e-12));
    CHECK(fifty.truncation_bound <= 1e-20);
    CHECK(fifty.truncation_bound > 0.0);
    CHECK(fifty.truncation_bound ==
          doctest::Approx(std::exp(-50.0) / (1.0 - std::exp(-1.0))).epsilon(1e-12));

    // Metzler generator: every partial sum is entrywise nonnegative, and so
    // is the direct inverse they approximate
    Matrix tri(3, 3);
    tri << 2.0, -0.5, 0.0, -0.5, 2.0, -0.5, 0.0, -0.5, 2.0;
    const Generator gt = build_generator(tri);
    for (int terms : {1, 3, 10})
        CHECK(neumann_inverse(gt, 1.0, terms).sum.minCoeff() >= 0.0);
    CHECK(monodromy_inverse(gt, 1.0).minCoeff() >= -1e-12);
}

TEST_CASE("periodic_linear_solve stationary and zero forcing") {
    const Generator two = build_generator(scalar_matrix(2.0));
    const auto u = periodic_linear_solve(two, constant_trajectory(1.0, 32, Vector::Constant(1, 3.0)));
    for (const auto& v : u.values) CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-13));

    const auto z = periodic_linear_solve(two, constant_trajectory(1.0, 32, Vector::Zero(1)));
    CHECK(z.sup_norm() <= 1e-15);
}

TEST_CASE("periodic_linear_solve matches the Fourier amplitude for cosine forcing") {
    // u' + 2u = cos t on omega = 2 pi: amplitude 1/sqrt(5)
    const Generator two = build_generator(scalar_matrix(2.0));
    const int m = 256;
    PeriodicTrajectory h;
    h.omega = 2.0 * kPi;
    h.steps = m;
    for (int j = 0; j < m; ++j)
        h.values.push_back(Vector::Constant(1, std::cos(2.0 * kPi * j / m)));
    const auto u = periodic_linear_solve(two, h);

    const auto oracle = fourier_periodic_oracle(
        2.0, 0.0, 0.0, 1.0, 2.0 * kPi,
        {std::complex<double>(0.0, 0.0), std::complex<double>(0.5, 0.0)}, m);
    CHECK(sup_diff(u, oracle) <= 1e-4);
    CHECK(u.sup_norm() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(2e-4));
}

TEST_CASE("spectral radius of P") {
    CHECK(spectral_radius_P(build_generator(scalar_matrix(1.0)), 1.0, 32) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(spectral_radius_P(build_generator(scalar_matrix(2.0)), 1.0, 32) ==
          doctest::Approx(0.5).epsilon(1e-6));
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1.0, 4.0, 9.0;
    CHECK(spectral_radius_P(build_generator(d), 1.0, 32) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("picard converges to the constant fixed point") {
    const Generator one = build_generator(scalar_matrix(1.0));
    const auto f = make_affine(0.3, 0.2, 0.5, forcing(1.0, 0.0, 0.0, 1.0, 1));
    PicardOptions options;
    options.tol = 1e-9;
    const auto result = picard_solve(one, f, 1.0, 64, options);
    CHECK(result.converged);
    CHECK(result.iterations <= 60);
    for (const auto& v : result.solution.values) CHECK(std::abs(v[0] - 2.0) <= 1e-8);
    CHECK(result.residual <= 2e-9);
    CHECK(result.positivity_violation >= -1e-10);
}

TEST_CASE("picard does not converge at the sharp threshold") {
    const Generator one = build_generator(scalar_matrix(1.0));
    const auto f = make_affine(0.5, 0.5, 1.0, forcing(1.0, 0.0, 0.0, 1.0, 1));
    PicardOptions options;
    options.max_iter = 200;
    options.divergence_threshold = 1e6;
    const auto result = picard_solve(one, f, 1.0, 64, options);
    CHECK_FALSE(result.converged);
    CHECK(result.iterations == 200);
    // iterates grow without bound, one unit of forcing per sweep
    CHECK(result.solution.sup_norm() >= 100.0);
    CHECK(result.residual >= 0.5);
}

TEST_CASE("picard matches the Fourier oracle on the affine benchmark") {
    const Generator two = build_generator(scalar_matrix(2.0));
    const auto f = make_affine(0.5, 0.5, kPi, forcing(1.0, 1.0, 0.0, 2.0 * kPi, 1));
    PicardOptions options;
    options.tol = 1e-12;
    const auto result = picard_solve(two, f, 2.0 * kPi, 512, options);
    REQUIRE(result.converged);
    const auto oracle = fourier_oracle_field(two, f, 2.0 * kPi, 512);
    CHECK(sup_diff(result.solution, oracle) / oracle.sup_norm() <= 1e-4);
}

TEST_CASE("P is linear") {
    Matrix tri(3, 3);
    tri << 2.0, -0.5, 0.0, -0.5, 2.0, -0.5, 0.0, -0.5, 2.0;
    const Generator gen = build_generator(tri);
    PeriodicPropagator prop(gen, 1.0, 24);

    Rng rng(5);
    const auto h1 = random_trajectory(1.0, 24, 3, rng, -1.0, 1.0);
    const auto h2 = random_trajectory(1.0, 24, 3, rng, -1.0, 1.0);
    const double alpha = 1.7, beta = -0.6;

    PeriodicTrajectory combo = h1;
    for (int j = 0; j < 24; ++j)
        combo.values[static_cast<std::size_t>(j)] =
            alpha * h1.values[static_cast<std::size_t>(j)] +
            beta * h2.values[static_cast<std::size_t>(j)];

    const auto lhs = prop.apply(combo);
    const auto p1 = prop.apply(h1);
    const auto p2 = prop.apply(h2);
    PeriodicTrajectory rhs = lhs;
    for (int j = 0; j < 24; ++j)
        rhs.values[static_cast<std::size_t>(j)] = alpha * p1.values[static_cast<std::size_t>(j)] +
                                                  beta * p2.values[static_cast<std::size_t>(j)];
    const double scale = std::abs(alpha) * h1.sup_norm() + std::abs(beta) * h2.sup_norm();
    CHECK(sup_diff(lhs, rhs) <= 1e-10 * scale);
}

TEST_CASE("P preserves the cone for Metzler generators") {
    Matrix tri(4, 4);
    tri.setZero();
    for (int i = 0; i < 4; ++i) {
        tri(i, i) = 2.0;
        if (i > 0) tri(i, i - 1) = -0.7;
        if (i < 3) tri(i, i + 1) = -0.7;
    }
    const Generator gen = build_generator(tri);
    PeriodicPropagator prop(gen, 1.0, 16);
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = random_trajectory(1.0, 16, 4, rng, 0.0, 2.0);
        CHECK(prop.apply(h).min_entry() >= -1e-12);
    }
}

TEST_CASE("Q is monotone for catalog nonlinearities") {
    const Generator one = build_generator(scalar_matrix(1.0));
    Rng rng(13);
    for (const auto& f : {make_affine(0.3, 0.2, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 1)),
                          make_saturating(0.5, 0.3, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 1))}) {
        PeriodicPropagator prop(one, 1.0, 16);
        const auto u = random_trajectory(1.0, 16, 1, rng, 0.0, 3.0);
        auto v = u;
        for (int j = 0; j < 16; ++j) v.values[static_cast<std::size_t>(j)][0] += rng.uniform(0.0, 2.0);

        const auto qu = prop.apply(apply_nemytskii(f, u));
        const auto qv = prop.apply(apply_nemytskii(f, v));
        for (int j = 0; j < 16; ++j)
            CHECK((qv.values[static_cast<std::size_t>(j)] - qu.values[static_cast<std::size_t>(j)])
                      .minCoeff() >= -1e-10);
    }
}

TEST_CASE("converged residual stays below twice the tolerance") {
    const Generator one = build_generator(scalar_matrix(1.0));
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1.0, 4.0, 9.0;
    const Generator diag = build_generator(d);
    const double tol = 1e-10;

    struct Case {
        const Generator* gen;
        NonlinearitySpec f;
    };
    const std::vector<Case> cases = {
        {&one, make_affine(0.3, 0.2, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 1))},
        {&one, make_saturating(0.5, 0.3, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 1))},
        {&diag, make_affine(0.3, 0.3, 0.25, forcing(1.0, 0.5, 0.0, 1.0, 3))},
    };
    for (const auto& c : cases) {
        PicardOptions options;
        options.tol = tol;
        const auto result = picard_solve(*c.gen, c.f, 1.0, 32, options);
        REQUIRE(result.converged);
        CHECK(result.residual <= 2.0 * tol);
    }
}

TEST_CASE("second-order grid convergence against the Fourier oracle") {
    const Generator two = build_generator(scalar_matrix(2.0));
    const auto f = make_affine(0.5, 0.5, kPi, forcing(1.0, 1.0, 0.0, 2.0 * kPi, 1));
    std::vector<double> errors;
    for (int m : {64, 128, 256, 512}) {
        PicardOptions options;
        options.tol = 1e-12;
        const auto result = picard_solve(two, f, 2.0 * kPi, m, options);
        REQUIRE(result.converged);
        const auto oracle = fourier_oracle_field(two, f, 2.0 * kPi, m);
        errors.push_back(sup_diff(result.solution, oracle));
    }
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) CHECK(errors[k] / errors[k + 1] >= 3.0);
}

} // TEST_SUITE
