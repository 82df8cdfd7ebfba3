#include "perideval/periodic.hpp"

#include <cmath>
#include <limits>

#include "perideval/problems.hpp"

namespace perideval {

namespace {

void require_exp_stable(const Generator& gen, const char* who) {
    const SpectrumInfo info = spectrum(gen);
    if (!info.exp_stable)
        throw ValidationError(std::string(who) +
                              " requires an exponentially stable generator (lambda1 = " +
                              std::to_string(info.lambda1) + " <= 0)");
}

Matrix matrix_power(Matrix base, long exponent) {
    Matrix result = Matrix::Identity(base.rows(), base.cols());
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        base = base * base;
        exponent >>= 1;
    }
    return result;
}

} // namespace

double PeriodicTrajectory::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

double PeriodicTrajectory::min_entry() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : values) m = std::min(m, v.minCoeff());
    return m;
}

PeriodicTrajectory constant_trajectory(double omega, int steps, const Vector& value) {
    PeriodicTrajectory u;
    u.omega = omega;
    u.steps = steps;
    u.values.assign(static_cast<std::size_t>(steps), value);
    return u;
}

PeriodicTrajectory apply_nemytskii(const NonlinearitySpec& f, const PeriodicTrajectory& u,
                                   bool interpolate_delay) {
    const int m = u.steps;
    const double dt = u.dt();
    PeriodicTrajectory out;
    out.omega = u.omega;
    out.steps = m;
    out.values.reserve(static_cast<std::size_t>(m));

    if (!interpolate_delay && !delay_commensurate(f.delay_tau, dt))
        throw ConfigError("tau = " + std::to_string(f.delay_tau) +
                          " is not an integer multiple of omega/steps = " + std::to_string(dt) +
                          " and delay interpolation is disabled");

    if (interpolate_delay && !delay_commensurate(f.delay_tau, dt)) {
        const double offset = f.delay_tau / dt;
        for (int j = 0; j < m; ++j) {
            const double p = static_cast<double>(j) - offset;
            const double fl = std::floor(p);
            const double theta = p - fl;
            const long i0 = static_cast<long>(fl);
            Vector delayed = (1.0 - theta) * u.at_wrapped(i0) + theta * u.at_wrapped(i0 + 1);
            out.values.push_back(nonlinearity_eval(f, j * dt, u.values[j], delayed));
        }
        return out;
    }

    const long d = delay_steps(f.delay_tau, dt);
    for (int j = 0; j < m; ++j)
        out.values.push_back(nonlinearity_eval(f, j * dt, u.values[j], u.at_wrapped(j - d)));
    return out;
}

Matrix monodromy_inverse(const Generator& gen, double omega) {
    if (omega <= 0.0) throw DomainError("omega must be positive");
    require_exp_stable(gen, "monodromy_inverse");
    const int n = gen.dimension();
    const Matrix monodromy = semigroup_matrix(gen, omega);
    const Matrix system = Matrix::Identity(n, n) - monodromy;
    Eigen::PartialPivLU<Matrix> lu(system);
    const Matrix inverse = lu.solve(Matrix::Identity(n, n));
    // condition estimate: LU reciprocal condition plus the amplification of
    // the inverse itself (catches T(omega) eigenvalues hugging 1)
    const double amplification = inverse.cwiseAbs().rowwise().sum().maxCoeff() *
                                 std::max(1.0, monodromy.cwiseAbs().rowwise().sum().maxCoeff());
    const double cond_estimate = std::max(1.0 / std::max(lu.rcond(), 1e-300), amplification);
    if (cond_estimate > 1e12) {
        const SpectrumInfo info = spectrum(gen);
        std::complex<double> worst = info.eigenvalues.front();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& ev : info.eigenvalues) {
            const double gap = std::abs(1.0 - std::exp(-ev * omega));
            if (gap < best) {
                best = gap;
                worst = ev;
            }
        }
        throw SingularityError("(I - T(omega)) is numerically singular (condition estimate " +
                               std::to_string(cond_estimate) + "); offending eigenvalue lambda = " +
                               std::to_string(worst.real()) + " + " + std::to_string(worst.imag()) +
                               "i");
    }
    return inverse;
}

NeumannSeries neumann_inverse(const Generator& gen, double omega, int terms) {
    if (omega <= 0.0) throw DomainError("omega must be positive");
    if (terms < 1) throw DomainError("terms must be >= 1");
    require_exp_stable(gen, "neumann_inverse");
    const int n = gen.dimension();
    const Matrix e = semigroup_matrix(gen, omega);
    Matrix sum = Matrix::Identity(n, n);
    Matrix power = Matrix::Identity(n, n);
    for (int k = 1; k < terms; ++k) {
        power = power * e;
        sum += power;
    }
    const SpectrumInfo info = spectrum(gen);
    const double bound = std::exp(info.nu0 * terms * omega) / (1.0 - std::exp(info.nu0 * omega));
    return NeumannSeries{std::move(sum), bound};
}

PeriodicPropagator::PeriodicPropagator(const Generator& gen, double omega, int steps)
    : omega_(omega), steps_(steps) {
    if (omega <= 0.0) throw DomainError("omega must be positive");
    if (steps < 1) throw DomainError("steps must be >= 1");
    require_exp_stable(gen, "periodic solve");
    step_ = make_stepper(gen, omega / steps);
    const int n = gen.dimension();
    const Matrix monodromy = matrix_power(step_.E, steps);
    const Matrix system = Matrix::Identity(n, n) - monodromy;
    closure_.compute(system);
    const double amplification = closure_.solve(Vector::Ones(n)).cwiseAbs().maxCoeff() *
                                 std::max(1.0, monodromy.cwiseAbs().rowwise().sum().maxCoeff());
    const double cond_estimate =
        std::max(1.0 / std::max(closure_.rcond(), 1e-300), amplification);
    if (cond_estimate > 1e12)
        throw SingularityError("(I - E^M) is numerically singular (condition estimate " +
                               std::to_string(cond_estimate) + ")");
}

PeriodicTrajectory PeriodicPropagator::apply(const PeriodicTrajectory& forcing) const {
    if (forcing.steps != steps_)
        throw StructuralError("forcing grid does not match the propagator grid");
    const int m = steps_;
    // one-period convolution from zero initial data
    Vector acc = Vector::Zero(step_.E.rows());
    for (int j = 0; j < m; ++j)
        acc = step_.E * acc + step_.W1 * forcing.values[static_cast<std::size_t>(j)] +
              step_.W2 * forcing.at_wrapped(j + 1);

    PeriodicTrajectory u;
    u.omega = omega_;
    u.steps = m;
    u.values.resize(static_cast<std::size_t>(m));
    u.values[0] = closure_.solve(acc);
    for (int j = 0; j + 1 < m; ++j)
        u.values[static_cast<std::size_t>(j + 1)] =
            step_.E * u.values[static_cast<std::size_t>(j)] +
            step_.W1 * forcing.values[static_cast<std::size_t>(j)] +
            step_.W2 * forcing.at_wrapped(j + 1);
    return u;
}

PeriodicTrajectory periodic_linear_solve(const Generator& gen, const PeriodicTrajectory& forcing) {
    PeriodicPropagator prop(gen, forcing.omega, forcing.steps);
    return prop.apply(forcing);
}

double spectral_radius_P(const Generator& gen, double omega, int steps) {
    PeriodicPropagator prop(gen, omega, steps);
    PeriodicTrajectory h = constant_trajectory(omega, steps, Vector::Ones(gen.dimension()));
    double rho_prev = -1.0;
    constexpr int kMaxIterations = 10000;
    for (int k = 0; k < kMaxIterations; ++k) {
        PeriodicTrajectory u = prop.apply(h);
        const double rho = u.sup_norm();
        if (rho == 0.0) return 0.0;
        if (std::abs(rho - rho_prev) <= 1e-8) return rho;
        rho_prev = rho;
        for (auto& v : u.values) v /= rho;
        h = std::move(u);
    }
    throw NumericalError("power iteration on P stagnated after " +
                         std::to_string(kMaxIterations) + " iterations (last ratio " +
                         std::to_string(rho_prev) + ")");
}

PeriodicSolveResult picard_solve(const Generator& gen, const NonlinearitySpec& f, double omega,
                                 int steps, const PicardOptions& options) {
    PeriodicPropagator prop(gen, omega, steps);
    PeriodicSolveResult result;
    PeriodicTrajectory u = constant_trajectory(omega, steps, Vector::Zero(gen.dimension()));

    for (int k = 1; k <= options.max_iter; ++k) {
        PeriodicTrajectory next = prop.apply(apply_nemytskii(f, u, options.interpolate_delay));
        double diff = 0.0;
        for (int j = 0; j < steps; ++j)
            diff = std::max(diff, (next.values[static_cast<std::size_t>(j)] -
                                   u.values[static_cast<std::size_t>(j)])
                                      .cwiseAbs()
                                      .maxCoeff());
        if (options.observer) options.observer(k, next);

        const double sup = next.sup_norm();
        if (!std::isfinite(sup) || sup > options.divergence_threshold) {
            // diverged: report the last finite iterate with its known residual
            result.solution = std::move(u);
            result.iterations = k;
            result.residual = diff;
            result.positivity_violation = std::min(0.0, result.solution.min_entry());
            result.converged = false;
            return result;
        }

        if (diff <= options.tol) {
            // residual of the accepted iterate under one more application of Q
            PeriodicTrajectory qnext =
                prop.apply(apply_nemytskii(f, next, options.interpolate_delay));
            double residual = 0.0;
            for (int j = 0; j < steps; ++j)
                residual = std::max(residual, (qnext.values[static_cast<std::size_t>(j)] -
                                               next.values[static_cast<std::size_t>(j)])
                                                  .cwiseAbs()
                                                  .maxCoeff());
            result.solution = std::move(next);
            result.iterations = k;
            result.residual = residual;
            result.positivity_violation = std::min(0.0, result.solution.min_entry());
            result.converged = residual <= options.tol && result.positivity_violation >= -1e-10;
            return result;
        }
        u = std::move(next);
    }

    result.solution = std::move(u);
    result.iterations = options.max_iter;
    result.residual = std::numeric_limits<double>::quiet_NaN();
    // the stopping rule never fired; the last successive difference is the
    // honest residual of the previous iterate
    PeriodicTrajectory qlast = prop.apply(apply_nemytskii(f, result.solution, options.interpolate_delay));
    double residual = 0.0;
    for (int j = 0; j < steps; ++j)
        residual = std::max(residual, (qlast.values[static_cast<std::size_t>(j)] -
                                       result.solution.values[static_cast<std::size_t>(j)])
                                          .cwiseAbs()
                                          .maxCoeff());
    result.residual = residual;
    result.positivity_violation = std::min(0.0, result.solution.min_entry());
    result.converged = false;
    return result;
}

} // namespace perideval
