#pragma once

#include <functional>
#include <optional>

#include "perideval/nonlinearity.hpp"
#include "perideval/operators.hpp"
#include "perideval/stepper.hpp"

namespace perideval {

/// A vector-valued omega-periodic grid function: values[j] is the value at
/// t_j = j * omega / steps, j = 0..steps-1. Delay lookups wrap modulo steps.
struct PeriodicTrajectory {
    double omega = 1.0;
    int steps = 0;
    std::vector<Vector> values;

    double dt() const { return omega / steps; }
    const Vector& at_wrapped(long j) const {
        long m = j % steps;
        if (m < 0) m += steps;
        return values[static_cast<std::size_t>(m)];
    }
    double sup_norm() const;
    double min_entry() const;
};

PeriodicTrajectory constant_trajectory(double omega, int steps, const Vector& value);

struct PeriodicSolveResult {
    PeriodicTrajectory solution;
    int iterations = 0;
    double residual = 0.0;            ///< sup norm of u - Qu on the grid
    double positivity_violation = 0.0; ///< most negative entry, clamped at 0 from above
    bool converged = false;
};

/// Nemytskii substitution on the grid: out_j = F(t_j, u(t_j), u(t_j - tau)).
/// tau must equal an integer number of grid steps unless interpolate_delay is
/// set, in which case the delayed value is read by periodic linear
/// interpolation.
PeriodicTrajectory apply_nemytskii(const NonlinearitySpec& f, const PeriodicTrajectory& u,
                                   bool interpolate_delay = false);

/// (I - T(omega))^{-1} by direct dense solve. Requires an exponentially
/// stable generator; raises SingularityError when the monodromy system is
/// numerically singular (condition estimate above 1e12).
Matrix monodromy_inverse(const Generator& gen, double omega);

struct NeumannSeries {
    Matrix sum;              ///< sum_{k=0}^{terms-1} T(k omega)
    double truncation_bound; ///< e^{nu0 terms omega} / (1 - e^{nu0 omega})
};

/// Partial sums of the Neumann series for (I - T(omega))^{-1}; retained as a
/// validation oracle for the direct solve.
NeumannSeries neumann_inverse(const Generator& gen, double omega, int terms);

/// The discrete periodic solution operator P: forcing trajectory -> the
/// unique periodic solution of u' + A u = h. One-step exponential-trapezoid
/// recursion closed by u_0 = (I - E^M)^{-1} (one-period convolution).
/// Built once per (generator, omega, steps) and reusable across forcings.
class PeriodicPropagator {
public:
    PeriodicPropagator(const Generator& gen, double omega, int steps);

    PeriodicTrajectory apply(const PeriodicTrajectory& forcing) const;
    const ExpStepper& stepper() const { return step_; }
    double omega() const { return omega_; }
    int steps() const { return steps_; }

private:
    double omega_;
    int steps_;
    ExpStepper step_;
    Eigen::PartialPivLU<Matrix> closure_; ///< LU of (I - E^M)
};

/// Linear periodic solve through a freshly built propagator.
PeriodicTrajectory periodic_linear_solve(const Generator& gen, const PeriodicTrajectory& forcing);

/// Power-iteration estimate of the spectral radius of the discretized P.
/// Stops when successive ratio estimates agree to 1e-8; raises
/// NumericalError after 10^4 iterations without stabilizing.
double spectral_radius_P(const Generator& gen, double omega, int steps);

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 10000;
    bool interpolate_delay = false;
    double divergence_threshold = 1e12; ///< bail out once the iterate sup-norm passes this
    std::function<void(int, const PeriodicTrajectory&)> observer; ///< called after each iterate
};

/// Picard iteration u <- P(F(u)) from u = 0. Non-convergence (iteration
/// budget exhausted or divergence threshold crossed) is reported through
/// converged = false, not an exception.
PeriodicSolveResult picard_solve(const Generator& gen, const NonlinearitySpec& f, double omega,
                                 int steps, const PicardOptions& options = {});

} // namespace perideval
