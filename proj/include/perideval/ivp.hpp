#pragma once

#include "perideval/nonlinearity.hpp"
#include "perideval/operators.hpp"
#include "perideval/periodic.hpp"

namespace perideval {

/// Initial history phi on [-tau, 0]: values[k] = phi(-tau + k tau/steps),
/// k = 0..steps, all entrywise nonnegative. The grid spacing tau/steps must
/// match the solver step at solve time.
struct HistorySegment {
    double tau = 1.0;
    int steps = 0;
    std::vector<Vector> values; ///< steps + 1 samples, oldest first

    double dt() const { return tau / steps; }
    const Vector& at_offset(int k) const { return values[static_cast<std::size_t>(k)]; }
    double sup_norm() const;
};

HistorySegment constant_history(double tau, int steps, const Vector& value);

struct Trajectory {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<Vector> values;

    double time_at(std::size_t j) const { return t_start + static_cast<double>(j) * dt; }
    double sup_norm() const;
};

/// Mild solution of the delay initial value problem by the exponential
/// method of steps: exponential-Euler predictor for the endpoint
/// nonlinearity, exponential-trapezoid correction. The delayed argument is
/// read from the history for t - tau < 0 and from computed grid values
/// otherwise; tau/dt must be an integer. Raises DivergenceError when the
/// state passes 1e12 in sup norm or turns non-finite.
Trajectory solve_ivp(const Generator& gen, const NonlinearitySpec& f, const HistorySegment& history,
                     double t_end, double dt);

/// A posteriori defect of the mild-solution identity
///   u(t) = T(t) u(0) + integral_0^t T(t-s) F(s, u(s), u(s-tau)) ds
/// evaluated on a 4x refined exponential-trapezoid quadrature grid with the
/// state linearly interpolated between stored values. Returns the maximum
/// defect over the check times.
double mild_residual(const Generator& gen, const NonlinearitySpec& f, const Trajectory& traj,
                     const HistorySegment& history, const std::vector<double>& check_times);

} // namespace perideval
