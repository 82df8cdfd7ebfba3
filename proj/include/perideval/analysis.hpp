#pragma once

#include <complex>
#include <optional>

#include "perideval/ivp.hpp"
#include "perideval/nonlinearity.hpp"
#include "perideval/operators.hpp"
#include "perideval/periodic.hpp"

namespace perideval {

enum class GapMode { H1, H2, H3 };

GapMode parse_gap_mode(const std::string& name);
std::string gap_mode_name(GapMode mode);

/// Spectral-gap hypothesis report.
///   H1/H2: satisfied iff c1 + c2 < |nu0|, margin = |nu0| - (c1 + c2).
///   H3:    satisfied iff c1 + c2 e^{|nu0| tau} < |nu0|; sigma is the
///          guaranteed decay rate |nu0| - (c1 + c2 e^{|nu0| tau}), present
///          iff satisfied.
struct GapReport {
    GapMode mode = GapMode::H1;
    double c1 = 0.0;
    double c2 = 0.0;
    double tau = 0.0;
    double nu0_abs = 0.0;
    double margin = 0.0;
    std::optional<double> sigma;
    bool satisfied = false;
};

GapReport check_spectral_gap(double c1, double c2, double tau, double nu0_abs, GapMode mode);

/// Randomized falsifier report. A falsifier never proves the inequality;
/// it only fails to falsify it over the sampled pairs.
struct CheckReport {
    int samples = 0;
    int violations = 0;
    double worst_violation = 0.0;
    bool passed = false;
};

/// Samples ordered pairs x1 <= x2, y1 <= y2 in [0, 10]^n and random
/// t in [0, omega), and records the worst componentwise violation of
///   F(t,x2,y2) - F(t,x1,y1) <= c1 (x2-x1) + c2 (y2-y1).
/// Deterministic for a fixed seed.
CheckReport check_order_condition(const NonlinearitySpec& f, double c1, double c2, int n_samples,
                                  std::uint64_t seed);

struct BellmanResult {
    Trajectory trajectory;   ///< the saturated phi on [0, t_end]
    bool bound_holds = false;
    double worst_margin = 0.0; ///< min over the grid of bound(t) - phi(t)
};

/// Integrates the saturated form of the delay integral inequality,
///   phi(t) = phi(0) + c1 int_0^t phi + c2 int_0^t phi(. - tau),
/// by predictor-corrector trapezoid stepping and checks
/// phi(t) <= ||phi||_{[-tau,0]} e^{(c1+c2) t} at every grid point
/// (1e-8 absolute plus 1e-7 relative slack for the quadrature).
BellmanResult bellman_bound(const HistorySegment& phi_history, double c1, double c2, double t_end,
                            double dt);

/// Closed-form periodic solution of the scalar linear delay mode
///   u' + lambda u = c1 u + c2 u(t - tau) + h(t)
/// synthesized from one-sided Fourier coefficients of h (index m = 0..K,
/// conjugate symmetry implied):  u_m = h_m / (i m W + lambda - c1 - c2
/// e^{-i m W tau}), W = 2 pi / omega. Raises ResonanceError when a
/// denominator vanishes (at m = 0 this is the C1 + C2 = lambda threshold).
PeriodicTrajectory fourier_periodic_oracle(double lambda, double c1, double c2, double tau,
                                           double omega,
                                           const std::vector<std::complex<double>>& forcing_coeffs,
                                           int steps);

/// Eigenmode-by-eigenmode application of the scalar oracle for affine
/// nonlinearities over self-adjoint generators: the forcing shape is
/// expanded in the orthonormal eigenbasis and each mode is solved in closed
/// form. This is the ground truth picard_solve is accepted against.
PeriodicTrajectory fourier_oracle_field(const Generator& gen, const NonlinearitySpec& f,
                                        double omega, int steps);

struct StabilityReport {
    double sigma_theory = 0.0;
    double measured_rate = 0.0; ///< min over histories of the fitted decay rate
    double fit_window_lo = 0.0;
    double fit_window_hi = 0.0;
    int histories_tested = 0;
    bool all_decayed = false;
    bool passing = false;
    bool divergence_failed = false;
    int failed_history = -1;
    std::vector<double> per_history_rates;
    std::vector<double> decay_times;              ///< shared time grid of the decay curves
    std::vector<std::vector<double>> decay_curves; ///< one sup-norm deviation curve per history
};

/// Runs solve_ivp for each history, measures d(t) = ||u(t) - u*(t mod omega)||_sup,
/// and fits the decay rate by least squares on log d over [t_end/2, t_end]
/// (points below 1e-12 are skipped). sigma must come from a satisfied H3 gap.
StabilityReport stability_report(const Generator& gen, const NonlinearitySpec& f,
                                 const PeriodicTrajectory& u_star,
                                 const std::vector<HistorySegment>& histories, double t_end,
                                 double dt, double sigma_theory);

/// Seeded smooth nonnegative histories used by the stability study.
std::vector<HistorySegment> random_nonneg_histories(int count, int dimension, double tau,
                                                    double dt, double scale, std::uint64_t seed);

} // namespace perideval
