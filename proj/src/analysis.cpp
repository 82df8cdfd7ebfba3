#include "perideval/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perideval/problems.hpp"
#include "perideval/rng.hpp"

namespace perideval {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

GapMode parse_gap_mode(const std::string& name) {
    if (name == "H1") return GapMode::H1;
    if (name == "H2") return GapMode::H2;
    if (name == "H3") return GapMode::H3;
    throw ValidationError("unknown hypothesis mode '" + name + "' (expected H1, H2 or H3)");
}

std::string gap_mode_name(GapMode mode) {
    switch (mode) {
        case GapMode::H1: return "H1";
        case GapMode::H2: return "H2";
        case GapMode::H3: return "H3";
    }
    return "?";
}

GapReport check_spectral_gap(double c1, double c2, double tau, double nu0_abs, GapMode mode) {
    if (c1 < 0.0 || c2 < 0.0) throw ValidationError("hypothesis constants must be nonnegative");
    if (nu0_abs <= 0.0)
        throw ValidationError("nu0_abs must be positive (exponentially stable generator)");
    if (mode == GapMode::H3 && tau <= 0.0) throw ValidationError("H3 requires tau > 0");

    GapReport report;
    report.mode = mode;
    report.c1 = c1;
    report.c2 = c2;
    report.tau = tau;
    report.nu0_abs = nu0_abs;
    if (mode == GapMode::H3) {
        const double effective = c1 + c2 * std::exp(nu0_abs * tau);
        report.margin = nu0_abs - effective;
        report.satisfied = effective < nu0_abs;
        if (report.satisfied) report.sigma = report.margin;
    } else {
        report.margin = nu0_abs - (c1 + c2);
        report.satisfied = (c1 + c2) < nu0_abs;
    }
    return report;
}

CheckReport check_order_condition(const NonlinearitySpec& f, double c1, double c2, int n_samples,
                                  std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    const int n = f.dimension();
    constexpr double kRange = 10.0;
    constexpr double kSlack = 1e-12;
    Rng rng(seed);

    CheckReport report;
    report.samples = n_samples;
    double worst = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const double t = rng.uniform(0.0, f.forcing.omega);
        Vector x1(n), x2(n), y1(n), y2(n);
        for (int i = 0; i < n; ++i) {
            const double a = rng.uniform(0.0, kRange);
            const double b = rng.uniform(0.0, kRange);
            x1[i] = std::min(a, b);
            x2[i] = std::max(a, b);
            const double c = rng.uniform(0.0, kRange);
            const double d = rng.uniform(0.0, kRange);
            y1[i] = std::min(c, d);
            y2[i] = std::max(c, d);
        }
        const Vector lhs = nonlinearity_eval(f, t, x2, y2) - nonlinearity_eval(f, t, x1, y1);
        const Vector rhs = c1 * (x2 - x1) + c2 * (y2 - y1);
        const double excess = (lhs - rhs).maxCoeff();
        if (excess > kSlack) ++report.violations;
        worst = std::max(worst, excess);
    }
    report.worst_violation = std::max(0.0, worst);
    report.passed = report.violations == 0;
    return report;
}

BellmanResult bellman_bound(const HistorySegment& phi_history, double c1, double c2, double t_end,
                            double dt) {
    if (c1 < 0.0 || c2 < 0.0) throw ValidationError("Bellman constants must be nonnegative");
    if (dt <= 0.0 || t_end <= 0.0) throw DomainError("t_end and dt must be positive");
    for (const auto& v : phi_history.values) {
        if (v.size() != 1) throw StructuralError("bellman_bound expects a scalar history");
        if (v[0] < 0.0) throw ValidationError("Bellman history must be nonnegative");
    }
    const int d = delay_steps(phi_history.tau, dt);
    if (phi_history.steps != d)
        throw ConfigError("history covers " + std::to_string(phi_history.steps) +
                          " steps but tau/dt = " + std::to_string(d));

    const long n_steps = std::lround(t_end / dt);
    std::vector<double> phi(static_cast<std::size_t>(n_steps) + 1);
    phi[0] = phi_history.values.back()[0];
    double sup0 = 0.0;
    for (const auto& v : phi_history.values) sup0 = std::max(sup0, v[0]);

    auto delayed = [&](long j) -> double {
        if (j >= d) return phi[static_cast<std::size_t>(j - d)];
        return phi_history.values[static_cast<std::size_t>(j)][0];
    };

    // predictor-corrector trapezoid on the saturated equation
    // phi' = c1 phi + c2 phi(. - tau)
    for (long j = 0; j < n_steps; ++j) {
        const double fj = c1 * phi[static_cast<std::size_t>(j)] + c2 * delayed(j);
        const double predictor = phi[static_cast<std::size_t>(j)] + dt * fj;
        const double fnext = c1 * predictor + c2 * delayed(j + 1);
        phi[static_cast<std::size_t>(j + 1)] =
            phi[static_cast<std::size_t>(j)] + 0.5 * dt * (fj + fnext);
    }

    BellmanResult result;
    result.trajectory.t_start = 0.0;
    result.trajectory.dt = dt;
    result.trajectory.values.reserve(phi.size());
    result.bound_holds = true;
    result.worst_margin = std::numeric_limits<double>::infinity();
    for (long j = 0; j <= n_steps; ++j) {
        const double value = phi[static_cast<std::size_t>(j)];
        const double bound = sup0 * std::exp((c1 + c2) * j * dt);
        result.worst_margin = std::min(result.worst_margin, bound - value);
        if (value > bound + 1e-8 + 1e-7 * bound) result.bound_holds = false;
        Vector v(1);
        v[0] = value;
        result.trajectory.values.push_back(std::move(v));
    }
    return result;
}

PeriodicTrajectory fourier_periodic_oracle(double lambda, double c1, double c2, double tau,
                                           double omega,
                                           const std::vector<std::complex<double>>& forcing_coeffs,
                                           int steps) {
    if (omega <= 0.0) throw DomainError("omega must be positive");
    if (steps < 1) throw DomainError("steps must be >= 1");
    const double big_omega = kTwoPi / omega;
    const std::complex<double> i_unit(0.0, 1.0);

    std::vector<std::complex<double>> u_coeffs(forcing_coeffs.size());
    for (std::size_t m = 0; m < forcing_coeffs.size(); ++m) {
        const double mw = static_cast<double>(m) * big_omega;
        const std::complex<double> denom =
            i_unit * mw + lambda - c1 - c2 * std::exp(-i_unit * mw * tau);
        const double scale = std::abs(lambda) + c1 + c2 + mw + 1.0;
        if (std::abs(denom) <= 1e-12 * scale)
            throw ResonanceError("characteristic denominator vanishes at Fourier mode m=" +
                                     std::to_string(m) + " (lambda=" + std::to_string(lambda) +
                                     ", C1+C2 e^{-imΩτ} cancels lambda)",
                                 static_cast<int>(m));
        u_coeffs[m] = forcing_coeffs[m] / denom;
    }

    PeriodicTrajectory u;
    u.omega = omega;
    u.steps = steps;
    u.values.reserve(static_cast<std::size_t>(steps));
    const double dt = omega / steps;
    for (int j = 0; j < steps; ++j) {
        const double t = j * dt;
        double value = u_coeffs.empty() ? 0.0 : u_coeffs[0].real();
        for (std::size_t m = 1; m < u_coeffs.size(); ++m)
            value += 2.0 * (u_coeffs[m] * std::exp(i_unit * (static_cast<double>(m) * big_omega * t)))
                               .real();
        Vector v(1);
        v[0] = value;
        u.values.push_back(std::move(v));
    }
    return u;
}

PeriodicTrajectory fourier_oracle_field(const Generator& gen, const NonlinearitySpec& f,
                                        double omega, int steps) {
    if (f.kind != NonlinearityKind::affine)
        throw ValidationError("the Fourier oracle covers affine nonlinearities only");
    if (!gen.self_adjoint())
        throw ValidationError("the Fourier oracle requires a self-adjoint generator");
    if (f.dimension() != gen.dimension())
        throw StructuralError("forcing shape does not match the generator dimension");

    const auto* sym = gen.symmetric_eigen();
    const Vector mode_weights = sym->vectors.transpose() * f.forcing.shape;
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> h1 =
        -0.5 * i_unit * f.forcing.b * std::exp(i_unit * f.forcing.phase);

    PeriodicTrajectory u = constant_trajectory(omega, steps, Vector::Zero(gen.dimension()));
    for (int mode = 0; mode < gen.dimension(); ++mode) {
        const double lambda = sym->values[mode];
        const double weight = mode_weights[mode];
        std::vector<std::complex<double>> coeffs = {
            std::complex<double>(f.forcing.a * weight, 0.0), h1 * weight};
        PeriodicTrajectory scalar =
            fourier_periodic_oracle(lambda, f.c1, f.c2, f.delay_tau, omega, coeffs, steps);
        for (int j = 0; j < steps; ++j)
            u.values[static_cast<std::size_t>(j)] +=
                scalar.values[static_cast<std::size_t>(j)][0] * sym->vectors.col(mode);
    }
    return u;
}

namespace {

// periodic linear interpolation of u* at an arbitrary time
Vector periodic_value_at(const PeriodicTrajectory& u, double t) {
    const double dt = u.dt();
    double r = std::fmod(t, u.omega);
    if (r < 0.0) r += u.omega;
    const double p = r / dt;
    const long i0 = static_cast<long>(std::floor(p));
    const double theta = p - static_cast<double>(i0);
    if (theta == 0.0) return u.at_wrapped(i0);
    return (1.0 - theta) * u.at_wrapped(i0) + theta * u.at_wrapped(i0 + 1);
}

double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& dev, double lo,
                      double hi) {
    // least squares on log d over [lo, hi], skipping sub-1e-12 points
    auto slope_over = [&](double a, double b) -> std::optional<double> {
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
        long count = 0;
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] < a || times[j] > b) continue;
            if (dev[j] <= 1e-12) continue;
            const double y = std::log(dev[j]);
            st += times[j];
            sy += y;
            stt += times[j] * times[j];
            sty += times[j] * y;
            ++count;
        }
        if (count < 2) return std::nullopt;
        const double denom = count * stt - st * st;
        if (denom == 0.0) return std::nullopt;
        return (count * sty - st * sy) / denom;
    };
    if (auto s = slope_over(lo, hi)) return -*s;
    // everything in the window already sat below the noise floor; fall back
    // to the full span, which then necessarily has usable early points
    if (auto s = slope_over(times.front(), hi)) return -*s;
    return 0.0;
}

} // namespace

StabilityReport stability_report(const Generator& gen, const NonlinearitySpec& f,
                                 const PeriodicTrajectory& u_star,
                                 const std::vector<HistorySegment>& histories, double t_end,
                                 double dt, double sigma_theory) {
    StabilityReport report;
    report.sigma_theory = sigma_theory;
    report.fit_window_lo = t_end / 2.0;
    report.fit_window_hi = t_end;
    report.histories_tested = static_cast<int>(histories.size());
    report.all_decayed = true;

    const long n_steps = std::lround(t_end / dt);
    report.decay_times.resize(static_cast<std::size_t>(n_steps) + 1);
    for (long j = 0; j <= n_steps; ++j) report.decay_times[static_cast<std::size_t>(j)] = j * dt;

    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < histories.size(); ++h) {
        Trajectory traj;
        try {
            traj = solve_ivp(gen, f, histories[h], t_end, dt);
        } catch (const DivergenceError&) {
            report.divergence_failed = true;
            report.failed_history = static_cast<int>(h);
            report.all_decayed = false;
            report.per_history_rates.push_back(0.0);
            report.decay_curves.emplace_back();
            continue;
        }

        std::vector<double> dev(traj.values.size());
        for (std::size_t j = 0; j < traj.values.size(); ++j) {
            const double t = traj.time_at(j);
            dev[j] = (traj.values[j] - periodic_value_at(u_star, t)).cwiseAbs().maxCoeff();
        }

        // initial deviation over the whole history segment (the C(phi) analog)
        double initial = 0.0;
        const HistorySegment& hist = histories[h];
        for (int k = 0; k <= hist.steps; ++k) {
            const double s = -hist.tau + k * hist.dt();
            initial = std::max(initial, (hist.values[static_cast<std::size_t>(k)] -
                                         periodic_value_at(u_star, s))
                                            .cwiseAbs()
                                            .maxCoeff());
        }
        if (!(dev.back() < initial * 1e-3)) report.all_decayed = false;

        const double rate =
            fit_decay_rate(report.decay_times, dev, report.fit_window_lo, report.fit_window_hi);
        report.per_history_rates.push_back(rate);
        min_rate = std::min(min_rate, rate);
        report.decay_curves.push_back(std::move(dev));
    }

    report.measured_rate = std::isfinite(min_rate) ? min_rate : 0.0;
    report.passing =
        !report.divergence_failed && report.all_decayed && report.measured_rate >= 0.9 * sigma_theory;
    return report;
}

std::vector<HistorySegment> random_nonneg_histories(int count, int dimension, double tau, double dt,
                                                    double scale, std::uint64_t seed) {
    const int steps = delay_steps(tau, dt);
    Rng rng(seed);
    std::vector<HistorySegment> histories;
    histories.reserve(static_cast<std::size_t>(count));
    for (int h = 0; h < count; ++h) {
        Vector weights(dimension);
        for (int i = 0; i < dimension; ++i) weights[i] = rng.uniform(0.2, 1.0);
        const double level = rng.uniform(0.25, 1.0) * scale;
        const double wobble = level * rng.unit();
        const double theta = rng.uniform(0.0, kTwoPi);

        HistorySegment seg;
        seg.tau = tau;
        seg.steps = steps;
        seg.values.reserve(static_cast<std::size_t>(steps) + 1);
        for (int k = 0; k <= steps; ++k) {
            const double s = -tau + k * dt;
            const double profile = level + wobble * std::sin(kTwoPi * s / (2.0 * tau) + theta);
            seg.values.push_back(profile * weights);
        }
        histories.push_back(std::move(seg));
    }
    return histories;
}

} // namespace perideval
