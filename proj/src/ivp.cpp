#include "perideval/ivp.hpp"

#include <cmath>
#include <limits>

#include "perideval/problems.hpp"
#include "perideval/stepper.hpp"

namespace perideval {

namespace {
constexpr double kDivergenceThreshold = 1e12;
}

double HistorySegment::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

double Trajectory::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

HistorySegment constant_history(double tau, int steps, const Vector& value) {
    HistorySegment h;
    h.tau = tau;
    h.steps = steps;
    h.values.assign(static_cast<std::size_t>(steps) + 1, value);
    return h;
}

namespace {

void validate_history(const HistorySegment& history, double dt, int dimension) {
    if (history.steps < 1) throw ValidationError("history needs at least one step");
    if (history.values.size() != static_cast<std::size_t>(history.steps) + 1)
        throw StructuralError("history stores " + std::to_string(history.values.size()) +
                              " samples, expected steps + 1 = " +
                              std::to_string(history.steps + 1));
    const double spacing = history.dt();
    if (std::abs(spacing - dt) > 1e-9 * std::max(1.0, dt))
        throw ConfigError("history grid spacing " + std::to_string(spacing) +
                          " does not equal the solver step " + std::to_string(dt));
    for (const auto& v : history.values) {
        if (v.size() != dimension)
            throw StructuralError("history sample size does not match the generator dimension");
        if (v.minCoeff() < -1e-10)
            throw ValidationError("history leaves the cone (min entry " +
                                  std::to_string(v.minCoeff()) + ")");
    }
}

} // namespace

Trajectory solve_ivp(const Generator& gen, const NonlinearitySpec& f, const HistorySegment& history,
                     double t_end, double dt) {
    if (dt <= 0.0) throw DomainError("dt must be positive");
    if (t_end <= 0.0) throw DomainError("t_end must be positive");
    const int d = delay_steps(f.delay_tau, dt);
    if (history.steps != d)
        throw ConfigError("history covers " + std::to_string(history.steps) +
                          " steps but tau/dt = " + std::to_string(d));
    validate_history(history, dt, gen.dimension());

    const long n_steps = std::lround(t_end / dt);
    if (n_steps < 1) throw DomainError("t_end must cover at least one step");

    const ExpStepper step = make_stepper(gen, dt);

    Trajectory traj;
    traj.t_start = 0.0;
    traj.dt = dt;
    traj.values.resize(static_cast<std::size_t>(n_steps) + 1);
    traj.values[0] = history.values.back(); // phi(0)

    // delayed state at t_j - tau: grid value for j >= d, history sample otherwise
    auto delayed = [&](long j) -> const Vector& {
        if (j >= d) return traj.values[static_cast<std::size_t>(j - d)];
        return history.values[static_cast<std::size_t>(j)];
    };

    for (long j = 0; j < n_steps; ++j) {
        const double t = j * dt;
        const Vector& uj = traj.values[static_cast<std::size_t>(j)];
        const Vector fj = nonlinearity_eval(f, t, uj, delayed(j));
        const Vector predictor = step.E * uj + step.Phi1 * fj;
        const Vector fnext = nonlinearity_eval(f, t + dt, predictor, delayed(j + 1));
        Vector next = step.E * uj + step.W1 * fj + step.W2 * fnext;
        const double sup = next.cwiseAbs().maxCoeff();
        if (!std::isfinite(sup) || sup > kDivergenceThreshold)
            throw DivergenceError("IVP diverged at t = " + std::to_string(t + dt) +
                                      " (sup norm " + std::to_string(sup) + ")",
                                  t);
        traj.values[static_cast<std::size_t>(j + 1)] = std::move(next);
    }
    return traj;
}

double mild_residual(const Generator& gen, const NonlinearitySpec& f, const Trajectory& traj,
                     const HistorySegment& history, const std::vector<double>& check_times) {
    if (check_times.empty()) return 0.0;
    const double dt = traj.dt;
    const long n_avail = static_cast<long>(traj.values.size()) - 1;
    const int d = delay_steps(f.delay_tau, dt);
    validate_history(history, dt, gen.dimension());

    long max_index = 0;
    std::vector<long> indices;
    indices.reserve(check_times.size());
    for (double t : check_times) {
        const long j = std::lround(t / dt);
        if (j < 0 || j > n_avail)
            throw DomainError("check time " + std::to_string(t) + " outside the trajectory span");
        indices.push_back(j);
        max_index = std::max(max_index, j);
    }

    // state at fractional grid position p (units of dt, negative = history)
    auto state_at = [&](double p) -> Vector {
        if (p >= 0.0) {
            const long i = std::min(static_cast<long>(std::floor(p)), n_avail - 1);
            const double theta = p - static_cast<double>(i);
            return (1.0 - theta) * traj.values[static_cast<std::size_t>(i)] +
                   theta * traj.values[static_cast<std::size_t>(i + 1)];
        }
        const double hp = p + static_cast<double>(d); // position in the history grid
        const long i = std::max(0L, std::min(static_cast<long>(std::floor(hp)),
                                             static_cast<long>(history.steps) - 1));
        const double theta = hp - static_cast<double>(i);
        return (1.0 - theta) * history.values[static_cast<std::size_t>(i)] +
               theta * history.values[static_cast<std::size_t>(i + 1)];
    };

    constexpr int kRefine = 4;
    const double hq = dt / kRefine;
    const ExpStepper fine = make_stepper(gen, hq);
    const double delay_in_steps = f.delay_tau / dt;

    auto integrand = [&](long q) {
        const double p = static_cast<double>(q) / kRefine;
        return nonlinearity_eval(f, p * dt, state_at(p), state_at(p - delay_in_steps));
    };

    double worst = 0.0;
    Vector integral = Vector::Zero(gen.dimension());
    Vector f_prev = integrand(0);
    for (long q = 0; q < max_index * kRefine; ++q) {
        Vector f_next = integrand(q + 1);
        integral = fine.E * integral + fine.W1 * f_prev + fine.W2 * f_next;
        f_prev = std::move(f_next);
        const long reached = q + 1;
        if (reached % kRefine == 0) {
            const long j = reached / kRefine;
            for (std::size_t c = 0; c < indices.size(); ++c) {
                if (indices[c] != j) continue;
                const double t = j * dt;
                Vector defect = traj.values[static_cast<std::size_t>(j)] -
                                semigroup_apply(gen, t, traj.values[0]) - integral;
                worst = std::max(worst, defect.cwiseAbs().maxCoeff());
            }
        }
    }
    // a check time of zero degenerates to u(0) - u(0)
    for (long idx : indices)
        if (idx == 0) worst = std::max(worst, 0.0);
    return worst;
}

} // namespace perideval
