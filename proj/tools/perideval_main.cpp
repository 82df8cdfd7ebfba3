// Command-line surface: spectra, periodic solves, delay IVPs, hypothesis
// checks, Gronwall oracles, and stability studies driven by flat key=value
// configuration files. All outputs are deterministic for identical
// invocations: CSV with 17 significant digits and LF endings, JSON with
// stable key ordering.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "perideval/analysis.hpp"
#include "perideval/ivp.hpp"
#include "perideval/periodic.hpp"
#include "perideval/problems.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace perideval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Output {
    fs::path dir;

    explicit Output(const std::string& flag_value) {
        const char* env = std::getenv("PERIDEVAL_OUT");
        dir = (env && *env) ? fs::path(env) : fs::path(flag_value);
        fs::create_directories(dir);
    }

    fs::path write_json(const std::string& name, const json& doc) const {
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary);
        out << doc.dump(2) << "\n";
        std::cout << "wrote " << path.string() << "\n";
        return path;
    }

    std::ofstream open_csv(const std::string& name, fs::path& path_out) const {
        path_out = dir / name;
        return std::ofstream(path_out, std::ios::binary);
    }
};

void write_trajectory_csv(const Output& out, const std::string& name,
                          const std::vector<double>& times, const std::vector<Vector>& values) {
    fs::path path;
    auto csv = out.open_csv(name, path);
    const int n = values.empty() ? 0 : static_cast<int>(values.front().size());
    csv << "t";
    for (int i = 1; i <= n; ++i) csv << ",u_" << i;
    csv << "\n";
    for (std::size_t j = 0; j < values.size(); ++j) {
        csv << format_full(times[j]);
        for (int i = 0; i < n; ++i) csv << "," << format_full(values[j][i]);
        csv << "\n";
    }
    std::cout << "wrote " << path.string() << "\n";
}

json gap_to_json(const GapReport& gap) {
    json j;
    j["mode"] = gap_mode_name(gap.mode);
    j["C1"] = gap.c1;
    j["C2"] = gap.c2;
    j["tau"] = gap.tau;
    j["nu0_abs"] = gap.nu0_abs;
    j["margin"] = gap.margin;
    if (gap.sigma)
        j["sigma"] = *gap.sigma;
    else
        j["sigma"] = nullptr;
    j["satisfied"] = gap.satisfied;
    return j;
}

double resolve_dt(const std::optional<double>& flag, const ProblemSpec& spec) {
    return flag ? *flag : spec.omega / spec.steps_M;
}

int cmd_spectrum(const std::string& config, const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    const SpectrumInfo info = spectrum(problem.generator);
    const double m = empirical_growth_constant(problem.generator, 10.0 * problem.spec.omega);

    json j;
    j["command"] = "spectrum";
    j["label"] = problem.spec.label;
    j["lambda1"] = info.lambda1;
    j["nu0"] = info.nu0;
    j["exp_stable"] = info.exp_stable;
    j["empirical_M"] = m;
    json evs = json::array();
    for (const auto& ev : info.eigenvalues) evs.push_back({ev.real(), ev.imag()});
    j["eigenvalues"] = evs;
    out.write_json("spectrum.json", j);

    std::cout << "lambda1 = " << format_full(info.lambda1) << ", nu0 = " << format_full(info.nu0)
              << ", exp_stable = " << (info.exp_stable ? "true" : "false")
              << ", empirical M = " << format_full(m) << "\n";
    return kExitOk;
}

int cmd_periodic(const std::string& config, double tol, int max_iter, const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    PicardOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.interpolate_delay = problem.spec.interpolate_delay;
    const PeriodicSolveResult result =
        picard_solve(problem.generator, problem.nonlinearity, problem.spec.omega,
                     problem.spec.steps_M, options);

    std::vector<double> times(result.solution.values.size());
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = j * result.solution.dt();
    write_trajectory_csv(out, "periodic.csv", times, result.solution.values);

    json j;
    j["command"] = "periodic";
    j["label"] = problem.spec.label;
    j["steps_M"] = problem.spec.steps_M;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["iterations"] = result.iterations;
    j["residual"] = result.residual;
    j["positivity_violation"] = result.positivity_violation;
    j["converged"] = result.converged;
    out.write_json("periodic.json", j);

    std::cout << (result.converged ? "converged" : "did NOT converge") << " after "
              << result.iterations << " iterations, residual " << format_full(result.residual)
              << "\n";
    return result.converged ? kExitOk : kExitCheckFailed;
}

HistorySegment build_history(const Problem& problem, const std::string& kind, double dt, double tol,
                             int max_iter) {
    const int n = problem.generator.dimension();
    const double tau = problem.spec.tau;
    const int steps = delay_steps(tau, dt);
    if (kind == "zero") return constant_history(tau, steps, Vector::Zero(n));
    if (kind.rfind("constant:", 0) == 0) {
        double level = 0.0;
        try {
            level = std::stod(kind.substr(9));
        } catch (const std::exception&) {
            throw ConfigError("malformed history '" + kind + "', expected constant:<value>");
        }
        if (level < 0.0) throw ValidationError("constant history level must be nonnegative");
        return constant_history(tau, steps, Vector::Constant(n, level));
    }
    if (kind == "orbit") {
        PicardOptions options;
        options.tol = tol;
        options.max_iter = max_iter;
        options.interpolate_delay = problem.spec.interpolate_delay;
        const PeriodicSolveResult star = picard_solve(problem.generator, problem.nonlinearity,
                                                      problem.spec.omega, problem.spec.steps_M,
                                                      options);
        if (!star.converged)
            throw NumericalError("orbit history requested but the periodic solve did not converge");
        HistorySegment h;
        h.tau = tau;
        h.steps = steps;
        h.values.reserve(static_cast<std::size_t>(steps) + 1);
        const double mdt = star.solution.dt();
        for (int k = 0; k <= steps; ++k) {
            const double s = -tau + k * dt;
            double r = std::fmod(s, problem.spec.omega);
            if (r < 0.0) r += problem.spec.omega;
            const double p = r / mdt;
            const long i0 = static_cast<long>(std::floor(p));
            const double theta = p - static_cast<double>(i0);
            h.values.push_back((1.0 - theta) * star.solution.at_wrapped(i0) +
                               theta * star.solution.at_wrapped(i0 + 1));
        }
        return h;
    }
    throw ConfigError("unknown history kind '" + kind + "' (expected zero, constant:<c>, orbit)");
}

int cmd_ivp(const std::string& config, const std::string& history_kind,
            const std::optional<double>& t_end_flag, const std::optional<double>& dt_flag,
            double tol, int max_iter, const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    const double dt = resolve_dt(dt_flag, problem.spec);
    const double t_end = t_end_flag ? *t_end_flag : 5.0 * problem.spec.omega;

    const HistorySegment history = build_history(problem, history_kind, dt, tol, max_iter);
    const Trajectory traj = solve_ivp(problem.generator, problem.nonlinearity, history, t_end, dt);

    std::vector<double> times(traj.values.size());
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = traj.time_at(j);
    write_trajectory_csv(out, "trajectory.csv", times, traj.values);

    const std::vector<double> check_times = {t_end / 4.0, t_end / 2.0, t_end};
    const double residual =
        mild_residual(problem.generator, problem.nonlinearity, traj, history, check_times);

    json j;
    j["command"] = "ivp";
    j["label"] = problem.spec.label;
    j["history"] = history_kind;
    j["t_end"] = t_end;
    j["dt"] = dt;
    j["mild_residual"] = residual;
    j["final_sup_norm"] = traj.values.back().cwiseAbs().maxCoeff();
    out.write_json("ivp.json", j);

    std::cout << "integrated to t = " << format_full(t_end) << ", mild residual "
              << format_full(residual) << "\n";
    return kExitOk;
}

int cmd_check(const std::string& config, const std::string& mode_name, int samples,
              const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    const GapMode mode = parse_gap_mode(mode_name);
    const SpectrumInfo info = spectrum(problem.generator);
    const GapReport gap =
        check_spectral_gap(problem.spec.c1, problem.spec.c2, problem.spec.tau, info.lambda1, mode);
    const CheckReport order = check_order_condition(problem.nonlinearity, problem.spec.c1,
                                                    problem.spec.c2, samples, problem.spec.seed);

    json j;
    j["command"] = "check";
    j["label"] = problem.spec.label;
    j["gap"] = gap_to_json(gap);
    json jo;
    jo["samples"] = order.samples;
    jo["violations"] = order.violations;
    jo["worst_violation"] = order.worst_violation;
    jo["passed"] = order.passed;
    jo["note"] = "randomized falsifier: inability to falsify is not a proof";
    j["order"] = jo;
    j["seed"] = problem.spec.seed;
    out.write_json("check.json", j);

    std::cout << gap_mode_name(mode) << (gap.satisfied ? " satisfied" : " NOT satisfied")
              << ", margin " << format_full(gap.margin) << "; order condition "
              << (order.passed ? "passed" : "FAILED") << " over " << order.samples << " samples\n";
    return (gap.satisfied && order.passed) ? kExitOk : kExitCheckFailed;
}

int cmd_stability(const std::string& config, int histories, const std::optional<double>& t_end_flag,
                  const std::optional<double>& dt_flag, double tol, int max_iter,
                  const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    const double dt = resolve_dt(dt_flag, problem.spec);
    const double t_end = t_end_flag ? *t_end_flag : 40.0;

    const SpectrumInfo info = spectrum(problem.generator);
    const GapReport gap = check_spectral_gap(problem.spec.c1, problem.spec.c2, problem.spec.tau,
                                             info.lambda1, GapMode::H3);
    if (!gap.satisfied)
        throw ValidationError("stability study requires the H3 gap; margin = " +
                              std::to_string(gap.margin));

    PicardOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.interpolate_delay = problem.spec.interpolate_delay;
    const PeriodicSolveResult star = picard_solve(problem.generator, problem.nonlinearity,
                                                  problem.spec.omega, problem.spec.steps_M, options);
    if (!star.converged) {
        std::cout << "periodic solve did not converge; stability study aborted\n";
        return kExitCheckFailed;
    }

    const double scale = std::max(1.0, star.solution.sup_norm());
    const std::vector<HistorySegment> segments = random_nonneg_histories(
        histories, problem.generator.dimension(), problem.spec.tau, dt, scale, problem.spec.seed);
    const StabilityReport report = stability_report(problem.generator, problem.nonlinearity,
                                                    star.solution, segments, t_end, dt, *gap.sigma);

    // decay curves, thinned to at most ~4000 rows
    fs::path decay_path;
    auto csv = out.open_csv("decay.csv", decay_path);
    csv << "t";
    for (int h = 1; h <= report.histories_tested; ++h) csv << ",d_" << h;
    csv << "\n";
    const std::size_t rows = report.decay_times.size();
    const std::size_t stride = std::max<std::size_t>(1, rows / 4000);
    for (std::size_t j = 0; j < rows; j += stride) {
        csv << format_full(report.decay_times[j]);
        for (const auto& curve : report.decay_curves)
            csv << "," << (j < curve.size() ? format_full(curve[j]) : "nan");
        csv << "\n";
    }
    std::cout << "wrote " << decay_path.string() << "\n";

    json j;
    j["command"] = "stability";
    j["label"] = problem.spec.label;
    j["sigma_theory"] = report.sigma_theory;
    j["measured_rate"] = report.measured_rate;
    j["rate_floor"] = 0.9 * report.sigma_theory;
    j["per_history_rates"] = report.per_history_rates;
    j["fit_window"] = {report.fit_window_lo, report.fit_window_hi};
    j["histories"] = report.histories_tested;
    j["all_decayed"] = report.all_decayed;
    j["divergence_failed"] = report.divergence_failed;
    j["failed_history"] = report.failed_history;
    j["t_end"] = t_end;
    j["dt"] = dt;
    j["seed"] = problem.spec.seed;
    j["passed"] = report.passing;
    out.write_json("stability.json", j);

    std::cout << "sigma_theory = " << format_full(report.sigma_theory) << ", measured_rate = "
              << format_full(report.measured_rate) << ", all_decayed = "
              << (report.all_decayed ? "true" : "false") << "\n";
    return report.passing ? kExitOk : kExitCheckFailed;
}

int cmd_gronwall(double c1, double c2, double tau, double t_end, double dt, const Output& out) {
    const int steps = delay_steps(tau, dt);
    const HistorySegment history = constant_history(tau, steps, Vector::Ones(1));
    const BellmanResult result = bellman_bound(history, c1, c2, t_end, dt);

    fs::path path;
    auto csv = out.open_csv("gronwall.csv", path);
    csv << "t,phi,bound,margin\n";
    for (std::size_t j = 0; j < result.trajectory.values.size(); ++j) {
        const double t = result.trajectory.time_at(j);
        const double phi = result.trajectory.values[j][0];
        const double bound = std::exp((c1 + c2) * t);
        csv << format_full(t) << "," << format_full(phi) << "," << format_full(bound) << ","
            << format_full(bound - phi) << "\n";
    }
    std::cout << "wrote " << path.string() << "\n";

    std::cout << "bound " << (result.bound_holds ? "holds" : "VIOLATED") << ", worst margin "
              << format_full(result.worst_margin) << "\n";
    return result.bound_holds ? kExitOk : kExitCheckFailed;
}

int cmd_oracle(const std::string& config, double tol, int max_iter, const Output& out) {
    Problem problem = assemble(load_problem_file(config));
    const PeriodicTrajectory oracle = fourier_oracle_field(
        problem.generator, problem.nonlinearity, problem.spec.omega, problem.spec.steps_M);

    PicardOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.interpolate_delay = problem.spec.interpolate_delay;
    const PeriodicSolveResult solved = picard_solve(problem.generator, problem.nonlinearity,
                                                    problem.spec.omega, problem.spec.steps_M,
                                                    options);
    if (!solved.converged) {
        std::cout << "picard_solve did not converge; oracle comparison failed\n";
        return kExitCheckFailed;
    }

    double err = 0.0;
    for (int j = 0; j < problem.spec.steps_M; ++j)
        err = std::max(err, (solved.solution.values[static_cast<std::size_t>(j)] -
                             oracle.values[static_cast<std::size_t>(j)])
                                .cwiseAbs()
                                .maxCoeff());
    const double scale = oracle.sup_norm();
    const double rel = scale > 0.0 ? err / scale : err;
    constexpr double kThreshold = 1e-4;

    json j;
    j["command"] = "oracle";
    j["label"] = problem.spec.label;
    j["steps_M"] = problem.spec.steps_M;
    j["rel_discrepancy"] = rel;
    j["threshold"] = kThreshold;
    j["passed"] = rel <= kThreshold;
    out.write_json("oracle.json", j);

    std::cout << "relative sup-norm discrepancy " << format_full(rel) << " (threshold "
              << format_full(kThreshold) << ")\n";
    return rel <= kThreshold ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perideval: positive periodic solutions of delay evolution equations"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = "./out";
    double tol = 1e-10;
    int max_iter = 10000;
    std::optional<double> t_end;
    std::optional<double> dt;
    int histories = 8;
    std::string mode = "H2";
    int samples = 10000;
    std::string history_kind = "zero";
    double gc1 = 0.0, gc2 = 0.0, gtau = 1.0;
    double gt_end = 10.0, gdt = 1e-3;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config, "problem configuration file");
        if (needs_config) opt->required();
        cmd->add_option("--out-dir", out_dir, "output directory (env PERIDEVAL_OUT overrides)");
    };

    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues, lambda1, nu0, empirical M");
    add_common(spectrum_cmd, true);

    auto* periodic_cmd = app.add_subcommand("periodic", "Picard solve for the periodic solution");
    add_common(periodic_cmd, true);
    periodic_cmd->add_option("--tol", tol, "successive-difference tolerance");
    periodic_cmd->add_option("--max-iter", max_iter, "iteration budget");

    auto* ivp_cmd = app.add_subcommand("ivp", "delay initial value problem");
    add_common(ivp_cmd, true);
    ivp_cmd->add_option("--history", history_kind, "zero | constant:<c> | orbit");
    ivp_cmd->add_option("--t-end", t_end, "final time (default 5*omega)");
    ivp_cmd->add_option("--dt", dt, "step size (default omega/steps_M)");
    ivp_cmd->add_option("--tol", tol, "tolerance for the orbit history solve");
    ivp_cmd->add_option("--max-iter", max_iter, "iteration budget for the orbit history solve");

    auto* check_cmd = app.add_subcommand("check", "hypothesis gap and order-condition falsifier");
    add_common(check_cmd, true);
    check_cmd->add_option("--mode", mode, "H1 | H2 | H3");
    check_cmd->add_option("--samples", samples, "falsifier sample count");

    auto* stability_cmd =
        app.add_subcommand("stability", "decay-rate study against the periodic orbit");
    add_common(stability_cmd, true);
    stability_cmd->add_option("--histories", histories, "number of random histories");
    stability_cmd->add_option("--t-end", t_end, "final time (default 40)");
    stability_cmd->add_option("--dt", dt, "step size (default omega/steps_M)");
    stability_cmd->add_option("--tol", tol, "periodic solve tolerance");
    stability_cmd->add_option("--max-iter", max_iter, "periodic solve iteration budget");

    auto* gronwall_cmd = app.add_subcommand("gronwall", "saturated Bellman delay inequality");
    add_common(gronwall_cmd, false);
    gronwall_cmd->add_option("--c1", gc1, "coefficient of the undelayed integral")->required();
    gronwall_cmd->add_option("--c2", gc2, "coefficient of the delayed integral")->required();
    gronwall_cmd->add_option("--tau", gtau, "delay");
    gronwall_cmd->add_option("--t-end", gt_end, "final time");
    gronwall_cmd->add_option("--dt", gdt, "step size");

    auto* oracle_cmd =
        app.add_subcommand("oracle", "Fourier oracle vs picard_solve on affine configs");
    add_common(oracle_cmd, true);
    oracle_cmd->add_option("--tol", tol, "periodic solve tolerance");
    oracle_cmd->add_option("--max-iter", max_iter, "periodic solve iteration budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        Output out(out_dir);
        if (spectrum_cmd->parsed()) return cmd_spectrum(config, out);
        if (periodic_cmd->parsed()) return cmd_periodic(config, tol, max_iter, out);
        if (ivp_cmd->parsed()) return cmd_ivp(config, history_kind, t_end, dt, tol, max_iter, out);
        if (check_cmd->parsed()) return cmd_check(config, mode, samples, out);
        if (stability_cmd->parsed())
            return cmd_stability(config, histories, t_end, dt, tol, max_iter, out);
        if (gronwall_cmd->parsed()) return cmd_gronwall(gc1, gc2, gtau, gt_end, gdt, out);
        if (oracle_cmd->parsed()) return cmd_oracle(config, tol, max_iter, out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error";
        if (e.line >= 0) std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StructuralError& e) {
        std::cerr << "structural error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
