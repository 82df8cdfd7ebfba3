#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "perideval/analysis.hpp"
#include "perideval/ivp.hpp"
#include "perideval/periodic.hpp"
#include "perideval/problems.hpp"

namespace py = pybind11;
using namespace perideval;

namespace {

Matrix stack_rows(const std::vector<Vector>& values) {
    if (values.empty()) return Matrix(0, 0);
    Matrix out(static_cast<Eigen::Index>(values.size()), values.front().size());
    for (std::size_t j = 0; j < values.size(); ++j) out.row(static_cast<Eigen::Index>(j)) = values[j];
    return out;
}

std::vector<Vector> split_rows(const Matrix& m) {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.rows(); ++j) out.push_back(m.row(j).transpose());
    return out;
}

ForcingProfile make_forcing(double a, double b, double phase, double omega, const Vector& shape) {
    ForcingProfile f;
    f.a = a;
    f.b = b;
    f.phase = phase;
    f.omega = omega;
    f.shape = shape;
    return f;
}

} // namespace

PYBIND11_MODULE(_perideval, m) {
    m.doc() = "Positive periodic solutions and stability analysis for delay evolution equations";

    // translators run newest-first, so bases go in before their subclasses
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<SingularityError>(m, "SingularityError", PyExc_RuntimeError);
    py::register_exception<ResonanceError>(m, "ResonanceError", PyExc_ArithmeticError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<Generator>(m, "Generator")
        .def(py::init<Matrix>(), py::arg("matrix"))
        .def_property_readonly("dimension", &Generator::dimension)
        .def_property_readonly("matrix", &Generator::matrix)
        .def_property_readonly("self_adjoint", &Generator::self_adjoint)
        .def_property_readonly("metzler_ok", &Generator::metzler_ok)
        .def("__repr__", [](const Generator& g) {
            return "<Generator n=" + std::to_string(g.dimension()) +
                   (g.self_adjoint() ? " self-adjoint" : "") + (g.metzler_ok() ? " metzler" : "") +
                   ">";
        });

    py::class_<SpectrumInfo>(m, "SpectrumInfo")
        .def_readonly("eigenvalues", &SpectrumInfo::eigenvalues)
        .def_readonly("lambda1", &SpectrumInfo::lambda1)
        .def_readonly("nu0", &SpectrumInfo::nu0)
        .def_readonly("exp_stable", &SpectrumInfo::exp_stable);

    m.def("build_generator", &build_generator, py::arg("matrix"));
    m.def("spectrum", &spectrum, py::arg("generator"));
    m.def("semigroup_apply", &semigroup_apply, py::arg("generator"), py::arg("t"), py::arg("x"));
    m.def("semigroup_matrix", &semigroup_matrix, py::arg("generator"), py::arg("t"));
    m.def("phi1_apply", &phi1_apply, py::arg("generator"), py::arg("t"), py::arg("x"));
    m.def("matrix_exponential", &matrix_exponential, py::arg("matrix"));
    m.def("empirical_growth_constant", &empirical_growth_constant, py::arg("generator"),
          py::arg("t_max"), py::arg("samples") = 200);

    py::class_<NonlinearitySpec>(m, "NonlinearitySpec")
        .def_property_readonly("kind",
                               [](const NonlinearitySpec& f) {
                                   return f.kind == NonlinearityKind::affine ? "affine"
                                                                             : "saturating";
                               })
        .def_readonly("c1", &NonlinearitySpec::c1)
        .def_readonly("c2", &NonlinearitySpec::c2)
        .def_readonly("tau", &NonlinearitySpec::delay_tau);

    m.def(
        "affine_nonlinearity",
        [](double c1, double c2, double tau, double a, double b, double phase, double omega,
           const Vector& shape) {
            return make_affine(c1, c2, tau, make_forcing(a, b, phase, omega, shape));
        },
        py::arg("c1"), py::arg("c2"), py::arg("tau"), py::arg("a"), py::arg("b") = 0.0,
        py::arg("phase") = 0.0, py::arg("omega") = 1.0, py::arg("shape"));
    m.def(
        "saturating_nonlinearity",
        [](double c1, double c2, double tau, double a, double b, double phase, double omega,
           const Vector& shape) {
            return make_saturating(c1, c2, tau, make_forcing(a, b, phase, omega, shape));
        },
        py::arg("c1"), py::arg("c2"), py::arg("tau"), py::arg("a"), py::arg("b") = 0.0,
        py::arg("phase") = 0.0, py::arg("omega") = 1.0, py::arg("shape"));
    m.def("nonlinearity_eval", &nonlinearity_eval, py::arg("f"), py::arg("t"), py::arg("x"),
          py::arg("y"));

    py::class_<PeriodicTrajectory>(m, "PeriodicTrajectory")
        .def(py::init([](double omega, const Matrix& values) {
                 PeriodicTrajectory u;
                 u.omega = omega;
                 u.steps = static_cast<int>(values.rows());
                 u.values = split_rows(values);
                 return u;
             }),
             py::arg("omega"), py::arg("values"))
        .def_readonly("omega", &PeriodicTrajectory::omega)
        .def_readonly("steps", &PeriodicTrajectory::steps)
        .def_property_readonly("dt", &PeriodicTrajectory::dt)
        .def_property_readonly("values",
                               [](const PeriodicTrajectory& u) { return stack_rows(u.values); })
        .def("sup_norm", &PeriodicTrajectory::sup_norm);

    m.def("constant_trajectory", &constant_trajectory, py::arg("omega"), py::arg("steps"),
          py::arg("value"));

    py::class_<PeriodicSolveResult>(m, "PeriodicSolveResult")
        .def_readonly("solution", &PeriodicSolveResult::solution)
        .def_readonly("iterations", &PeriodicSolveResult::iterations)
        .def_readonly("residual", &PeriodicSolveResult::residual)
        .def_readonly("positivity_violation", &PeriodicSolveResult::positivity_violation)
        .def_readonly("converged", &PeriodicSolveResult::converged);

    m.def("apply_nemytskii", &apply_nemytskii, py::arg("f"), py::arg("u"),
          py::arg("interpolate_delay") = false);
    m.def("monodromy_inverse", &monodromy_inverse, py::arg("generator"), py::arg("omega"));
    m.def(
        "neumann_inverse",
        [](const Generator& gen, double omega, int terms) {
            const NeumannSeries s = neumann_inverse(gen, omega, terms);
            return py::make_tuple(s.sum, s.truncation_bound);
        },
        py::arg("generator"), py::arg("omega"), py::arg("terms"));
    m.def("periodic_linear_solve", &periodic_linear_solve, py::arg("generator"), py::arg("forcing"));
    m.def("spectral_radius_P", &spectral_radius_P, py::arg("generator"), py::arg("omega"),
          py::arg("steps"));
    m.def(
        "picard_solve",
        [](const Generator& gen, const NonlinearitySpec& f, double omega, int steps, double tol,
           int max_iter, bool interpolate_delay, double divergence_threshold) {
            PicardOptions options;
            options.tol = tol;
            options.max_iter = max_iter;
            options.interpolate_delay = interpolate_delay;
            options.divergence_threshold = divergence_threshold;
            return picard_solve(gen, f, omega, steps, options);
        },
        py::arg("generator"), py::arg("f"), py::arg("omega"), py::arg("steps"),
        py::arg("tol") = 1e-10, py::arg("max_iter") = 10000, py::arg("interpolate_delay") = false,
        py::arg("divergence_threshold") = 1e12);

    py::class_<HistorySegment>(m, "HistorySegment")
        .def(py::init([](double tau, const Matrix& values) {
                 HistorySegment h;
                 h.tau = tau;
                 h.steps = static_cast<int>(values.rows()) - 1;
                 h.values = split_rows(values);
                 return h;
             }),
             py::arg("tau"), py::arg("values"))
        .def_readonly("tau", &HistorySegment::tau)
        .def_readonly("steps", &HistorySegment::steps)
        .def_property_readonly("values",
                               [](const HistorySegment& h) { return stack_rows(h.values); });

    m.def("constant_history", &constant_history, py::arg("tau"), py::arg("steps"), py::arg("value"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("t_start", &Trajectory::t_start)
        .def_readonly("dt", &Trajectory::dt)
        .def_property_readonly("values", [](const Trajectory& t) { return stack_rows(t.values); })
        .def_property_readonly("times", [](const Trajectory& t) {
            Vector times(static_cast<Eigen::Index>(t.values.size()));
            for (std::size_t j = 0; j < t.values.size(); ++j)
                times[static_cast<Eigen::Index>(j)] = t.time_at(j);
            return times;
        });

    m.def("solve_ivp", &solve_ivp, py::arg("generator"), py::arg("f"), py::arg("history"),
          py::arg("t_end"), py::arg("dt"));
    m.def("mild_residual", &mild_residual, py::arg("generator"), py::arg("f"), py::arg("trajectory"),
          py::arg("history"), py::arg("check_times"));

    py::class_<GapReport>(m, "GapReport")
        .def_property_readonly("mode", [](const GapReport& g) { return gap_mode_name(g.mode); })
        .def_readonly("c1", &GapReport::c1)
        .def_readonly("c2", &GapReport::c2)
        .def_readonly("tau", &GapReport::tau)
        .def_readonly("nu0_abs", &GapReport::nu0_abs)
        .def_readonly("margin", &GapReport::margin)
        .def_readonly("sigma", &GapReport::sigma)
        .def_readonly("satisfied", &GapReport::satisfied);

    m.def(
        "check_spectral_gap",
        [](double c1, double c2, double tau, double nu0_abs, const std::string& mode) {
            return check_spectral_gap(c1, c2, tau, nu0_abs, parse_gap_mode(mode));
        },
        py::arg("c1"), py::arg("c2"), py::arg("tau"), py::arg("nu0_abs"), py::arg("mode"));

    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("samples", &CheckReport::samples)
        .def_readonly("violations", &CheckReport::violations)
        .def_readonly("worst_violation", &CheckReport::worst_violation)
        .def_readonly("passed", &CheckReport::passed);

    m.def("check_order_condition", &check_order_condition, py::arg("f"), py::arg("c1"),
          py::arg("c2"), py::arg("n_samples"), py::arg("seed") = 42);

    py::class_<BellmanResult>(m, "BellmanResult")
        .def_readonly("trajectory", &BellmanResult::trajectory)
        .def_readonly("bound_holds", &BellmanResult::bound_holds)
        .def_readonly("worst_margin", &BellmanResult::worst_margin);

    m.def("bellman_bound", &bellman_bound, py::arg("phi_history"), py::arg("c1"), py::arg("c2"),
          py::arg("t_end"), py::arg("dt"));

    m.def("fourier_periodic_oracle", &fourier_periodic_oracle, py::arg("lambda1"), py::arg("c1"),
          py::arg("c2"), py::arg("tau"), py::arg("omega"), py::arg("forcing_coeffs"),
          py::arg("steps"));
    m.def("fourier_oracle_field", &fourier_oracle_field, py::arg("generator"), py::arg("f"),
          py::arg("omega"), py::arg("steps"));

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("sigma_theory", &StabilityReport::sigma_theory)
        .def_readonly("measured_rate", &StabilityReport::measured_rate)
        .def_readonly("histories_tested", &StabilityReport::histories_tested)
        .def_readonly("all_decayed", &StabilityReport::all_decayed)
        .def_readonly("passing", &StabilityReport::passing)
        .def_readonly("per_history_rates", &StabilityReport::per_history_rates)
        .def_readonly("decay_times", &StabilityReport::decay_times)
        .def_readonly("decay_curves", &StabilityReport::decay_curves);

    m.def("stability_report", &stability_report, py::arg("generator"), py::arg("f"),
          py::arg("u_star"), py::arg("histories"), py::arg("t_end"), py::arg("dt"),
          py::arg("sigma_theory"));
    m.def("random_nonneg_histories", &random_nonneg_histories, py::arg("count"),
          py::arg("dimension"), py::arg("tau"), py::arg("dt"), py::arg("scale"),
          py::arg("seed") = 42);

    m.def(
        "laplacian_1d",
        [](int n, double length, double diffusion, double a0, const std::string& boundary,
           double robin_b0) {
            EllipticSpec1D spec;
            spec.interior_points = n;
            spec.length = length;
            spec.diffusion = diffusion;
            spec.potential_a0 = Vector::Constant(n, a0);
            if (boundary == "dirichlet")
                spec.boundary = BoundaryKind::dirichlet;
            else if (boundary == "robin")
                spec.boundary = BoundaryKind::robin;
            else
                throw ValidationError("boundary must be 'dirichlet' or 'robin'");
            spec.robin_b0 = robin_b0;
            return discretize_laplacian_1d(spec);
        },
        py::arg("n"), py::arg("length"), py::arg("diffusion") = 1.0, py::arg("a0") = 0.0,
        py::arg("boundary") = "dirichlet", py::arg("robin_b0") = 0.0);
    m.def("first_eigenfunction", &first_eigenfunction, py::arg("generator"));

    py::class_<Problem>(m, "Problem")
        .def_property_readonly("label", [](const Problem& p) { return p.spec.label; })
        .def_property_readonly("omega", [](const Problem& p) { return p.spec.omega; })
        .def_property_readonly("steps_M", [](const Problem& p) { return p.spec.steps_M; })
        .def_property_readonly("tau", [](const Problem& p) { return p.spec.tau; })
        .def_property_readonly("seed", [](const Problem& p) { return p.spec.seed; })
        .def_readonly("generator", &Problem::generator)
        .def_readonly("nonlinearity", &Problem::nonlinearity);

    m.def(
        "load_problem", [](const std::string& text) { return assemble(load_problem(text)); },
        py::arg("text"));
    m.def(
        "load_problem_file",
        [](const std::string& path) { return assemble(load_problem_file(path)); },
        py::arg("path"));
}
