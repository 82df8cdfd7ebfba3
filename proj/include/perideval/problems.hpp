#pragma once

#include <string>
#include <variant>

#include "perideval/nonlinearity.hpp"
#include "perideval/operators.hpp"

namespace perideval {

enum class BoundaryKind { dirichlet, robin };

/// 1-D elliptic operator -diffusion u_xx + a0(x) u on (0, L) with Dirichlet
/// or Robin boundaries, discretized on n interior points.
struct EllipticSpec1D {
    int interior_points = 1;
    double length = 1.0;
    double diffusion = 1.0;
    Vector potential_a0; ///< a0 >= 0 sampled at the grid points
    BoundaryKind boundary = BoundaryKind::dirichlet;
    double robin_b0 = 0.0;
};

/// Central-difference discretization: A = diffusion * tridiag(-1,2,-1)/h^2 +
/// diag(a0), h = L/(n+1). Robin boundaries eliminate the boundary value
/// through the ghost relation u_0 = u_1 / (1 + b0 h) (and symmetrically at
/// x = L), which only modifies the diagonal of the boundary rows. Metzler by
/// construction. Rejects Robin with b0 = 0 and a0 identically zero (the
/// degenerate case with lambda1 = 0).
Generator discretize_laplacian_1d(const EllipticSpec1D& spec);

/// First (smallest-eigenvalue) eigenfunction of a self-adjoint generator,
/// sign-fixed positive and normalized to max entry 1.
Vector first_eigenfunction(const Generator& gen);

struct ProblemSpec {
    std::string label;
    double omega = 1.0;
    int steps_M = 8;
    double tau = 1.0;
    NonlinearityKind kind = NonlinearityKind::affine;
    double c1 = 0.0;
    double c2 = 0.0;
    double forcing_a = 0.0;
    double forcing_b = 0.0;
    double forcing_phase = 0.0;
    std::variant<Matrix, EllipticSpec1D> generator_source;
    bool interpolate_delay = false;
    std::uint64_t seed = 42;
};

/// Parses the flat key = value configuration grammar (UTF-8, '#' comments).
/// Unknown keys are rejected; schema violations name the offending field;
/// commensurability violations name tau, omega and M.
ProblemSpec load_problem(const std::string& text);
ProblemSpec load_problem_file(const std::string& path);

/// A ProblemSpec resolved into runnable pieces. The forcing shape defaults
/// to all-ones for inline matrices and to the discrete first eigenfunction
/// (normalized to max 1) for elliptic generators.
struct Problem {
    ProblemSpec spec;
    Generator generator;
    NonlinearitySpec nonlinearity;
};

Problem assemble(const ProblemSpec& spec);

bool delay_commensurate(double tau, double dt);
/// Rounded tau/dt; raises ConfigError when tau is not an integer multiple of dt.
int delay_steps(double tau, double dt);

} // namespace perideval
