#pragma once

#include "perideval/operators.hpp"

namespace perideval {

/// One-step propagator for u' + A u = f on a step of width dt, in
/// exponential-trapezoid (variation-of-constants) form:
///
///   u_{j+1} = E u_j + W1 f_j + W2 f_{j+1},
///
/// exact whenever f is linear on the step. E = exp(-A dt), Phi1 = W1 + W2
/// is the integral of the semigroup over one step.
struct ExpStepper {
    double dt = 0.0;
    Matrix E;
    Matrix W1;
    Matrix W2;
    Matrix Phi1;
};

/// Builds the propagator via the spectral map for self-adjoint generators and
/// via one augmented matrix exponential otherwise.
ExpStepper make_stepper(const Generator& gen, double dt);

/// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 with series
/// evaluation near zero.
double phi1_scalar(double z);
double phi2_scalar(double z);

} // namespace perideval
