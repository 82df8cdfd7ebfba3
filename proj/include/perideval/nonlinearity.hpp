#pragma once

#include "perideval/operators.hpp"

namespace perideval {

/// Time-periodic forcing h0(t) = (a + b sin(2 pi t / omega + phase)) * shape,
/// with a >= |b| and shape >= 0 so that h0(t) >= 0 for all t. Evaluation
/// reduces t modulo omega first, making the periodicity exact.
struct ForcingProfile {
    double a = 0.0;
    double b = 0.0;
    double phase = 0.0;
    double omega = 1.0;
    Vector shape;

    double scalar_at(double t) const;
    Vector eval(double t) const;
};

enum class NonlinearityKind { affine, saturating };

/// Catalog entry for F(t, x, y) with delay tau:
///   affine:     F = c1 x + c2 y + h0(t)
///   saturating: F_i = c1 x_i/(1+x_i) + c2 y_i/(1+y_i) + h0(t)_i
/// Both kinds are componentwise nondecreasing in (x, y) and map the cone
/// into the cone; the increment bound F(t,x2,y2) - F(t,x1,y1) <=
/// c1 (x2-x1) + c2 (y2-y1) holds with the stored constants.
struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::affine;
    double c1 = 0.0;
    double c2 = 0.0;
    double delay_tau = 1.0;
    ForcingProfile forcing;

    int dimension() const { return static_cast<int>(forcing.shape.size()); }
};

NonlinearitySpec make_affine(double c1, double c2, double tau, const ForcingProfile& forcing);
NonlinearitySpec make_saturating(double c1, double c2, double tau, const ForcingProfile& forcing);

/// Evaluates the catalog formula. Inputs may dip to -1e-10 entrywise (they
/// are clamped to the cone); anything below that raises ConeViolationError.
Vector nonlinearity_eval(const NonlinearitySpec& f, double t, const Vector& x, const Vector& y);

} // namespace perideval
