#include "perideval/nonlinearity.hpp"

#include <cmath>

namespace perideval {

namespace {
constexpr double kConeTolerance = 1e-10;
constexpr double kTwoPi = 6.283185307179586476925287;
}

double ForcingProfile::scalar_at(double t) const {
    // reduce first so that t and t + omega give bit-identical angles
    double r = std::fmod(t, omega);
    if (r < 0.0) r += omega;
    return a + b * std::sin(kTwoPi * r / omega + phase);
}

Vector ForcingProfile::eval(double t) const {
    return scalar_at(t) * shape;
}

NonlinearitySpec make_affine(double c1, double c2, double tau, const ForcingProfile& forcing) {
    if (c1 < 0.0 || c2 < 0.0) throw ValidationError("nonlinearity constants must be nonnegative");
    if (tau <= 0.0) throw ValidationError("delay tau must be positive");
    if (forcing.a < std::abs(forcing.b))
        throw ValidationError("forcing requires a >= |b| so that h0 stays nonnegative");
    if (forcing.shape.size() > 0 && forcing.shape.minCoeff() < 0.0)
        throw ValidationError("forcing shape must be nonnegative");
    return NonlinearitySpec{NonlinearityKind::affine, c1, c2, tau, forcing};
}

NonlinearitySpec make_saturating(double c1, double c2, double tau, const ForcingProfile& forcing) {
    NonlinearitySpec f = make_affine(c1, c2, tau, forcing);
    f.kind = NonlinearityKind::saturating;
    return f;
}

Vector nonlinearity_eval(const NonlinearitySpec& f, double t, const Vector& x, const Vector& y) {
    const int n = f.dimension();
    if (x.size() != n || y.size() != n)
        throw StructuralError("state size does not match the nonlinearity dimension");
    for (int i = 0; i < n; ++i) {
        if (x[i] < -kConeTolerance)
            throw ConeViolationError("state entry " + std::to_string(i) + " = " +
                                     std::to_string(x[i]) + " leaves the cone");
        if (y[i] < -kConeTolerance)
            throw ConeViolationError("delayed entry " + std::to_string(i) + " = " +
                                     std::to_string(y[i]) + " leaves the cone");
    }
    Vector h = f.forcing.eval(t);
    Vector out(n);
    if (f.kind == NonlinearityKind::affine) {
        for (int i = 0; i < n; ++i)
            out[i] = f.c1 * std::max(x[i], 0.0) + f.c2 * std::max(y[i], 0.0) + h[i];
    } else {
        for (int i = 0; i < n; ++i) {
            const double xs = std::max(x[i], 0.0);
            const double ys = std::max(y[i], 0.0);
            out[i] = f.c1 * xs / (1.0 + xs) + f.c2 * ys / (1.0 + ys) + h[i];
        }
    }
    return out;
}

} // namespace perideval
