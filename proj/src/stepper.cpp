#include "perideval/stepper.hpp"

#include <cmath>

namespace perideval {

double phi1_scalar(double z) {
    if (std::abs(z) < 1e-4)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
    return std::expm1(z) / z;
}

double phi2_scalar(double z) {
    if (std::abs(z) < 1e-4)
        return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0;
    return (std::expm1(z) - z) / (z * z);
}

ExpStepper make_stepper(const Generator& gen, double dt) {
    if (dt <= 0.0) throw DomainError("stepper needs dt > 0, got " + std::to_string(dt));
    const int n = gen.dimension();
    ExpStepper s;
    s.dt = dt;
    if (gen.self_adjoint()) {
        const auto* sym = gen.symmetric_eigen();
        Vector e(n), p1(n), p2(n);
        for (int i = 0; i < n; ++i) {
            const double z = -sym->values[i] * dt;
            e[i] = std::exp(z);
            p1[i] = dt * phi1_scalar(z);
            p2[i] = dt * phi2_scalar(z);
        }
        const Matrix& v = sym->vectors;
        s.E = v * e.asDiagonal() * v.transpose();
        s.Phi1 = v * p1.asDiagonal() * v.transpose();
        s.W2 = v * p2.asDiagonal() * v.transpose();
        s.W1 = s.Phi1 - s.W2;
        return s;
    }
    // exp of the augmented block matrix [[B, I, 0], [0, 0, I], [0, 0, 0]]
    // carries phi1(B) and phi2(B) in its top row, B = -A dt.
    Matrix aug = Matrix::Zero(3 * n, 3 * n);
    aug.topLeftCorner(n, n) = -dt * gen.matrix();
    aug.block(0, n, n, n) = Matrix::Identity(n, n);
    aug.block(n, 2 * n, n, n) = Matrix::Identity(n, n);
    Matrix eaug = matrix_exponential(aug);
    s.E = eaug.topLeftCorner(n, n);
    s.Phi1 = dt * eaug.block(0, n, n, n);
    s.W2 = dt * eaug.block(0, 2 * n, n, n);
    s.W1 = s.Phi1 - s.W2;
    return s;
}

} // namespace perideval
