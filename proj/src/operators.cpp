#include "perideval/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perideval {

namespace {

bool is_finite(const Matrix& a) {
    return a.allFinite();
}

bool check_self_adjoint(const Matrix& a) {
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    const double skew = (a - a.transpose()).cwiseAbs().maxCoeff();
    return skew <= 1e-12 * scale;
}

bool check_metzler(const Matrix& a) {
    const auto n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && a(i, j) > 0.0) return false;
    return true;
}

} // namespace

Generator::Generator(Matrix a) : matrix_(std::move(a)) {
    if (matrix_.rows() != matrix_.cols())
        throw StructuralError("generator matrix must be square, got " +
                              std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()));
    if (matrix_.rows() < 1) throw StructuralError("generator dimension must be >= 1");
    if (!is_finite(matrix_)) throw ValidationError("generator matrix has NaN or Inf entries");
    self_adjoint_ = check_self_adjoint(matrix_);
    metzler_ok_ = check_metzler(matrix_);
    if (self_adjoint_) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
        if (solver.info() != Eigen::Success)
            throw NumericalError("symmetric eigendecomposition did not converge");
        auto sym = std::make_shared<SymmetricEigen>();
        sym->values = solver.eigenvalues();
        sym->vectors = solver.eigenvectors();
        sym_ = std::move(sym);
    }
}

Generator build_generator(const Matrix& a) {
    return Generator(a);
}

SpectrumInfo spectrum(const Generator& gen) {
    SpectrumInfo info;
    if (gen.self_adjoint()) {
        const auto* sym = gen.symmetric_eigen();
        info.eigenvalues.reserve(static_cast<std::size_t>(sym->values.size()));
        for (Eigen::Index i = 0; i < sym->values.size(); ++i)
            info.eigenvalues.emplace_back(sym->values[i], 0.0);
    } else {
        Eigen::EigenSolver<Matrix> solver(gen.matrix(), /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success)
            throw NumericalError("general eigensolver did not converge for dimension " +
                                 std::to_string(gen.dimension()));
        const auto& vals = solver.eigenvalues();
        info.eigenvalues.reserve(static_cast<std::size_t>(vals.size()));
        for (Eigen::Index i = 0; i < vals.size(); ++i) info.eigenvalues.push_back(vals[i]);
    }
    double lambda1 = std::numeric_limits<double>::infinity();
    for (const auto& ev : info.eigenvalues) lambda1 = std::min(lambda1, ev.real());
    info.lambda1 = lambda1;
    info.nu0 = -lambda1;
    info.exp_stable = lambda1 > 0.0;
    return info;
}

Matrix matrix_exponential(const Matrix& m) {
    const Eigen::Index n = m.rows();
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff(); // inf norm
    int squarings = 0;
    Matrix a = m;
    if (norm > 0.5) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
        a /= std::ldexp(1.0, squarings);
    }

    // (6,6) Pade approximant: N(a)/D(a) with D(a) = N(-a).
    constexpr int degree = 6;
    Matrix even = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    Matrix odd = Matrix::Zero(n, n);
    double coeff = 1.0;
    for (int k = 1; k <= degree; ++k) {
        coeff *= static_cast<double>(degree - k + 1) / static_cast<double>(k * (2 * degree - k + 1));
        term = term * a;
        if (k % 2 == 0)
            even += coeff * term;
        else
            odd += coeff * term;
    }
    Matrix numerator = even + odd;
    Matrix denominator = even - odd;
    Matrix result = denominator.partialPivLu().solve(numerator);
    for (int k = 0; k < squarings; ++k) result = result * result;
    return result;
}

Matrix semigroup_matrix(const Generator& gen, double t) {
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative, got " + std::to_string(t));
    const int n = gen.dimension();
    if (t == 0.0) return Matrix::Identity(n, n);
    if (gen.self_adjoint()) {
        const auto* sym = gen.symmetric_eigen();
        Vector diag = (-t * sym->values.array()).exp();
        return sym->vectors * diag.asDiagonal() * sym->vectors.transpose();
    }
    return matrix_exponential(-t * gen.matrix());
}

Vector semigroup_apply(const Generator& gen, double t, const Vector& x) {
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative, got " + std::to_string(t));
    if (x.size() != gen.dimension())
        throw StructuralError("vector size does not match generator dimension");
    if (t == 0.0) return x;
    if (gen.self_adjoint()) {
        const auto* sym = gen.symmetric_eigen();
        Vector coeffs = sym->vectors.transpose() * x;
        coeffs.array() *= (-t * sym->values.array()).exp();
        return sym->vectors * coeffs;
    }
    return matrix_exponential(-t * gen.matrix()) * x;
}

namespace {

// integral_0^t exp(-A s) ds by the scaled power series with doubling:
// Phi(2h) = (I + E(h)) Phi(h), E(2h) = E(h)^2.
Matrix phi1_matrix_series(const Matrix& a, double t) {
    const Eigen::Index n = a.rows();
    const double norm = (t * a).cwiseAbs().rowwise().sum().maxCoeff();
    int doublings = 0;
    if (norm > 0.5) doublings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const double h = t / std::ldexp(1.0, doublings);

    Matrix b = -h * a;
    Matrix phi = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k <= 16; ++k) {
        term = term * b / static_cast<double>(k + 1);
        phi += term;
    }
    phi *= h; // h * sum_k (-A h)^k / (k+1)!
    Matrix e = matrix_exponential(b);
    for (int k = 0; k < doublings; ++k) {
        phi = phi + e * phi;
        e = e * e;
    }
    return phi;
}

} // namespace

Vector phi1_apply(const Generator& gen, double t, const Vector& x) {
    if (t < 0.0) throw DomainError("phi1 time must be nonnegative, got " + std::to_string(t));
    if (x.size() != gen.dimension())
        throw StructuralError("vector size does not match generator dimension");
    if (t == 0.0) return Vector::Zero(x.size());
    if (gen.self_adjoint()) {
        const auto* sym = gen.symmetric_eigen();
        Vector coeffs = sym->vectors.transpose() * x;
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            const double lambda = sym->values[i];
            const double z = -lambda * t;
            // (1 - e^{-lambda t})/lambda, series near lambda = 0
            double w;
            if (std::abs(z) < 1e-4)
                w = t * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
            else
                w = -std::expm1(z) / lambda;
            coeffs[i] *= w;
        }
        return sym->vectors * coeffs;
    }
    Eigen::FullPivLU<Matrix> lu(gen.matrix());
    if (lu.isInvertible()) {
        Vector rhs = x - semigroup_apply(gen, t, x);
        return lu.solve(rhs);
    }
    return phi1_matrix_series(gen.matrix(), t) * x;
}

double empirical_growth_constant(const Generator& gen, double t_max, int samples) {
    if (gen.self_adjoint()) return 1.0;
    const SpectrumInfo info = spectrum(gen);
    double m = 1.0;
    for (int k = 0; k <= samples; ++k) {
        const double t = t_max * static_cast<double>(k) / samples;
        const Matrix tt = semigroup_matrix(gen, t);
        const double opnorm = tt.cwiseAbs().rowwise().sum().maxCoeff();
        m = std::max(m, opnorm * std::exp(-info.nu0 * t));
    }
    return m;
}

} // namespace perideval
