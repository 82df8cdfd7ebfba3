#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <vector>

#include "perideval/errors.hpp"

namespace perideval {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A finite-dimensional generator A of the semigroup T(t) = exp(-A t),
/// acting on R^n ordered by the nonnegative orthant with the max norm.
///
/// metzler_ok() certifies that every off-diagonal entry of A is <= 0,
/// which is equivalent to exp(-A t) >= 0 entrywise for all t >= 0,
/// i.e. the semigroup is positive.
class Generator {
public:
    explicit Generator(Matrix a);

    int dimension() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }
    bool self_adjoint() const { return self_adjoint_; }
    bool metzler_ok() const { return metzler_ok_; }

    /// Present iff self_adjoint(); A = V diag(values) V^T with orthonormal V.
    struct SymmetricEigen {
        Vector values;
        Matrix vectors;
    };
    const SymmetricEigen* symmetric_eigen() const { return sym_.get(); }

private:
    Matrix matrix_;
    bool self_adjoint_ = false;
    bool metzler_ok_ = false;
    std::shared_ptr<const SymmetricEigen> sym_;
};

struct SpectrumInfo {
    std::vector<std::complex<double>> eigenvalues;
    double lambda1 = 0.0; ///< inf Re sigma(A)
    double nu0 = 0.0;     ///< growth exponent of T(t); nu0 = -lambda1
    bool exp_stable = false;
};

/// Validates the matrix and computes the self-adjointness and Metzler flags.
Generator build_generator(const Matrix& a);

SpectrumInfo spectrum(const Generator& gen);

/// exp(-A t) x. Eigendecomposition path for self-adjoint A, scaling-and-squaring
/// Pade exponential otherwise. t = 0 returns x unchanged.
Vector semigroup_apply(const Generator& gen, double t, const Vector& x);

/// exp(-A t) as a dense matrix.
Matrix semigroup_matrix(const Generator& gen, double t);

/// (integral_0^t exp(-A s) ds) x. Uses A^{-1}(I - exp(-A t)) when A is
/// invertible, the scaled power series otherwise. t = 0 yields the zero vector.
Vector phi1_apply(const Generator& gen, double t, const Vector& x);

/// Scaling-and-squaring (6,6) Pade approximation of exp(M).
Matrix matrix_exponential(const Matrix& m);

/// Empirical constant M with ||T(t)||_inf <= M exp(nu0 t), sampled over
/// t in [0, t_max]. Returns exactly 1 for self-adjoint generators.
double empirical_growth_constant(const Generator& gen, double t_max, int samples = 200);

} // namespace perideval
