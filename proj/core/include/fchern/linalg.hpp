#pragma once

// Dense complex kernels shared by every other module: Hermitian and unitary
// eigendecomposition and the propagator exponential exp(-i theta H).

#include <Eigen/Dense>

#include <complex>
#include <string_view>

namespace fchern {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Eigenvalues below this separation are treated as one degenerate cluster.
inline constexpr double kDegeneracyThreshold = 1e-9;

/// Values and orthonormal eigenvectors (columns). For unitary input the
/// values are eigenphases in (-pi, pi].
struct EigenSystem {
  RealVector values;
  ComplexMatrix vectors;

  int dim() const { return static_cast<int>(values.size()); }
};

double max_abs(const ComplexMatrix& m);
/// max |H - H^dagger|
double hermiticity_residual(const ComplexMatrix& h);
/// max |U^dagger U - 1|
double unitarity_residual(const ComplexMatrix& u);

void require_square_finite(const ComplexMatrix& m, std::string_view what);
/// Throws ContractError unless max|H - H^dagger| <= 1e-12 max|H|.
void require_hermitian(const ComplexMatrix& h, std::string_view what);
/// Throws ContractError unless max|U^dagger U - 1| <= 1e-10.
void require_unitary(const ComplexMatrix& u, std::string_view what);

/// Maps an angle to (-pi, pi].
double wrap_phase(double angle);

/// Multiplies each column by a unit phase so that its largest-magnitude
/// component is real and positive. Ties go to the lowest row index.
void fix_column_phases(ComplexMatrix& vectors);

/// Eigendecomposition of a Hermitian matrix, values ascending.
EigenSystem hermitian_eig(const ComplexMatrix& h);

/// Eigendecomposition of a unitary matrix, phases ascending in (-pi, pi].
///
/// F is treated as a normal matrix: the Hermitian part (F + F^dagger)/2 is
/// diagonalized first, then clusters of (nearly) equal cosines are split
/// with the anti-Hermitian part (F - F^dagger)/2i restricted to the
/// cluster. Vectors of phases closer than kDegeneracyThreshold are
/// re-orthonormalized inside their cluster.
EigenSystem unitary_eig(const ComplexMatrix& f);

/// exp(-i theta H) = V diag(exp(-i theta lambda)) V^dagger.
ComplexMatrix expm_skew(const ComplexMatrix& h, double theta);

/// exp(-i theta H) psi from an existing eigendecomposition of H.
ComplexVector apply_expm_skew(const EigenSystem& eig, double theta,
                              const ComplexVector& psi);

/// Closest unitary in Frobenius norm (polar factor M (M^dagger M)^{-1/2}).
/// Used to restore exact unitarity after extrapolation or long products.
ComplexMatrix nearest_unitary(const ComplexMatrix& m);

/// V diag(exp(i phases)) V^dagger
ComplexMatrix unitary_from_eig(const EigenSystem& eig);

}  // namespace fchern
