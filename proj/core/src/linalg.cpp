#include "fchern/linalg.hpp"

#include "fchern/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace fchern {

namespace {

// Cosine clusters of (F + F^dagger)/2 closer than this are split with the
// anti-Hermitian part. Wide enough that vectors outside a cluster are
// accurate to ~1e-10 even when their phases are far apart on the circle.
constexpr double kCosineCluster = 1e-6;

std::string describe(const ComplexMatrix& m) {
  std::ostringstream os;
  os << "dim=" << m.rows() << " max|entry|=" << max_abs(m)
     << " frobenius=" << m.norm();
  return os.str();
}

}  // namespace

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const ComplexMatrix& h) {
  return max_abs(h - h.adjoint());
}

double unitarity_residual(const ComplexMatrix& u) {
  const auto n = u.rows();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(n, n));
}

void require_square_finite(const ComplexMatrix& m, std::string_view what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ContractError(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw ContractError(std::string(what) + ": matrix has non-finite entries");
  }
}

void require_hermitian(const ComplexMatrix& h, std::string_view what) {
  require_square_finite(h, what);
  const double residual = hermiticity_residual(h);
  if (residual > 1e-12 * max_abs(h)) {
    std::ostringstream os;
    os << what << ": matrix is not Hermitian (max|H-H^+| = " << residual << ")";
    throw ContractError(os.str());
  }
}

void require_unitary(const ComplexMatrix& u, std::string_view what) {
  require_square_finite(u, what);
  const double residual = unitarity_residual(u);
  if (residual > 1e-10) {
    std::ostringstream os;
    os << what << ": matrix is not unitary (max|U^+U-1| = " << residual << ")";
    throw ContractError(os.str());
  }
}

double wrap_phase(double angle) {
  double w = std::remainder(angle, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

void fix_column_phases(ComplexMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    const double largest = col.cwiseAbs().maxCoeff();
    if (largest == 0.0) continue;
    Eigen::Index pivot = 0;
    while (std::abs(col(pivot)) < largest * (1.0 - 1e-12)) ++pivot;
    const Complex z = col(pivot);
    col *= std::conj(z) / std::abs(z);
    col(pivot) = Complex(std::abs(col(pivot)), 0.0);
  }
}

EigenSystem hermitian_eig(const ComplexMatrix& h) {
  require_hermitian(h, "hermitian_eig");
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge (" +
                         describe(h) + ")");
  }
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  fix_column_phases(out.vectors);
  return out;
}

EigenSystem unitary_eig(const ComplexMatrix& f) {
  require_unitary(f, "unitary_eig");
  const auto n = f.rows();
  const ComplexMatrix hermitian_part = 0.5 * (f + f.adjoint());
  const ComplexMatrix anti_part = Complex(0.0, -0.5) * (f - f.adjoint());

  const EigenSystem cosines = hermitian_eig(hermitian_part);
  ComplexMatrix vectors = cosines.vectors;

  for (Eigen::Index begin = 0; begin < n;) {
    Eigen::Index end = begin + 1;
    while (end < n && cosines.values(end) - cosines.values(end - 1) < kCosineCluster) ++end;
    const Eigen::Index size = end - begin;
    if (size > 1) {
      const ComplexMatrix basis = vectors.middleCols(begin, size);
      ComplexMatrix restricted = basis.adjoint() * anti_part * basis;
      restricted = 0.5 * (restricted + restricted.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(restricted);
      if (solver.info() != Eigen::Success) {
        throw NumericalError("unitary_eig: cluster eigensolver did not converge (" +
                             describe(f) + ")");
      }
      vectors.middleCols(begin, size) = basis * solver.eigenvectors();
    }
    begin = end;
  }

  RealVector raw_phases(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Complex z = vectors.col(c).dot(f * vectors.col(c));
    if (std::abs(std::abs(z) - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "unitary_eig: eigenvalue off the unit circle by " << std::abs(std::abs(z) - 1.0)
         << " (" << describe(f) << ")";
      throw NumericalError(os.str());
    }
    raw_phases(c) = wrap_phase(std::arg(z));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return raw_phases(a) < raw_phases(b); });

  EigenSystem out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = raw_phases(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }

  // Degenerate phase clusters, including the one straddling +-pi.
  std::vector<int> cluster(static_cast<std::size_t>(n));
  int label = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0 && out.values(i) - out.values(i - 1) >= kDegeneracyThreshold) ++label;
    cluster[static_cast<std::size_t>(i)] = label;
  }
  if (n > 1 && out.values(0) + kTwoPi - out.values(n - 1) < kDegeneracyThreshold) {
    const int last = cluster.back();
    for (auto& c : cluster) {
      if (c == last) c = 0;
    }
  }
  for (int c = 0; c <= label; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (cluster[static_cast<std::size_t>(i)] == c) members.push_back(i);
    }
    if (members.size() < 2) continue;
    ComplexMatrix block(n, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) block.col(static_cast<Eigen::Index>(j)) = out.vectors.col(members[j]);
    Eigen::HouseholderQR<ComplexMatrix> qr(block);
    const ComplexMatrix q =
        qr.householderQ() * ComplexMatrix::Identity(n, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) out.vectors.col(members[j]) = q.col(static_cast<Eigen::Index>(j));
  }

  fix_column_phases(out.vectors);
  return out;
}

ComplexMatrix expm_skew(const ComplexMatrix& h, double theta) {
  if (!std::isfinite(theta)) throw ContractError("expm_skew: theta must be finite");
  const EigenSystem eig = hermitian_eig(h);
  const auto n = h.rows();
  ComplexVector factors(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double angle = -theta * eig.values(i);
    factors(i) = Complex(std::cos(angle), std::sin(angle));
  }
  return eig.vectors * factors.asDiagonal() * eig.vectors.adjoint();
}

ComplexVector apply_expm_skew(const EigenSystem& eig, double theta, const ComplexVector& psi) {
  ComplexVector coeffs = eig.vectors.adjoint() * psi;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    const double angle = -theta * eig.values(i);
    coeffs(i) *= Complex(std::cos(angle), std::sin(angle));
  }
  return eig.vectors * coeffs;
}

ComplexMatrix nearest_unitary(const ComplexMatrix& m) {
  require_square_finite(m, "nearest_unitary");
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

ComplexMatrix unitary_from_eig(const EigenSystem& eig) {
  const auto n = eig.dim();
  ComplexVector factors(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    factors(i) = std::polar(1.0, eig.values(i));
  }
  return eig.vectors * factors.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace fchern
