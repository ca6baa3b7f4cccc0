#pragma once

// Integration of i dU/ds = tau H(phi(s), k) U in scaled time s.
//
// Each step is the midpoint exponential U <- exp(-i tau ds H(s_mid)) U, so
// every product is unitary by construction. The step count is doubled until
// two successive estimates agree to `tol`; because the midpoint rule is
// time-symmetric its error expands in even powers of ds, and the doubling
// sequence is Richardson-extrapolated before the comparison. The final
// estimate is projected back onto the unitary group.

#include "fchern/models.hpp"

#include <span>
#include <vector>

namespace fchern {

struct PropagationSpec {
  double tau = 1.0;
  double s0 = 0.0;
  double s1 = kTwoPi;
  double tol = 1e-9;
  long max_steps = 1L << 20;

  /// Throws ContractError unless tau > 0, s1 > s0 and tol in [1e-12, 1e-4].
  void validate() const;
};

/// Bookkeeping from the most recent converged propagation on this thread.
struct PropagationStats {
  long steps = 0;       // steps in the finest level
  int levels = 0;       // doubling levels used
  double residual = 0;  // last successive-estimate difference
};
PropagationStats last_propagation_stats();

/// U(s1 <- s0).
ComplexMatrix evolve(const ModelFamily& family, const DriveSchedule& schedule, double k,
                     const PropagationSpec& spec);

/// U(c <- s0) for each checkpoint c in (s0, s1]; checkpoints become step boundaries.
std::vector<ComplexMatrix> evolve_checkpoints(const ModelFamily& family,
                                              const DriveSchedule& schedule, double k,
                                              const PropagationSpec& spec,
                                              std::span<const double> checkpoints);

/// Plain ordered midpoint product with a fixed total step count (no
/// extrapolation). Exposed for convergence studies.
ComplexMatrix evolve_fixed_steps(const ModelFamily& family, const DriveSchedule& schedule,
                                 double k, double tau, double s0, double s1, long steps);

/// F_tau(0, k) = U(2pi <- 0) under the family's periodic drive.
ComplexMatrix floquet_operator(const ModelFamily& family, double tau, double k,
                               double tol = 1e-9);

/// F_tau(s0, k) = U(s0 + 2pi <- s0).
ComplexMatrix floquet_operator_at(const ModelFamily& family, double tau, double k, double s0,
                                  double tol = 1e-9);

/// Running integrals of <psi(s)| A(phi(s), k) |psi(s)> along a propagation.
struct ExpectationTrace {
  std::vector<double> s;        // checkpoints (last is spec.s1)
  std::vector<double> running;  // integral from spec.s0 to each checkpoint
  ComplexVector final_state;
};

/// Propagates psi0 from spec.s0 to spec.s1 and integrates the expectation of
/// `observable` (given in family coordinates, evaluated at (phi(s), k)) by
/// the trapezoid rule on the step nodes. Convergence is judged on the
/// running integrals.
ExpectationTrace integrate_expectation(const ModelFamily& family, const DriveSchedule& schedule,
                                       double k, const PropagationSpec& spec,
                                       const ComplexVector& psi0, const MatrixField& observable,
                                       std::span<const double> checkpoints);

}  // namespace fchern
