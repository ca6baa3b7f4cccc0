#pragma once

#include "fchern/models.hpp"

#include <utility>
#include <vector>

namespace fchern {

struct TransportResult {
  double q_value = 0.0;
  /// (s, Q accumulated up to s); the last entry equals q_value.
  std::vector<std::pair<double, double>> partial;
  int k_points = 0;  // quadrature nodes actually used
  long s_steps = 0;  // finest step count over all k channels
  double tau = 0.0;
  int band = 0;
  /// Q on the requested grid before k doubling; |q_value - coarse_q| > 1e-3
  /// clears k_converged.
  double coarse_q = 0.0;
  bool k_converged = true;
};

struct TransportOptions {
  int k_points = 128;
  double s_end = kTwoPi;
  double tol = 1e-8;
  /// Number of uniform checkpoints in the partial trace.
  int partial_points = 64;
};

/// Charge transported in one drive cycle,
///   Q = tau/2pi * int dk int_0^s_end ds <U psi(k)| dH/dk |U psi(k)>,
/// starting from the band-th eigenvector of H(phi(0), k). The k integral is
/// the periodic trapezoid rule on k_points nodes, evaluated again on twice
/// as many nodes for a convergence flag; the reported value is the finer one.
TransportResult charge_transport(const ModelFamily& family, const DriveSchedule& schedule,
                                 double tau, int band, const TransportOptions& options = {});

/// Long-time (Cesaro) limit expressed through Floquet states,
///   sum_l |<psi|v_l>|^2 <v_l| I |v_l>.
/// Degenerate phase clusters are handled by projecting psi onto the cluster.
double floquet_longtime_average(const ComplexMatrix& floquet, const ComplexMatrix& observable,
                                const ComplexVector& psi);

/// (1/M) sum_{j=1..M} <F^j psi| I |F^j psi>, with the running power of F
/// re-unitarized every 64 multiplications.
double cesaro_time_average(const ComplexMatrix& floquet, const ComplexMatrix& observable,
                           const ComplexVector& psi, long m);

}  // namespace fchern
