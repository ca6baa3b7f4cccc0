#include "fchern/transport.hpp"

#include "fchern/error.hpp"
#include "fchern/parallel.hpp"
#include "fchern/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fchern {

namespace {

constexpr long kReunitarizeEvery = 64;
constexpr double kUnresolvableClusterWidth = 1e-6;

void require_state(const ComplexVector& psi, Eigen::Index dim, const char* what) {
  if (psi.size() != dim) throw ContractError(std::string(what) + ": state dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ContractError(std::string(what) + ": state must be normalized");
}

}  // namespace

TransportResult charge_transport(const ModelFamily& family, const DriveSchedule& schedule,
                                 double tau, int band, const TransportOptions& options) {
  if (band < 0 || band >= family.dim) {
    std::ostringstream os;
    os << "charge_transport: band " << band << " out of range [0, " << family.dim << ")";
    throw ContractError(os.str());
  }
  if (options.k_points < 32) throw ContractError("charge_transport: k_points must be >= 32");
  if (options.s_end < kTwoPi - 1e-12) throw ContractError("charge_transport: s_end must be >= 2pi");
  if (options.partial_points < 1) throw ContractError("charge_transport: partial_points must be >= 1");

  PropagationSpec spec;
  spec.tau = tau;
  spec.s0 = 0.0;
  spec.s1 = options.s_end;
  spec.tol = options.tol;
  spec.validate();

  std::vector<double> checkpoints;
  for (int i = 1; i <= options.partial_points; ++i) {
    checkpoints.push_back(options.s_end * i / options.partial_points);
  }

  const int fine_points = 2 * options.k_points;
  const double k_step = family.k_period / fine_points;
  std::vector<std::vector<double>> running(static_cast<std::size_t>(fine_points));
  std::vector<long> steps(static_cast<std::size_t>(fine_points), 0);

  parallel_for(static_cast<std::size_t>(fine_points), [&](std::size_t j) {
    const double k = k_step * static_cast<double>(j);
    const EigenSystem initial = hermitian_eig(family.evaluate(schedule.phi(0.0), k));
    const ComplexVector psi0 = initial.vectors.col(band);
    const ExpectationTrace trace =
        integrate_expectation(family, schedule, k, spec, psi0, family.evaluate_dk, checkpoints);
    running[j] = trace.running;
    steps[j] = last_propagation_stats().steps;
  });

  // tau/2pi * (2pi / K) * sum_k  ==  tau / K * sum_k
  auto accumulate = [&](int stride, std::size_t c) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < fine_points; j += stride) {
      sum += running[static_cast<std::size_t>(j)][c];
      ++count;
    }
    return tau * sum / count;
  };

  TransportResult result;
  result.tau = tau;
  result.band = band;
  result.k_points = fine_points;
  result.s_steps = *std::max_element(steps.begin(), steps.end());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    result.partial.emplace_back(checkpoints[c], accumulate(1, c));
  }
  result.q_value = result.partial.back().second;
  result.coarse_q = accumulate(2, checkpoints.size() - 1);
  result.k_converged = std::abs(result.q_value - result.coarse_q) <= 1e-3;
  return result;
}

double floquet_longtime_average(const ComplexMatrix& floquet, const ComplexMatrix& observable,
                                const ComplexVector& psi) {
  require_unitary(floquet, "floquet_longtime_average");
  require_hermitian(observable, "floquet_longtime_average");
  if (observable.rows() != floquet.rows()) {
    throw ContractError("floquet_longtime_average: operator dimensions differ");
  }
  require_state(psi, floquet.rows(), "floquet_longtime_average");

  const EigenSystem eig = unitary_eig(floquet);
  const int n = eig.dim();
  // Clusters of consecutive phases, closing around +-pi.
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  int clusters = 0;
  for (int i = 1; i < n; ++i) {
    if (eig.values(i) - eig.values(i - 1) >= kDegeneracyThreshold) ++clusters;
    label[static_cast<std::size_t>(i)] = clusters;
  }
  if (n > 1 && clusters > 0 &&
      eig.values(0) + kTwoPi - eig.values(n - 1) < kDegeneracyThreshold) {
    for (auto& l : label) {
      if (l == clusters) l = 0;
    }
    --clusters;
  }

  double average = 0.0;
  for (int c = 0; c <= clusters; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      if (label[static_cast<std::size_t>(i)] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() > 1) {
      double width = 0.0;
      for (int m : members) {
        width = std::max(width, std::abs(wrap_phase(eig.values(m) - eig.values(members.front()))));
      }
      if (width > kUnresolvableClusterWidth) {
        throw DegeneracyError("floquet_longtime_average: near-degenerate phases chain over a width of " +
                              std::to_string(width));
      }
    }
    ComplexVector projected = ComplexVector::Zero(n);
    for (int m : members) {
      projected += eig.vectors.col(m) * eig.vectors.col(m).dot(psi);
    }
    average += projected.dot(observable * projected).real();
  }
  return average;
}

double cesaro_time_average(const ComplexMatrix& floquet, const ComplexMatrix& observable,
                           const ComplexVector& psi, long m) {
  if (m < 1) throw ContractError("cesaro_time_average: M must be >= 1");
  require_unitary(floquet, "cesaro_time_average");
  require_hermitian(observable, "cesaro_time_average");
  require_state(psi, floquet.rows(), "cesaro_time_average");

  ComplexMatrix power = ComplexMatrix::Identity(floquet.rows(), floquet.cols());
  double sum = 0.0;
  for (long j = 1; j <= m; ++j) {
    power = floquet * power;
    if (j % kReunitarizeEvery == 0) power = unitary_from_eig(unitary_eig(power));
    const ComplexVector state = power * psi;
    sum += state.dot(observable * state).real();
  }
  return sum / static_cast<double>(m);
}

}  // namespace fchern
