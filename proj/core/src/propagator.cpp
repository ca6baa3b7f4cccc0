#include "fchern/propagator.hpp"

#include "fchern/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fchern {

namespace {

// Largest phase tau * ds * |H| allowed on the coarsest level.
constexpr double kCoarseStepPhase = 0.5;
constexpr long kMinCoarseSteps = 8;
constexpr int kMinLevels = 3;
constexpr int kMaxExtrapolationColumns = 5;

thread_local PropagationStats g_last_stats;

struct StepGrid {
  std::vector<double> nodes;       // segment boundaries, nodes.front() = s0
  std::vector<long> coarse_steps;  // per segment
  std::vector<std::size_t> checkpoint_nodes;
  long coarse_total = 0;
};

double estimate_norm(const ModelFamily& family, const DriveSchedule& schedule, double k,
                     double s0, double s1) {
  double largest = 0.0;
  constexpr int samples = 16;
  for (int i = 0; i <= samples; ++i) {
    const double s = s0 + (s1 - s0) * i / samples;
    largest = std::max(largest, family.evaluate(schedule.phi(s), k).norm());
  }
  return largest;
}

std::size_t nearest_node(const std::vector<double>& nodes, double s) {
  const auto it = std::min_element(nodes.begin(), nodes.end(), [s](double a, double b) {
    return std::abs(a - s) < std::abs(b - s);
  });
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<double> merge_nodes(std::vector<double> nodes) {
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> merged;
  for (double s : nodes) {
    if (merged.empty() || s - merged.back() > 1e-12 * (1.0 + std::abs(s))) merged.push_back(s);
  }
  return merged;
}

StepGrid build_grid(const DriveSchedule& schedule, double s0, double s1,
                    std::span<const double> checkpoints, long coarse_total) {
  std::vector<double> nodes{s0, s1};
  for (double kink : schedule.kinks()) {
    if (kink > s0 && kink < s1) nodes.push_back(kink);
  }
  for (double c : checkpoints) {
    if (!(c > s0 && c <= s1 + 1e-12)) {
      throw ContractError("propagation checkpoints must lie in (s0, s1]");
    }
    nodes.push_back(std::min(c, s1));
  }
  StepGrid grid;
  grid.nodes = merge_nodes(std::move(nodes));
  // merge_nodes may have dropped s1 in favour of an equal checkpoint
  grid.nodes.back() = s1;
  const double span = s1 - s0;
  for (std::size_t i = 0; i + 1 < grid.nodes.size(); ++i) {
    const double len = grid.nodes[i + 1] - grid.nodes[i];
    const long n = std::max(1L, static_cast<long>(std::ceil(coarse_total * len / span)));
    grid.coarse_steps.push_back(n);
    grid.coarse_total += n;
  }
  for (double c : checkpoints) grid.checkpoint_nodes.push_back(nearest_node(grid.nodes, c));
  return grid;
}

long coarse_step_count(const ModelFamily& family, const DriveSchedule& schedule, double k,
                       const PropagationSpec& spec) {
  const double norm = estimate_norm(family, schedule, k, spec.s0, spec.s1);
  const double phase = spec.tau * (spec.s1 - spec.s0) * norm;
  return std::max(kMinCoarseSteps, static_cast<long>(std::ceil(phase / kCoarseStepPhase)));
}

template <class Value>
double max_difference(const Value& a, const Value& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Romberg tableau over a step-doubling sequence whose error expands in
// even powers of the step size.
template <class Value>
class Extrapolation {
 public:
  // Returns the difference between the new best estimate and the previous one.
  double push(Value level_value) {
    std::vector<Value> row;
    row.push_back(std::move(level_value));
    const int columns = std::min<int>(static_cast<int>(previous_.size()), kMaxExtrapolationColumns);
    double factor = 1.0;
    for (int m = 1; m <= columns; ++m) {
      factor *= 4.0;
      const Value& coarse = previous_[static_cast<std::size_t>(m - 1)];
      Value next = row.back() + (row.back() - coarse) / (factor - 1.0);
      row.push_back(std::move(next));
    }
    double diff = std::numeric_limits<double>::infinity();
    if (!previous_.empty()) diff = max_difference(row.back(), previous_.back());
    previous_ = std::move(row);
    return diff;
  }
  const Value& best() const { return previous_.back(); }

 private:
  std::vector<Value> previous_;
};

template <class Value, class LevelFn>
Value converge(const PropagationSpec& spec, long coarse_total, const char* what,
               LevelFn run_level) {
  Extrapolation<Value> table;
  double diff = std::numeric_limits<double>::infinity();
  for (int level = 0;; ++level) {
    const long multiplier = 1L << level;
    const long total = coarse_total * multiplier;
    if (total > spec.max_steps) {
      std::ostringstream os;
      os << what << ": step budget " << spec.max_steps << " exhausted at tau=" << spec.tau
         << " with residual " << diff << " (tol " << spec.tol << ")";
      throw AccuracyError(os.str(), diff);
    }
    diff = table.push(run_level(multiplier));
    if (level + 1 >= kMinLevels && diff < spec.tol) {
      g_last_stats = PropagationStats{total, level + 1, diff};
      return table.best();
    }
  }
}

// Ordered midpoint product over the grid; fills one dim x dim block per checkpoint.
ComplexMatrix midpoint_product(const ModelFamily& family, const DriveSchedule& schedule,
                               double k, double tau, const StepGrid& grid, long multiplier,
                               std::size_t checkpoint_count) {
  const auto n = static_cast<Eigen::Index>(family.dim);
  ComplexMatrix out(n, n * static_cast<Eigen::Index>(std::max<std::size_t>(checkpoint_count, 1)));
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  for (std::size_t seg = 0; seg < grid.coarse_steps.size(); ++seg) {
    const long steps = grid.coarse_steps[seg] * multiplier;
    const double a = grid.nodes[seg];
    const double ds = (grid.nodes[seg + 1] - a) / static_cast<double>(steps);
    for (long j = 0; j < steps; ++j) {
      const double mid = a + (static_cast<double>(j) + 0.5) * ds;
      u = expm_skew(family.evaluate(schedule.phi(mid), k), tau * ds) * u;
    }
    for (std::size_t c = 0; c < checkpoint_count; ++c) {
      if (grid.checkpoint_nodes[c] == seg + 1) out.middleCols(static_cast<Eigen::Index>(c) * n, n) = u;
    }
  }
  if (checkpoint_count == 0) out = u;
  return out;
}

}  // namespace

void PropagationSpec::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ContractError("propagation: tau must be > 0");
  if (!(s1 > s0) || !std::isfinite(s0) || !std::isfinite(s1)) {
    throw ContractError("propagation: need s1 > s0");
  }
  if (!(tol >= 1e-12 && tol <= 1e-4)) throw ContractError("propagation: tol must lie in [1e-12, 1e-4]");
  if (max_steps < 1) throw ContractError("propagation: max_steps must be positive");
}

PropagationStats last_propagation_stats() { return g_last_stats; }

std::vector<ComplexMatrix> evolve_checkpoints(const ModelFamily& family,
                                              const DriveSchedule& schedule, double k,
                                              const PropagationSpec& spec,
                                              std::span<const double> checkpoints) {
  spec.validate();
  if (family.dim <= 0 || family.dim > 64) throw ContractError("evolve: family dim must be in [1, 64]");
  const StepGrid grid = build_grid(schedule, spec.s0, spec.s1, checkpoints,
                                   coarse_step_count(family, schedule, k, spec));
  const ComplexMatrix stacked = converge<ComplexMatrix>(spec, grid.coarse_total, "evolve", [&](long m) {
    return midpoint_product(family, schedule, k, spec.tau, grid, m, checkpoints.size());
  });
  const auto n = static_cast<Eigen::Index>(family.dim);
  std::vector<ComplexMatrix> out;
  out.reserve(checkpoints.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    out.push_back(nearest_unitary(stacked.middleCols(static_cast<Eigen::Index>(c) * n, n)));
  }
  return out;
}

ComplexMatrix evolve(const ModelFamily& family, const DriveSchedule& schedule, double k,
                     const PropagationSpec& spec) {
  const double end[] = {spec.s1};
  return evolve_checkpoints(family, schedule, k, spec, end).front();
}

ComplexMatrix evolve_fixed_steps(const ModelFamily& family, const DriveSchedule& schedule,
                                 double k, double tau, double s0, double s1, long steps) {
  if (steps < 1) throw ContractError("evolve_fixed_steps: steps must be positive");
  PropagationSpec spec{tau, s0, s1};
  spec.validate();
  const StepGrid grid = build_grid(schedule, s0, s1, {}, steps);
  return midpoint_product(family, schedule, k, tau, grid, 1, 0);
}

ComplexMatrix floquet_operator_at(const ModelFamily& family, double tau, double k, double s0,
                                  double tol) {
  PropagationSpec spec;
  spec.tau = tau;
  spec.s0 = s0;
  spec.s1 = s0 + family.s_period;
  spec.tol = tol;
  return evolve(family, family.periodic_schedule(), k, spec);
}

ComplexMatrix floquet_operator(const ModelFamily& family, double tau, double k, double tol) {
  return floquet_operator_at(family, tau, k, 0.0, tol);
}

ExpectationTrace integrate_expectation(const ModelFamily& family, const DriveSchedule& schedule,
                                       double k, const PropagationSpec& spec,
                                       const ComplexVector& psi0, const MatrixField& observable,
                                       std::span<const double> checkpoints) {
  spec.validate();
  if (psi0.size() != family.dim) throw ContractError("integrate_expectation: state dimension mismatch");
  std::vector<double> points(checkpoints.begin(), checkpoints.end());
  if (points.empty() || std::abs(points.back() - spec.s1) > 1e-12) points.push_back(spec.s1);
  const StepGrid grid = build_grid(schedule, spec.s0, spec.s1, points,
                                   coarse_step_count(family, schedule, k, spec));

  ComplexVector final_state = psi0;
  auto run_level = [&](long multiplier) {
    Eigen::VectorXd running = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
    ComplexVector psi = psi0;
    double integral = 0.0;
    auto expectation = [&](double s) {
      return psi.dot(observable(schedule.phi(s), k) * psi).real();
    };
    double previous = expectation(grid.nodes.front());
    for (std::size_t seg = 0; seg < grid.coarse_steps.size(); ++seg) {
      const long steps = grid.coarse_steps[seg] * multiplier;
      const double a = grid.nodes[seg];
      const double ds = (grid.nodes[seg + 1] - a) / static_cast<double>(steps);
      for (long j = 0; j < steps; ++j) {
        const double mid = a + (static_cast<double>(j) + 0.5) * ds;
        psi = apply_expm_skew(hermitian_eig(family.evaluate(schedule.phi(mid), k)), spec.tau * ds, psi);
        const double current = expectation(a + static_cast<double>(j + 1) * ds);
        integral += 0.5 * ds * (previous + current);
        previous = current;
      }
      for (std::size_t c = 0; c < points.size(); ++c) {
        if (grid.checkpoint_nodes[c] == seg + 1) running(static_cast<Eigen::Index>(c)) = integral;
      }
    }
    final_state = psi;
    return running;
  };
  const Eigen::VectorXd running =
      converge<Eigen::VectorXd>(spec, grid.coarse_total, "integrate_expectation", run_level);

  ExpectationTrace trace;
  trace.s = points;
  trace.running.assign(running.data(), running.data() + running.size());
  trace.final_state = std::move(final_state);
  return trace;
}

}  // namespace fchern
