#include "fchern/topology.hpp"

#include "fchern/error.hpp"
#include "fchern/parallel.hpp"
#include "fchern/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace fchern {

namespace {

// Phases closer than this are treated as one eigenspace while tracking.
constexpr double kClusterWidth = 1e-7;
constexpr double kSnapTolerance = 1e-4;
constexpr double kGaplessThreshold = 1e-6;
constexpr int kMaxStaticGrid = 512;
constexpr int kMaxFloquetSPoints = 4096;

// Groups of column indices whose phases lie within kClusterWidth of a
// neighbour, closing around +-pi. Singletons are omitted.
std::vector<std::vector<int>> phase_clusters(const RealVector& phases) {
  const int n = static_cast<int>(phases.size());
  std::vector<std::vector<int>> groups;
  if (n < 2) return groups;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return phases(a) < phases(b); });
  std::vector<std::vector<int>> runs{{order[0]}};
  for (int i = 1; i < n; ++i) {
    if (phases(order[i]) - phases(order[i - 1]) < kClusterWidth) {
      runs.back().push_back(order[i]);
    } else {
      runs.push_back({order[i]});
    }
  }
  if (runs.size() > 1 && phases(order[0]) + kTwoPi - phases(order[n - 1]) < kClusterWidth) {
    runs.front().insert(runs.front().end(), runs.back().begin(), runs.back().end());
    runs.pop_back();
  }
  for (auto& r : runs) {
    if (r.size() > 1) groups.push_back(std::move(r));
  }
  return groups;
}

double min_separation(const RealVector& phases) {
  const int n = static_cast<int>(phases.size());
  if (n < 2) return kTwoPi;
  std::vector<double> sorted(phases.data(), phases.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double sep = sorted.front() + kTwoPi - sorted.back();
  for (int i = 1; i < n; ++i) sep = std::min(sep, sorted[i] - sorted[i - 1]);
  return sep;
}

// Orthonormal basis of span(columns of `basis` listed in `cols`) closest to
// the given guide vectors (Gram-Schmidt on their projections). Returns false
// if a projection is too small to use.
bool aligned_basis(const ComplexMatrix& basis, const std::vector<int>& cols,
                   const std::vector<ComplexVector>& guides, std::vector<ComplexVector>& out) {
  out.clear();
  for (const ComplexVector& g : guides) {
    ComplexVector v = ComplexVector::Zero(basis.rows());
    for (int c : cols) v += basis.col(c) * basis.col(c).dot(g);
    for (const ComplexVector& u : out) v -= u * u.dot(v);
    const double norm = v.norm();
    if (norm < 1e-3) return false;
    out.push_back(v / norm);
  }
  return true;
}

// Rotates degenerate eigenspaces of the first node onto the directions the
// bands take just after it, so tracking does not start from an arbitrary basis.
void orient_start(EigenSystem& start, const EigenSystem& next) {
  for (const auto& cluster : phase_clusters(start.values)) {
    std::vector<std::pair<double, int>> weight;
    for (int m = 0; m < next.dim(); ++m) {
      double w = 0.0;
      for (int c : cluster) w += std::norm(start.vectors.col(c).dot(next.vectors.col(m)));
      weight.emplace_back(-w, m);
    }
    std::sort(weight.begin(), weight.end());
    std::vector<ComplexVector> guides;
    for (std::size_t i = 0; i < cluster.size(); ++i) guides.push_back(next.vectors.col(weight[i].second));
    std::vector<ComplexVector> basis;
    if (!aligned_basis(start.vectors, cluster, guides, basis)) continue;
    for (std::size_t i = 0; i < cluster.size(); ++i) start.vectors.col(cluster[i]) = basis[i];
  }
}

struct Match {
  std::vector<int> column;
  std::vector<ComplexVector> vectors;
  std::vector<double> energy;
  double min_overlap = 1.0;
  double max_step = 0.0;
  bool projected = false;
};

class Tracker {
 public:
  Tracker(const FloquetMap& floquet, const TrackingOptions& options, BandSet& bands)
      : floquet_(floquet), options_(options), bands_(bands) {}

  void advance(double kb, const EigenSystem& b, int depth, bool closing) {
    Match m = match(b, closing);
    const bool good = m.min_overlap >= options_.min_overlap && m.max_step <= options_.max_phase_step;
    if (good) {
      if (m.projected) bands_.crossing_flags.push_back({kb, min_separation(b.values)});
      append(kb, m);
      return;
    }
    const double ka = bands_.k_grid.back();
    if (depth < options_.max_refinement) {
      const double mid = 0.5 * (ka + kb);
      const EigenSystem e = unitary_eig(floquet_(mid));
      advance(mid, e, depth + 1, false);
      advance(kb, b, depth + 1, closing);
      return;
    }
    bands_.crossing_flags.push_back({kb, min_separation(b.values)});
    if (m.min_overlap < options_.fail_overlap) {
      std::ostringstream os;
      os.precision(12);
      os << "band tracking failed on [" << ka << ", " << kb << "]: best overlap "
         << m.min_overlap << " after " << options_.max_refinement << " refinements";
      throw TrackingError(os.str());
    }
    append(kb, m);
  }

  std::vector<int> last_columns;

 private:
  Match match(const EigenSystem& b, bool closing) const {
    const int n = b.dim();
    Match m;
    m.column.assign(static_cast<std::size_t>(n), -1);
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      const ComplexVector& v = bands_.vectors[static_cast<std::size_t>(i)].back();
      for (int j = 0; j < n; ++j) pairs.emplace_back(-std::abs(v.dot(b.vectors.col(j))), i, j);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    int assigned = 0;
    for (const auto& [negative, i, j] : pairs) {
      if (assigned == n) break;
      if (m.column[static_cast<std::size_t>(i)] >= 0 || taken[static_cast<std::size_t>(j)]) continue;
      m.column[static_cast<std::size_t>(i)] = j;
      taken[static_cast<std::size_t>(j)] = true;
      ++assigned;
    }

    m.vectors.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m.vectors[static_cast<std::size_t>(i)] = b.vectors.col(m.column[static_cast<std::size_t>(i)]);

    // Inside a numerically degenerate eigenspace the solver's basis is
    // arbitrary; continue each band along its own projection instead. Not at
    // the closing node, whose columns must stay those of the first node.
    if (!closing) {
      for (const auto& cluster : phase_clusters(b.values)) {
        std::vector<int> members;
        std::vector<ComplexVector> guides;
        for (int i = 0; i < n; ++i) {
          if (std::find(cluster.begin(), cluster.end(), m.column[static_cast<std::size_t>(i)]) != cluster.end()) {
            members.push_back(i);
            guides.push_back(bands_.vectors[static_cast<std::size_t>(i)].back());
          }
        }
        std::vector<ComplexVector> basis;
        if (!aligned_basis(b.vectors, cluster, guides, basis)) continue;
        for (std::size_t t = 0; t < members.size(); ++t) m.vectors[static_cast<std::size_t>(members[t])] = basis[t];
        m.projected = true;
      }
    }

    m.energy.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const double previous = bands_.quasienergy[si].back();
      const double step = wrap_phase(b.values(m.column[si]) - previous);
      m.energy[si] = previous + step;
      m.max_step = std::max(m.max_step, std::abs(step));
      m.min_overlap = std::min(m.min_overlap, std::abs(bands_.vectors[si].back().dot(m.vectors[si])));
    }
    return m;
  }

  void append(double k, const Match& m) {
    bands_.k_grid.push_back(k);
    for (std::size_t i = 0; i < m.column.size(); ++i) {
      bands_.quasienergy[i].push_back(m.energy[i]);
      bands_.vectors[i].push_back(m.vectors[i]);
    }
    last_columns = m.column;
  }

  const FloquetMap& floquet_;
  const TrackingOptions& options_;
  BandSet& bands_;
};

}  // namespace

FloquetMap floquet_map(const ModelFamily& family, double tau, double tol) {
  return [family, tau, tol](double k) { return floquet_operator(family, tau, k, tol); };
}

FloquetField floquet_field(const ModelFamily& family, double tol) {
  return [family, tol](double tau, double k) { return floquet_operator(family, tau, k, tol); };
}

Rational::Rational(long n, long d) : num(n), den(d) {
  if (den == 0) throw ContractError("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
}

Rational snap_rational(double x, long den, double tolerance, const char* what) {
  if (den < 1) throw ContractError(std::string(what) + ": denominator must be positive");
  if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": value is not finite");
  const double scaled = x * static_cast<double>(den);
  const long num = std::lround(scaled);
  const double residual = std::abs(x - static_cast<double>(num) / static_cast<double>(den));
  if (residual > tolerance) {
    std::ostringstream os;
    os << what << ": " << x << " is " << residual << " away from the nearest multiple of 1/" << den;
    throw NumericalError(os.str());
  }
  return Rational(num, den);
}

BandSet::Extended BandSet::extended(int band) const {
  if (band < 0 || band >= dim()) throw ContractError("BandSet::extended: band out of range");
  Extended ext;
  const std::size_t last = k_grid.size() - 1;
  int current = band;
  double offset = 0.0;
  for (int c = 0; c < cycle_length[static_cast<std::size_t>(band)]; ++c) {
    const auto cu = static_cast<std::size_t>(current);
    for (std::size_t j = (c == 0 ? 0 : 1); j <= last; ++j) {
      ext.k.push_back(period * c + k_grid[j]);
      ext.quasienergy.push_back(quasienergy[cu][j] + offset);
      ext.vectors.push_back(vectors[cu][j]);
    }
    const int next = permutation[cu];
    offset = ext.quasienergy.back() - quasienergy[static_cast<std::size_t>(next)][0];
    current = next;
  }
  return ext;
}

BandSet track_parameter(const FloquetMap& floquet, double period, int points,
                        const TrackingOptions& options) {
  if (points < 2) throw ContractError("track_parameter: need at least 2 points");
  if (!(period > 0.0)) throw ContractError("track_parameter: period must be positive");
  std::vector<EigenSystem> nodes(static_cast<std::size_t>(points));
  parallel_for(nodes.size(), [&](std::size_t j) {
    nodes[j] = unitary_eig(floquet(period * static_cast<double>(j) / points));
  });
  orient_start(nodes[0], nodes[1]);

  BandSet bands;
  bands.period = period;
  bands.floquet = floquet;
  const int n = nodes[0].dim();
  bands.quasienergy.resize(static_cast<std::size_t>(n));
  bands.vectors.resize(static_cast<std::size_t>(n));
  bands.k_grid.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    bands.quasienergy[static_cast<std::size_t>(i)].push_back(nodes[0].values(i));
    bands.vectors[static_cast<std::size_t>(i)].push_back(nodes[0].vectors.col(i));
  }

  Tracker tracker(floquet, options, bands);
  for (int j = 1; j <= points; ++j) {
    const bool closing = j == points;
    tracker.advance(period * static_cast<double>(j) / points,
                    nodes[static_cast<std::size_t>(closing ? 0 : j)], 0, closing);
  }
  bands.k_grid.back() = period;

  bands.permutation = tracker.last_columns;
  bands.cycle_length.assign(static_cast<std::size_t>(n), 0);
  long order = 1;
  for (int i = 0; i < n; ++i) {
    int length = 1;
    for (int c = bands.permutation[static_cast<std::size_t>(i)]; c != i;
         c = bands.permutation[static_cast<std::size_t>(c)]) {
      ++length;
    }
    bands.cycle_length[static_cast<std::size_t>(i)] = length;
    order = std::lcm(order, static_cast<long>(length));
  }
  bands.order = static_cast<int>(order);
  return bands;
}

BandSet track_bands(const FloquetMap& floquet, int k_points, const TrackingOptions& options) {
  if (k_points < 128) throw ContractError("track_bands: k_points must be >= 128");
  return track_parameter(floquet, kTwoPi, k_points, options);
}

BandSet track_bands(const ModelFamily& family, double tau, int k_points, double tol,
                    const TrackingOptions& options) {
  if (!(tau > 0.0)) throw ContractError("track_bands: tau must be positive");
  if (k_points < 128) throw ContractError("track_bands: k_points must be >= 128");
  BandSet bands = track_parameter(floquet_map(family, tau, tol), family.k_period, k_points, options);
  bands.tau = tau;
  return bands;
}

Rational winding_number(const BandSet& bands, int band) {
  const BandSet::Extended ext = bands.extended(band);
  const long cycle = bands.cycle_length[static_cast<std::size_t>(band)];
  const double shift = ext.quasienergy.back() - ext.quasienergy.front();
  return snap_rational(-shift / (kTwoPi * static_cast<double>(cycle)), cycle, kSnapTolerance,
                       "winding_number");
}

std::vector<Rational> winding_numbers(const BandSet& bands) {
  std::vector<Rational> out;
  for (int b = 0; b < bands.dim(); ++b) out.push_back(winding_number(bands, b));
  return out;
}

namespace {

struct PlaquetteSum {
  double sum = 0.0;
  double max_angle = 0.0;
  bool admissible() const { return max_angle < kPi / 2.0; }
};

// Lattice field strength of a periodic grid of states, rows along s and
// columns along k: each cell contributes the phase of
// <a|b><b|c><c|d><d|a> with a=(i,j), b=(i,j+1), c=(i+1,j+1), d=(i+1,j).
template <typename State>
PlaquetteSum plaquette_sum(int rows, int cols, const State& state) {
  PlaquetteSum out;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const ComplexVector& a = state(i, j);
      const ComplexVector& b = state(i, j + 1);
      const ComplexVector& c = state(i + 1, j + 1);
      const ComplexVector& d = state(i + 1, j);
      const Complex w = a.dot(b) * b.dot(c) * c.dot(d) * d.dot(a);
      const double angle = std::arg(w);
      out.sum += angle;
      out.max_angle = std::max(out.max_angle, std::abs(angle));
    }
  }
  return out;
}

}  // namespace

Rational floquet_chern(const ModelFamily& family, const BandSet& bands, int band, int s_points,
                       double tol) {
  if (!(bands.tau > 0.0)) throw ContractError("floquet_chern: band set carries no tau");
  if (s_points < 0 || s_points == 1) throw ContractError("floquet_chern: s_points must be 0 or >= 2");
  const BandSet::Extended ext = bands.extended(band);
  const int cols = static_cast<int>(ext.k.size()) - 1;
  const long cycle = bands.cycle_length[static_cast<std::size_t>(band)];

  int s = s_points;
  if (s == 0) {
    const double phase = bands.tau * kTwoPi * max_spectral_norm(family, 16);
    s = 32;
    while (s < 2.0 * phase && s < kMaxFloquetSPoints) s *= 2;
  }

  PropagationSpec spec;
  spec.tau = bands.tau;
  spec.tol = tol;
  const DriveSchedule schedule = family.periodic_schedule();
  for (;;) {
    std::vector<double> checkpoints;
    for (int i = 1; i <= s; ++i) checkpoints.push_back(kTwoPi * i / s);
    std::vector<std::vector<ComplexVector>> states(static_cast<std::size_t>(cols));
    parallel_for(states.size(), [&](std::size_t j) {
      const double k = std::fmod(ext.k[j], bands.period);
      const std::vector<ComplexMatrix> us = evolve_checkpoints(family, schedule, k, spec, checkpoints);
      auto& column = states[j];
      column.reserve(us.size() + 1);
      column.push_back(ext.vectors[j]);
      for (const ComplexMatrix& u : us) column.push_back(u * ext.vectors[j]);
    });
    const PlaquetteSum p = plaquette_sum(s, cols, [&](int i, int j) -> const ComplexVector& {
      return states[static_cast<std::size_t>(j == cols ? 0 : j)][static_cast<std::size_t>(i)];
    });
    if (p.admissible()) {
      const double chern = p.sum / kTwoPi;
      const long whole = std::lround(chern);
      if (std::abs(chern - static_cast<double>(whole)) > kSnapTolerance) {
        std::ostringstream os;
        os << "floquet_chern: plaquette sum " << chern << " is not an integer";
        throw NumericalError(os.str());
      }
      return Rational(whole, cycle);
    }
    if (s_points != 0 || s >= kMaxFloquetSPoints) {
      std::ostringstream os;
      os << "floquet_chern: grid too coarse (" << s << " x " << cols
         << "), largest plaquette angle " << p.max_angle;
      throw GridError(os.str());
    }
    s *= 2;
  }
}

namespace {

struct StaticGridResult {
  std::vector<PlaquetteSum> sums;
  std::vector<double> separation;
};

StaticGridResult static_grid(const ModelFamily& family, const std::vector<int>& bands, int grid) {
  std::vector<std::vector<EigenSystem>> eig(static_cast<std::size_t>(grid));
  parallel_for(eig.size(), [&](std::size_t i) {
    const double s = family.s_period * static_cast<double>(i) / grid;
    auto& row = eig[i];
    row.reserve(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) row.push_back(hermitian_eig(family.evaluate(s, family.k_period * j / grid)));
  });
  StaticGridResult out;
  const int dim = family.dim;
  for (int band : bands) {
    double sep = kTwoPi * 1e6;
    for (const auto& row : eig) {
      for (const EigenSystem& e : row) {
        if (band > 0) sep = std::min(sep, e.values(band) - e.values(band - 1));
        if (band + 1 < dim) sep = std::min(sep, e.values(band + 1) - e.values(band));
      }
    }
    out.separation.push_back(sep);
    std::vector<ComplexVector> vecs(static_cast<std::size_t>(grid * grid));
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        vecs[static_cast<std::size_t>(i * grid + j)] = eig[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].vectors.col(band);
      }
    }
    out.sums.push_back(plaquette_sum(grid, grid, [&](int i, int j) -> const ComplexVector& {
      return vecs[static_cast<std::size_t>((i % grid) * grid + (j % grid))];
    }));
  }
  return out;
}

std::vector<int> static_cherns(const ModelFamily& family, const std::vector<int>& bands, int grid) {
  if (grid < 4 || grid > kMaxStaticGrid) throw ContractError("chern_static: grid must be in [4, 512]");
  for (int b : bands) {
    if (b < 0 || b >= family.dim) throw ContractError("chern_static: band out of range");
  }
  std::vector<int> previous;
  bool previous_ok = false;
  for (int g = grid;; g *= 2) {
    const StaticGridResult r = static_grid(family, bands, g);
    bool admissible = true;
    std::vector<int> current;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (r.separation[b] < kGaplessThreshold) {
        std::ostringstream os;
        os << "chern_static: band " << bands[b] << " is gapless on the " << g << "^2 grid (separation "
           << r.separation[b] << ")";
        throw DegeneracyError(os.str());
      }
      admissible = admissible && r.sums[b].admissible();
      current.push_back(static_cast<int>(std::lround(r.sums[b].sum / kTwoPi)));
    }
    if (admissible && (previous_ok && previous == current)) return current;
    if (2 * g > kMaxStaticGrid) {
      if (admissible) return current;
      throw GridError("chern_static: no admissible grid up to 512^2");
    }
    previous = current;
    previous_ok = admissible;
  }
}

}  // namespace

int chern_static(const ModelFamily& family, int band, int grid) {
  return static_cherns(family, {band}, grid).front();
}

std::vector<int> chern_static_all(const ModelFamily& family, int grid) {
  std::vector<int> bands(static_cast<std::size_t>(family.dim));
  std::iota(bands.begin(), bands.end(), 0);
  return static_cherns(family, bands, grid);
}

double gap_around(const RealVector& phases, double target) {
  const Eigen::Index n = phases.size();
  if (n == 0) throw ContractError("gap_around: empty spectrum");
  if (n == 1) return kTwoPi;
  double above = kTwoPi;   // smallest d >= 0
  double below = -kTwoPi;  // largest d < 0
  double low = kTwoPi, high = -kTwoPi;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = wrap_phase(phases(i) - target);
    if (d >= 0.0) above = std::min(above, d);
    if (d < 0.0) below = std::max(below, d);
    low = std::min(low, d);
    high = std::max(high, d);
  }
  if (above == kTwoPi) above = low + kTwoPi;
  if (below == -kTwoPi) below = high - kTwoPi;
  return above - below;
}

double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double xtol) {
  if (!(b > a)) throw ContractError("golden_section_minimize: empty bracket");
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  double best_x = fc <= fd ? c : d;
  double best_f = std::min(fc, fd);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
      if (fc < best_f) best_f = fc, best_x = c;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
      if (fd < best_f) best_f = fd, best_x = d;
    }
  }
  return best_x;
}

GapReport min_gap(const BandSet& bands, double target_phase) {
  if (std::abs(target_phase) > 1e-12 && std::abs(std::abs(target_phase) - kPi) > 1e-12) {
    throw ContractError("min_gap: target phase must be 0 or pi");
  }
  const int nodes = static_cast<int>(bands.k_grid.size()) - 1;  // last node repeats the first
  if (nodes < 3) throw ContractError("min_gap: band set too small");
  std::vector<double> gap(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    RealVector phases(bands.dim());
    for (int b = 0; b < bands.dim(); ++b) phases(b) = wrap_phase(bands.quasienergy[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
    gap[static_cast<std::size_t>(j)] = gap_around(phases, target_phase);
  }

  GapReport report;
  report.target_phase = target_phase;
  const auto best = std::min_element(gap.begin(), gap.end());
  report.min_gap = *best;
  report.argmin_k = bands.k_grid[static_cast<std::size_t>(best - gap.begin())];
  if (!bands.floquet) return report;

  std::vector<std::pair<double, int>> minima;
  for (int j = 0; j < nodes; ++j) {
    const double here = gap[static_cast<std::size_t>(j)];
    if (here <= gap[static_cast<std::size_t>((j + nodes - 1) % nodes)] &&
        here <= gap[static_cast<std::size_t>((j + 1) % nodes)]) {
      minima.emplace_back(here, j);
    }
  }
  std::sort(minima.begin(), minima.end());
  if (minima.size() > 3) minima.resize(3);

  const auto probe = [&](double k) {
    return gap_around(unitary_eig(bands.floquet(k)).values, target_phase);
  };
  for (const auto& [value, j] : minima) {
    const double left = j == 0 ? bands.k_grid[static_cast<std::size_t>(nodes - 1)] - bands.period
                               : bands.k_grid[static_cast<std::size_t>(j - 1)];
    const double right = bands.k_grid[static_cast<std::size_t>(j + 1)];
    const double k = golden_section_minimize(probe, left, right, 1e-10);
    const double g = probe(k);
    if (g < report.min_gap) {
      report.min_gap = g;
      report.argmin_k = k < 0.0 ? k + bands.period : k;
    }
  }
  report.refined = true;
  return report;
}

std::vector<Rational> enclosure_winding(const FloquetField& field, double tau_center,
                                        double k_center, double radius, int loop_points) {
  if (!(radius > 0.0)) throw ContractError("enclosure_winding: radius must be positive");
  if (tau_center - radius <= 0.0) throw ContractError("enclosure_winding: loop reaches tau <= 0");
  if (loop_points < 16) throw ContractError("enclosure_winding: loop_points must be >= 16");
  const FloquetMap loop = [=](double theta) {
    return field(tau_center + radius * std::cos(theta), k_center + radius * std::sin(theta));
  };
  const BandSet bands = track_parameter(loop, kTwoPi, loop_points);
  for (std::size_t j = 0; j < bands.k_grid.size(); ++j) {
    RealVector phases(bands.dim());
    for (int b = 0; b < bands.dim(); ++b) phases(b) = wrap_phase(bands.quasienergy[static_cast<std::size_t>(b)][j]);
    const double sep = min_separation(phases);
    if (sep < 1e-7) {
      std::ostringstream os;
      os << "enclosure_winding: loop passes through a crossing (gap " << sep << " at theta "
         << bands.k_grid[j] << ")";
      throw NumericalError(os.str());
    }
  }
  return winding_numbers(bands);
}

double max_spectral_norm(const ModelFamily& family, int grid) {
  if (grid < 1) throw ContractError("max_spectral_norm: grid must be positive");
  std::vector<double> row_max(static_cast<std::size_t>(grid), 0.0);
  parallel_for(row_max.size(), [&](std::size_t i) {
    const double s = family.s_period * static_cast<double>(i) / grid;
    for (int j = 0; j < grid; ++j) {
      const RealVector v = hermitian_eig(family.evaluate(s, family.k_period * j / grid)).values;
      row_max[i] = std::max({row_max[i], std::abs(v(0)), std::abs(v(v.size() - 1))});
    }
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

double quasienergy_bound_excess(const BandSet& bands, double max_norm) {
  const double bound = kTwoPi * bands.tau * max_norm;
  if (bound >= kPi) return 0.0;
  double excess = 0.0;
  for (const auto& band : bands.quasienergy) {
    for (double e : band) excess = std::max(excess, std::abs(wrap_phase(e)) - bound);
  }
  return excess;
}

}  // namespace fchern
