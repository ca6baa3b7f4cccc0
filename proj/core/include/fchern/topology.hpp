#pragma once

// Quasienergy band tracking, winding numbers, lattice Chern numbers and
// quasienergy gaps of Floquet operators.

#include "fchern/models.hpp"

#include <functional>
#include <vector>

namespace fchern {

/// Floquet operator as a function of one periodic parameter (usually k).
using FloquetMap = std::function<ComplexMatrix(double)>;
/// Floquet operator as a function of (tau, k).
using FloquetField = std::function<ComplexMatrix(double tau, double k)>;

FloquetMap floquet_map(const ModelFamily& family, double tau, double tol = 1e-9);
FloquetField floquet_field(const ModelFamily& family, double tol = 1e-9);

/// Exact fraction num/den with den > 0, kept in lowest terms.
struct Rational {
  long num = 0;
  long den = 1;

  Rational() = default;
  Rational(long n, long d = 1);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend Rational operator+(const Rational& a, const Rational& b);
};

/// Nearest fraction with denominator `den`; throws NumericalError if the
/// residual exceeds `tolerance`.
Rational snap_rational(double x, long den, double tolerance, const char* what);

struct CrossingFlag {
  double k;
  double gap;  // smallest circular separation of the phases at k
};

struct TrackingOptions {
  /// Overlap below which an interval is bisected.
  double min_overlap = 0.7;
  /// Largest quasienergy jump accepted between neighbours.
  double max_phase_step = kPi / 4.0;
  int max_refinement = 12;
  /// Below this overlap after full refinement tracking fails.
  double fail_overlap = 0.5;
};

/// Quasienergy bands followed continuously through one parameter period.
///
/// Band n starts at column n of the (phase-sorted) decomposition at the
/// first node. At the end of the period it lands on column permutation[n];
/// following the permutation, a band closes after cycle_length[n] periods.
struct BandSet {
  double tau = 0.0;
  double period = kTwoPi;
  std::vector<double> k_grid;                         // [0, period], refined nodes included
  std::vector<std::vector<double>> quasienergy;       // [band][node], unwrapped
  std::vector<std::vector<ComplexVector>> vectors;    // [band][node]
  std::vector<int> permutation;
  std::vector<int> cycle_length;
  int order = 1;  // lcm of the cycle lengths
  std::vector<CrossingFlag> crossing_flags;
  FloquetMap floquet;

  int dim() const { return static_cast<int>(quasienergy.size()); }

  struct Extended {
    std::vector<double> k;
    std::vector<double> quasienergy;
    std::vector<ComplexVector> vectors;
  };
  /// Band continued over its whole cycle, k in [0, cycle_length * period].
  Extended extended(int band) const;
};

/// Tracks the eigenphases of `floquet` over [0, period] sampled at `points`
/// uniform nodes, bisecting intervals where matching is ambiguous.
BandSet track_parameter(const FloquetMap& floquet, double period, int points,
                        const TrackingOptions& options = {});

/// Bands of F_tau(0, k) over one k period; k_points >= 128.
BandSet track_bands(const FloquetMap& floquet, int k_points, const TrackingOptions& options = {});
BandSet track_bands(const ModelFamily& family, double tau, int k_points, double tol = 1e-9,
                    const TrackingOptions& options = {});

/// -(E(2 pi N) - E(0)) / (2 pi N) over the band's cycle, snapped to an
/// integer over N (residual at most 1e-4).
Rational winding_number(const BandSet& bands, int band);
std::vector<Rational> winding_numbers(const BandSet& bands);

/// Chern number of the Floquet eigenprojection bundle over s in [0, 2pi] and
/// k in [0, 2pi N], with eigenvectors transported in s by the propagator.
/// s_points = 0 picks a grid from tau and |H| and doubles it until every
/// plaquette angle is below pi/2.
Rational floquet_chern(const ModelFamily& family, const BandSet& bands, int band,
                       int s_points = 0, double tol = 1e-9);

/// Lattice Chern number of the band-th eigenvector bundle of H(s, k) over
/// the parameter torus. Starts on a grid x grid lattice and doubles up to
/// 512 until two successive admissible lattices agree.
int chern_static(const ModelFamily& family, int band, int grid = 64);
std::vector<int> chern_static_all(const ModelFamily& family, int grid = 64);

struct GapReport {
  double target_phase = 0.0;
  double min_gap = 0.0;
  double argmin_k = 0.0;
  bool refined = false;
};

/// Width of the gap of `phases` that contains `target` (circular).
double gap_around(const RealVector& phases, double target);

/// Smallest gap around target_phase (0 or pi) over the band set's nodes,
/// polished by golden-section search in k (to 1e-10) on the Floquet map.
GapReport min_gap(const BandSet& bands, double target_phase);

/// Golden-section minimization of f over [a, b] to absolute width `xtol`.
/// Returns the abscissa of the smallest value seen.
double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double xtol);

/// Winding of each band around the loop (tau_c + r cos t, k_c + r sin t).
/// Throws NumericalError when the gap on the loop drops below 1e-7.
std::vector<Rational> enclosure_winding(const FloquetField& field, double tau_center,
                                        double k_center, double radius, int loop_points);

/// Largest spectral norm of H(s, k) on a grid x grid sample of the torus.
double max_spectral_norm(const ModelFamily& family, int grid = 64);

/// Amount by which any wrapped quasienergy exceeds 2 pi tau max|H| (zero
/// when the bound holds or when it exceeds pi and is vacuous).
double quasienergy_bound_excess(const BandSet& bands, double max_norm);

}  // namespace fchern
