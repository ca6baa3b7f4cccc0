#pragma once

// Two-parameter Hamiltonian families H(s, k) and drive schedules phi(s).

#include "fchern/linalg.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fchern {

using MatrixField = std::function<ComplexMatrix(double s, double k)>;

enum class DriveMode { pulse, smooth_pulse, periodic, frozen };

/// Maps scaled time s to the family's first argument phi(s), plus a
/// constant offset.
///
///   pulse        phi = 0 (s < 0), s (0 <= s <= 2pi), 2pi (s > 2pi)
///   smooth_pulse C^1 variant of pulse with cosine ramps of the rate on
///                [0, pi/4] and [7pi/4, 2pi]; same end values
///   periodic     phi = s (Floquet drive)
///   frozen       phi = value for all s (no field)
class DriveSchedule {
 public:
  static DriveSchedule pulse(double offset = 0.0);
  static DriveSchedule smooth_pulse(double offset = 0.0);
  static DriveSchedule periodic(double offset = 0.0);
  static DriveSchedule frozen(double value);

  double phi(double s) const;
  /// Points where phi is not smooth. Propagation aligns step boundaries to them.
  std::vector<double> kinks() const;

  DriveMode mode() const { return mode_; }
  double offset() const { return offset_; }

 private:
  DriveSchedule(DriveMode mode, double offset) : mode_(mode), offset_(offset) {}

  DriveMode mode_;
  double offset_;
};

/// Uniform descriptor of a family H(s, k), 2pi-periodic in both arguments
/// for every built-in model.
struct ModelFamily {
  std::string name;
  int dim = 0;
  double s_period = kTwoPi;
  double k_period = kTwoPi;
  MatrixField evaluate;
  /// dH/dk, the current operator.
  MatrixField evaluate_dk;
  std::map<std::string, double> params;

  ComplexMatrix operator()(double s, double k) const { return evaluate(s, k); }
  /// Offset added to phi by the drive schedules built for this family.
  double drive_offset() const;
  DriveSchedule periodic_schedule() const { return DriveSchedule::periodic(drive_offset()); }
  DriveSchedule pulse_schedule() const { return DriveSchedule::pulse(drive_offset()); }
};

/// Harper Hamiltonian on a q-site magnetic cell:
///   (H psi)_x = e^{i phi} psi_{x+1} + e^{-i phi} psi_{x-1} + 2 cos(2 pi p x / q + k) psi_x
/// with indices mod q. The offset ell/q enters through the drive schedule.
ModelFamily harper_family(int p, int q, double ell = 0.0);

/// Traceless 2x2 family with unit spectrum and band Chern numbers +-1.
ModelFamily h1_family();

/// Traceless 2x2 family a sz + (b + eps) sx + c sy, normalized, with
/// a = cos k, b = cos s, c = cos(s + k). Chern numbers +-2 for |eps| < 1.
ModelFamily h2_family(double epsilon);

/// s- and k-independent family; handy for tests and as a trivial reference.
ModelFamily constant_family(const ComplexMatrix& h, std::string name = "constant");

/// Closed-form 2x2 Floquet operator
///   [[cos(1/tau) e^{ik},  sin(1/tau)], [-sin(1/tau), cos(1/tau) e^{-ik}]]
/// with unit determinant.
ComplexMatrix simon_floquet(double tau, double k);

/// Central difference (H(s,k+h) - H(s,k-h)) / 2h, symmetrized to be exactly Hermitian.
MatrixField finite_difference_dk(const ModelFamily& family, double h);

}  // namespace fchern
