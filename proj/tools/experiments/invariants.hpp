#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fchern::cli {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Structural checks on randomly drawn (model, tau) points: winding sums,
/// winding vs plaquette Floquet Chern number, s-independence of the
/// quasienergies, unitarity and determinant of F, the small-tau quasienergy
/// bound, and gauge-phase invariance. Deterministic for a given seed.
std::vector<CheckOutcome> run_invariant_suite(unsigned long seed, std::ostream* progress = nullptr);

}  // namespace fchern::cli
