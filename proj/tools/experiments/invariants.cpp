#include "experiments/invariants.hpp"

#include "fchern/error.hpp"
#include "fchern/propagator.hpp"
#include "fchern/topology.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace fchern::cli {

namespace {

constexpr int kTrackPoints = 128;
constexpr double kTol = 1e-9;

struct Point {
  std::string label;
  std::optional<ModelFamily> family;
  FloquetField field;
  double tau = 0.0;

  BandSet bands(double s0 = 0.0) const {
    FloquetMap map;
    if (s0 == 0.0 || !family) {
      map = [f = field, t = tau](double k) { return f(t, k); };
    } else {
      map = [fam = *family, t = tau, s0](double k) { return floquet_operator_at(fam, t, k, s0, kTol); };
    }
    BandSet b = track_bands(map, kTrackPoints);
    b.tau = tau;
    return b;
  }
};

Point make_point(int model, double eps, double tau) {
  Point p;
  p.tau = tau;
  std::ostringstream os;
  switch (model) {
    case 0: p.family = harper_family(1, 3); os << "harper:p=1,q=3"; break;
    case 1: p.family = h1_family(); os << "h1"; break;
    case 2: p.family = h2_family(eps); os << "h2:eps=" << eps; break;
    default: os << "simon"; break;
  }
  os << " tau=" << tau;
  p.label = os.str();
  if (p.family) {
    p.field = floquet_field(*p.family, kTol);
  } else {
    p.field = [](double t, double k) { return simon_floquet(t, k); };
  }
  return p;
}

class Sampler {
 public:
  explicit Sampler(unsigned long seed) : rng_(seed) {}

  Point draw(bool need_family, double tau_lo, double tau_hi) {
    std::uniform_int_distribution<int> model(0, need_family ? 2 : 3);
    std::uniform_real_distribution<double> eps(-0.5, 0.5);
    std::uniform_real_distribution<double> tau(tau_lo, tau_hi);
    const int m = model(rng_);
    const double e = eps(rng_);
    return make_point(m, e, tau(rng_));
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

std::string text(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

CheckOutcome timed(const std::string& name, std::ostream* progress,
                   const std::function<std::string(bool&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckOutcome out;
  out.name = name;
  bool ok = true;
  try {
    out.detail = body(ok);
  } catch (const Error& e) {
    ok = false;
    out.detail = std::string("error: ") + e.what();
  }
  out.passed = ok;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (progress) {
    *progress << (out.passed ? "PASS " : "FAIL ") << out.name << " (" << out.seconds << " s): " << out.detail
              << "\n" << std::flush;
  }
  return out;
}

// Circular matching of two phase lists: largest distance from any phase to
// its nearest partner in the other list.
double spectrum_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& x = pass == 0 ? a : b;
    const auto& y = pass == 0 ? b : a;
    for (double p : x) {
      double best = kTwoPi;
      for (double q : y) best = std::min(best, std::abs(wrap_phase(p - q)));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

std::vector<double> wrapped_at(const BandSet& b, std::size_t node) {
  std::vector<double> v;
  for (const auto& band : b.quasienergy) v.push_back(wrap_phase(band[node]));
  return v;
}

}  // namespace

std::vector<CheckOutcome> run_invariant_suite(unsigned long seed, std::ostream* progress) {
  Sampler sampler(seed);
  std::vector<CheckOutcome> results;

  results.push_back(timed("winding sum vanishes (20 points)", progress, [&](bool& ok) {
    int good = 0;
    std::string failures;
    for (int i = 0; i < 20; ++i) {
      const Point p = sampler.draw(false, 0.2, 3.0);
      Rational sum(0);
      for (const Rational& w : winding_numbers(p.bands())) sum = sum + w;
      if (sum == Rational(0)) {
        ++good;
      } else {
        failures += " [" + p.label + ": sum " + text(sum) + "]";
      }
    }
    ok = good == 20;
    return std::to_string(good) + "/20 zero" + failures;
  }));

  results.push_back(timed("winding equals Floquet Chern number (10 points)", progress, [&](bool& ok) {
    int good = 0;
    int nonzero = 0;
    std::string failures;
    for (int i = 0; i < 10; ++i) {
      // The first point sits in the adiabatic regime where windings are nonzero.
      const Point p = i == 0 ? make_point(0, 0.0, 5.0) : sampler.draw(true, 0.2, 2.5);
      const BandSet b = p.bands();
      bool all = true;
      for (int n = 0; n < b.dim(); ++n) {
        const Rational w = winding_number(b, n);
        const Rational c = floquet_chern(*p.family, b, n, 0, kTol);
        if (w.num != 0) ++nonzero;
        if (!(w == c)) {
          all = false;
          failures += " [" + p.label + " band " + std::to_string(n) + ": " + text(w) + " vs " + text(c) + "]";
        }
      }
      good += all ? 1 : 0;
    }
    ok = good == 10;
    return std::to_string(good) + "/10 equal, " + std::to_string(nonzero) + " nonzero bands" + failures;
  }));

  results.push_back(timed("quasienergies independent of s0 (5 points)", progress, [&](bool& ok) {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Point p = sampler.draw(true, 0.2, 3.0);
      const BandSet a = p.bands(0.0);
      const BandSet b = p.bands(0.7);
      for (std::size_t ja = 0, jb = 0; ja < a.k_grid.size() && jb < b.k_grid.size();) {
        if (a.k_grid[ja] == b.k_grid[jb]) {
          worst = std::max(worst, spectrum_distance(wrapped_at(a, ja), wrapped_at(b, jb)));
          ++ja;
          ++jb;
        } else if (a.k_grid[ja] < b.k_grid[jb]) {
          ++ja;
        } else {
          ++jb;
        }
      }
    }
    ok = worst < 1e-8;
    std::ostringstream os;
    os << "largest spectral difference " << worst;
    return os.str();
  }));

  results.push_back(timed("Floquet operator unitary with unit determinant (20 points)", progress, [&](bool& ok) {
    double unitarity = 0.0;
    double det = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Point p = sampler.draw(false, 0.2, 5.0);
      const double k = sampler.uniform(0.0, kTwoPi);
      const ComplexMatrix f = p.field(p.tau, k);
      unitarity = std::max(unitarity, unitarity_residual(f));
      det = std::max(det, std::abs(f.determinant() - Complex(1.0, 0.0)));
    }
    ok = unitarity < 1e-10 && det < 1e-8;
    std::ostringstream os;
    os << "max unitarity residual " << unitarity << ", max |det F - 1| " << det;
    return os.str();
  }));

  results.push_back(timed("small-tau quasienergy bound and zero windings (6 points)", progress, [&](bool& ok) {
    double excess = 0.0;
    int zero = 0;
    for (int i = 0; i < 6; ++i) {
      const double eps = 0.1 * (i - 3);
      const double norm = max_spectral_norm(*make_point(i % 3, eps, 1.0).family);
      const Point p = make_point(i % 3, eps, sampler.uniform(0.02, 0.45) / norm);
      const BandSet b = p.bands();
      excess = std::max(excess, quasienergy_bound_excess(b, norm));
      bool all_zero = true;
      for (const Rational& w : winding_numbers(b)) all_zero = all_zero && w.num == 0;
      zero += all_zero ? 1 : 0;
    }
    ok = excess <= 1e-6 && zero == 6;
    std::ostringstream os;
    os << "largest bound excess " << excess << ", " << zero << "/6 with all windings zero";
    return os.str();
  }));

  results.push_back(timed("gauge-phase invariance (3 points)", progress, [&](bool& ok) {
    int good = 0;
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int i = 0; i < 3; ++i) {
      const Point p = i == 0 ? make_point(0, 0.0, 5.0) : sampler.draw(true, 0.2, 2.5);
      const BandSet b = p.bands();
      BandSet g = b;
      for (auto& band : g.vectors) {
        for (auto& v : band) v *= std::polar(1.0, angle(sampler.rng()));
      }
      bool same = true;
      for (int n = 0; n < b.dim(); ++n) {
        same = same && winding_number(b, n) == winding_number(g, n);
        same = same && floquet_chern(*p.family, b, n, 0, kTol) == floquet_chern(*p.family, g, n, 0, kTol);
      }
      for (double target : {0.0, kPi}) {
        const GapReport x = min_gap(b, target);
        const GapReport y = min_gap(g, target);
        same = same && x.min_gap == y.min_gap && x.argmin_k == y.argmin_k;
      }
      good += same ? 1 : 0;
    }
    ok = good == 3;
    return std::to_string(good) + "/3 unchanged";
  }));

  return results;
}

}  // namespace fchern::cli
