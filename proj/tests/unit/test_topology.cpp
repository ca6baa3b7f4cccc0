#include "fchern/error.hpp"
#include "fchern/propagator.hpp"
#include "fchern/topology.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fchern;

namespace {

std::vector<long> sorted_numerators(const std::vector<Rational>& w) {
  std::vector<long> n;
  for (const Rational& r : w) {
    REQUIRE(r.den == 1);
    n.push_back(r.num);
  }
  std::sort(n.begin(), n.end());
  return n;
}

FloquetMap simon_map(double tau) {
  return [tau](double k) { return simon_floquet(tau, k); };
}

// F at k = pi/2 for the eps = 0 two-band family, where H(s) = cos s sx - sin s sy
// is a uniform rotation about z and the rotating frame makes the problem static.
ComplexMatrix h2_quarter_closed_form(double tau) {
  const ComplexMatrix gen = tau * oracle::pauli_x() + 0.5 * oracle::pauli_z();
  return -oracle::taylor_expm(Complex(0.0, -kTwoPi) * gen);
}

}  // namespace

namespace doctest {
template <>
struct StringMaker<Rational> {
  static String convert(const Rational& r) {
    return (std::to_string(r.num) + "/" + std::to_string(r.den)).c_str();
  }
};
}  // namespace doctest

TEST_CASE("rational arithmetic") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-3, -6) == Rational(1, 2));
  CHECK(Rational(3, -6).num == -1);
  CHECK(Rational(3, -6).den == 2);
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) + Rational(-1, 2) == Rational(0));
  CHECK(Rational(0, 5).den == 1);
  CHECK(Rational(7, 4).value() == 1.75);
  CHECK_THROWS_AS(Rational(1, 0), ContractError);
  CHECK(snap_rational(0.50001, 2, 1e-4, "x") == Rational(1, 2));
  CHECK(snap_rational(-2.99999, 1, 1e-4, "x") == Rational(-3));
  CHECK_THROWS_AS(snap_rational(0.3, 2, 1e-4, "x"), NumericalError);
}

TEST_CASE("golden-section search") {
  const double x = golden_section_minimize([](double t) { return (t - 1.3) * (t - 1.3); }, 0.0, 3.0, 1e-10);
  CHECK(x == doctest::Approx(1.3).epsilon(1e-8));
  const double edge = golden_section_minimize([](double t) { return t; }, 0.5, 2.0, 1e-10);
  CHECK(edge == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("gap around 0 and pi for a static two-level operator") {
  // F = exp(-i 2pi tau sz/2) at tau = 1/4 has phases -+pi/4.
  const ModelFamily f = constant_family(0.5 * oracle::pauli_z());
  const BandSet b = track_bands(f, 0.25, 128);
  const GapReport g0 = min_gap(b, 0.0);
  const GapReport gpi = min_gap(b, kPi);
  CHECK(g0.min_gap == doctest::Approx(kPi / 2).epsilon(1e-10));
  CHECK(gpi.min_gap == doctest::Approx(3 * kPi / 2).epsilon(1e-10));
  RealVector phases(2);
  phases << -kPi / 4, kPi / 4;
  CHECK(gap_around(phases, 0.0) == doctest::Approx(kPi / 2));
  CHECK(gap_around(phases, kPi) == doctest::Approx(3 * kPi / 2));
  for (const Rational& w : winding_numbers(b)) CHECK(w == Rational(0));
}

TEST_CASE("closed-form operator: windings at the degenerate drive period") {
  // At tau = 1/pi the operator is -diag(e^{ik}, e^{-ik}); the two branches
  // wind once in opposite directions.
  const BandSet b = track_bands(simon_map(1.0 / kPi), 256);
  CHECK(b.order == 1);
  CHECK(sorted_numerators(winding_numbers(b)) == std::vector<long>{-1, 1});
  const BandSet gapped = track_bands(simon_map(1.0), 128);
  CHECK(sorted_numerators(winding_numbers(gapped)) == std::vector<long>{0, 0});
}

TEST_CASE("constant operator has zero windings") {
  std::mt19937_64 rng(51);
  const ComplexMatrix u = oracle::random_unitary(3, rng);
  const BandSet b = track_bands([u](double) { return u; }, 128);
  CHECK(sorted_numerators(winding_numbers(b)) == std::vector<long>{0, 0, 0});
  CHECK(b.permutation == std::vector<int>{0, 1, 2});
}

TEST_CASE("bands exchanged over one period give half-integer windings") {
  // Eigenvalues +-e^{ik/2}: the branches swap at k = 2pi and close after 4pi.
  const FloquetMap swap = [](double k) {
    ComplexMatrix f(2, 2);
    f << 0, std::polar(1.0, k), 1, 0;
    return f;
  };
  const BandSet b = track_bands(swap, 128);
  CHECK(b.order == 2);
  CHECK(b.permutation == std::vector<int>{1, 0});
  CHECK(b.cycle_length == std::vector<int>{2, 2});
  for (const Rational& w : winding_numbers(b)) CHECK(w == Rational(-1, 2));
  const auto ext = b.extended(0);
  CHECK(ext.k.back() == doctest::Approx(4 * kPi));
  CHECK(ext.quasienergy.back() - ext.quasienergy.front() == doctest::Approx(kTwoPi).epsilon(1e-9));
}

TEST_CASE("tracked bands are continuous and start at the sorted phases") {
  const BandSet b = track_bands(harper_family(1, 3), 1.5, 128);
  const EigenSystem e0 = unitary_eig(b.floquet(0.0));
  for (int n = 0; n < b.dim(); ++n) {
    CHECK(b.quasienergy[n][0] == doctest::Approx(e0.values(n)));
    for (std::size_t j = 1; j < b.k_grid.size(); ++j) {
      CHECK(std::abs(b.quasienergy[n][j] - b.quasienergy[n][j - 1]) < kPi / 4);
    }
  }
  std::vector<int> p = b.permutation;
  std::sort(p.begin(), p.end());
  CHECK(p == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(track_bands(harper_family(1, 3), 1.5, 64), ContractError);
}

TEST_CASE("static lattice Chern numbers") {
  CHECK(chern_static_all(harper_family(1, 3)) == std::vector<int>{3, -6, 3});
  const auto h1 = chern_static_all(h1_family());
  CHECK(std::abs(h1[0]) == 1);
  CHECK(h1[0] + h1[1] == 0);
  const auto h2 = chern_static_all(h2_family(0.0));
  CHECK(std::abs(h2[0]) == 2);
  CHECK(h2[0] + h2[1] == 0);
  CHECK(chern_static_all(h2_family(2.0)) == std::vector<int>{0, 0});
  CHECK_THROWS_AS(chern_static(constant_family(ComplexMatrix::Identity(2, 2)), 0), DegeneracyError);
  CHECK_THROWS_AS(chern_static(h1_family(), 2), ContractError);
}

TEST_CASE("Floquet Chern number equals the winding in the adiabatic regime") {
  const ModelFamily f = harper_family(1, 3);
  const BandSet b = track_bands(f, 5.0, 256);
  // Which branch carries -6 depends on where the phases sit at k = 0.
  const auto w = winding_numbers(b);
  const auto it = std::find(w.begin(), w.end(), Rational(-6));
  REQUIRE(it != w.end());
  const int band = static_cast<int>(it - w.begin());
  CHECK(floquet_chern(f, b, band) == Rational(-6));
}

TEST_CASE("Floquet Chern number on a two-band family") {
  const ModelFamily f = h2_family(0.2);
  const BandSet b = track_bands(f, 1.2, 128);
  for (int n = 0; n < 2; ++n) CHECK(floquet_chern(f, b, n) == winding_number(b, n));
  CHECK_THROWS_AS(floquet_chern(f, b, 0, 2), GridError);
}

TEST_CASE("polished minimum never exceeds the node minimum") {
  const BandSet b = track_bands(h2_family(0.2), 2.0, 128);
  for (double target : {0.0, kPi}) {
    double coarse = 1e9;
    for (std::size_t j = 0; j + 1 < b.k_grid.size(); ++j) {
      RealVector ph(b.dim());
      for (int n = 0; n < b.dim(); ++n) ph(n) = wrap_phase(b.quasienergy[n][j]);
      coarse = std::min(coarse, gap_around(ph, target));
    }
    const GapReport g = min_gap(b, target);
    CHECK(g.min_gap <= coarse + 1e-15);
    CHECK(g.argmin_k >= 0.0);
    CHECK(g.argmin_k <= kTwoPi);
  }
}

TEST_CASE("two-band Floquet operator at k = pi/2 against the rotating-frame closed form") {
  const ModelFamily f = h2_family(0.0);
  for (double tau : {0.4, 0.7, 1.3, 2.2}) {
    CHECK(max_abs(floquet_operator(f, tau, kPi / 2, 1e-11) - h2_quarter_closed_form(tau)) < 1e-8);
  }
}

TEST_CASE("pi gap closes where the rotating-frame frequency is one") {
  // |(tau, 1/2)| = 1 gives F(pi/2) = -1.
  const double tau_c = std::sqrt(0.75);
  const BandSet b = track_bands(h2_family(0.0), tau_c, 128);
  CHECK(min_gap(b, kPi).min_gap < 1e-6);
  const BandSet off = track_bands(h2_family(0.0), 1.2, 128);
  CHECK(min_gap(off, kPi).min_gap > 1e-2);
}

TEST_CASE("enclosure loops") {
  const FloquetField simon = [](double tau, double k) { return simon_floquet(tau, k); };
  const auto w = enclosure_winding(simon, 0.6, 1.0, 0.1, 64);
  CHECK(sorted_numerators(w) == std::vector<long>{0, 0});
  CHECK_THROWS_AS(enclosure_winding(simon, 0.05, 0.0, 0.1, 64), ContractError);
  CHECK_THROWS_AS(enclosure_winding(simon, 0.6, 0.0, 0.1, 8), ContractError);
  // With an even number of loop points one node lands on the crossing at (1/pi, 0).
  CHECK_THROWS_AS(enclosure_winding(simon, 1.0 / kPi + 0.05, 0.0, 0.05, 64), NumericalError);
}

TEST_CASE("short periods respect the quasienergy bound and have no winding") {
  for (const ModelFamily& f : {harper_family(1, 3), h1_family(), h2_family(0.3)}) {
    const double norm = max_spectral_norm(f);
    CHECK(norm > 0.0);
    const BandSet b = track_bands(f, 0.2 / norm, 128);
    CHECK(quasienergy_bound_excess(b, norm) <= 1e-6);
    for (const Rational& r : winding_numbers(b)) CHECK(r == Rational(0));
  }
}

TEST_CASE("windings sum to zero for determinant-one operators") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> tau(0.2, 3.0);
  for (int i = 0; i < 4; ++i) {
    const BandSet b = track_bands(simon_map(tau(rng)), 128);
    Rational sum(0);
    for (const Rational& r : winding_numbers(b)) sum = sum + r;
    CHECK(sum == Rational(0));
  }
  const BandSet h = track_bands(harper_family(1, 3), 2.0, 128);
  Rational sum(0);
  for (const Rational& r : winding_numbers(h)) sum = sum + r;
  CHECK(sum == Rational(0));
}
