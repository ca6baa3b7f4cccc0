#include "fchern/error.hpp"
#include "fchern/models.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace fchern;

namespace {

std::vector<ModelFamily> all_families() {
  return {harper_family(1, 3), harper_family(1, 4), harper_family(2, 5, 0.5), h1_family(), h2_family(0.0),
          h2_family(0.2), h2_family(2.0)};
}

}  // namespace

TEST_CASE("families are Hermitian and 2pi-periodic in both arguments") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (const ModelFamily& f : all_families()) {
    CAPTURE(f.name);
    for (int i = 0; i < 25; ++i) {
      const double s = u(rng);
      const double k = u(rng);
      const ComplexMatrix h = f(s, k);
      CHECK(h.rows() == f.dim);
      CHECK(hermiticity_residual(h) < 1e-15);
      CHECK(max_abs(h - f(s + kTwoPi, k)) < 1e-12);
      CHECK(max_abs(h - f(s, k + kTwoPi)) < 1e-12);
      CHECK(hermiticity_residual(f.evaluate_dk(s, k)) < 1e-15);
    }
  }
}

TEST_CASE("analytic dH/dk agrees with a central difference") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (const ModelFamily& f : all_families()) {
    CAPTURE(f.name);
    const MatrixField fd = finite_difference_dk(f, 1e-5);
    for (int i = 0; i < 10; ++i) {
      const double s = u(rng);
      const double k = u(rng);
      CHECK(max_abs(f.evaluate_dk(s, k) - fd(s, k)) < 1e-8);
    }
  }
}

TEST_CASE("Harper cell matches the hopping definition") {
  const ModelFamily f = harper_family(1, 3);
  const double phi = 0.4;
  const double k = 1.1;
  const ComplexMatrix h = f(phi, k);
  for (int x = 0; x < 3; ++x) {
    CHECK(std::abs(h(x, x) - 2.0 * std::cos(kTwoPi * x / 3.0 + k)) < 1e-15);
    CHECK(std::abs(h(x, (x + 1) % 3) - std::polar(1.0, phi)) < 1e-15);
  }
  CHECK(f.drive_offset() == 0.0);
  CHECK(harper_family(1, 3, 1.5).drive_offset() == doctest::Approx(0.5));
  CHECK(harper_family(1, 3, 1.5).periodic_schedule().phi(0.0) == doctest::Approx(0.5));
}

TEST_CASE("invalid model parameters are rejected") {
  CHECK_THROWS_AS(harper_family(2, 4), InvalidModelError);
  CHECK_THROWS_AS(harper_family(0, 3), InvalidModelError);
  CHECK_THROWS_AS(harper_family(3, 3), InvalidModelError);
  CHECK_THROWS_AS(harper_family(1, 1), InvalidModelError);
  CHECK_THROWS_AS(h2_family(1.0), InvalidModelError);
  CHECK_THROWS_AS(h2_family(-1.0), InvalidModelError);
  ComplexMatrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(constant_family(bad), ContractError);
  CHECK_THROWS_AS(finite_difference_dk(h1_family(), 0.5), ContractError);
}

TEST_CASE("normalized two-band families have spectrum +-1") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (const ModelFamily& f : {h1_family(), h2_family(0.0), h2_family(-0.3)}) {
    for (int i = 0; i < 20; ++i) {
      const ComplexMatrix h = f(u(rng), u(rng));
      CHECK(std::abs(h.trace()) < 1e-15);
      CHECK(max_abs(h * h - ComplexMatrix::Identity(2, 2)) < 1e-14);
    }
  }
}

TEST_CASE("closed-form Floquet matrix is unitary with unit determinant") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix f = simon_floquet(u(rng), u(rng));
    CHECK(unitarity_residual(f) < 1e-15);
    CHECK(std::abs(f.determinant() - 1.0) < 1e-15);
  }
  CHECK_THROWS_AS(simon_floquet(0.0, 0.0), ContractError);
  CHECK_THROWS_AS(simon_floquet(-1.0, 0.0), ContractError);
}

TEST_CASE("drive schedules") {
  const DriveSchedule pulse = DriveSchedule::pulse();
  CHECK(pulse.phi(-1.0) == 0.0);
  CHECK(pulse.phi(2.0) == 2.0);
  CHECK(pulse.phi(10.0) == doctest::Approx(kTwoPi));
  CHECK(pulse.kinks() == std::vector<double>{0.0, kTwoPi});

  const DriveSchedule smooth = DriveSchedule::smooth_pulse();
  CHECK(smooth.phi(0.0) == 0.0);
  CHECK(smooth.phi(kTwoPi) == doctest::Approx(kTwoPi));
  CHECK(smooth.phi(20.0) == doctest::Approx(kTwoPi));
  // Rate is continuous and vanishes at both ends.
  auto rate = [&](double s) { return (smooth.phi(s + 1e-6) - smooth.phi(s - 1e-6)) / 2e-6; };
  CHECK(std::abs(rate(0.0)) < 1e-5);
  CHECK(std::abs(rate(kTwoPi)) < 1e-5);
  for (double knot : smooth.kinks()) {
    CHECK(std::abs(rate(knot - 1e-4) - rate(knot + 1e-4)) < 1e-3);
  }
  for (double s = 0.0; s < kTwoPi; s += 0.05) CHECK(smooth.phi(s + 0.05) >= smooth.phi(s));

  const DriveSchedule periodic = DriveSchedule::periodic(0.25);
  CHECK(periodic.phi(3.0) == doctest::Approx(3.25));
  CHECK(periodic.kinks().empty());
  CHECK(DriveSchedule::frozen(1.5).phi(100.0) == 1.5);
}

TEST_CASE("constant family ignores both arguments") {
  std::mt19937_64 rng(25);
  const ComplexMatrix h = oracle::random_hermitian(3, rng);
  const ModelFamily f = constant_family(h);
  CHECK(max_abs(f(1.0, 2.0) - h) == 0.0);
  CHECK(max_abs(f.evaluate_dk(1.0, 2.0)) == 0.0);
}
