#include "fchern/models.hpp"

#include "fchern/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fchern {

namespace {

constexpr double kRamp = kPi / 4.0;
constexpr Complex kI(0.0, 1.0);

// Integral of the smooth-pulse rate profile, before normalization.
double smooth_ramp_integral(double s) {
  if (s <= 0.0) return 0.0;
  const double plateau_end = kTwoPi - kRamp;
  const double total = kTwoPi - kRamp;
  auto ramp = [](double x) { return 0.5 * (x - (kRamp / kPi) * std::sin(kPi * x / kRamp)); };
  if (s <= kRamp) return ramp(s);
  if (s <= plateau_end) return 0.5 * kRamp + (s - kRamp);
  if (s <= kTwoPi) return total - ramp(kTwoPi - s);
  return total;
}

ComplexMatrix pauli_combination(double x, double y, double z) {
  ComplexMatrix m(2, 2);
  m(0, 0) = z;
  m(1, 1) = -z;
  m(0, 1) = Complex(x, -y);
  m(1, 0) = Complex(x, y);
  return m;
}

}  // namespace

DriveSchedule DriveSchedule::pulse(double offset) { return {DriveMode::pulse, offset}; }
DriveSchedule DriveSchedule::smooth_pulse(double offset) { return {DriveMode::smooth_pulse, offset}; }
DriveSchedule DriveSchedule::periodic(double offset) { return {DriveMode::periodic, offset}; }
DriveSchedule DriveSchedule::frozen(double value) { return {DriveMode::frozen, value}; }

double DriveSchedule::phi(double s) const {
  switch (mode_) {
    case DriveMode::pulse:
      return offset_ + std::clamp(s, 0.0, kTwoPi);
    case DriveMode::smooth_pulse:
      return offset_ + kTwoPi * smooth_ramp_integral(s) / (kTwoPi - kRamp);
    case DriveMode::periodic:
      return offset_ + s;
    case DriveMode::frozen:
      return offset_;
  }
  return offset_;
}

std::vector<double> DriveSchedule::kinks() const {
  switch (mode_) {
    case DriveMode::pulse:
      return {0.0, kTwoPi};
    case DriveMode::smooth_pulse:
      return {0.0, kRamp, kTwoPi - kRamp, kTwoPi};
    default:
      return {};
  }
}

double ModelFamily::drive_offset() const {
  const auto it = params.find("offset");
  return it == params.end() ? 0.0 : it->second;
}

ModelFamily harper_family(int p, int q, double ell) {
  if (q < 2 || p <= 0 || p >= q) {
    throw InvalidModelError("harper: need q >= 2 and 0 < p < q");
  }
  if (std::gcd(p, q) != 1) {
    std::ostringstream os;
    os << "harper: gcd(p, q) must be 1 (p=" << p << ", q=" << q << ")";
    throw InvalidModelError(os.str());
  }
  if (!std::isfinite(ell)) throw InvalidModelError("harper: ell must be finite");

  ModelFamily family;
  std::ostringstream name;
  name << "harper:p=" << p << ",q=" << q;
  if (ell != 0.0) name << ",ell=" << ell;
  family.name = name.str();
  family.dim = q;
  family.params = {{"p", p}, {"q", q}, {"ell", ell}, {"offset", ell / q}};

  const double flux = kTwoPi * static_cast<double>(p) / static_cast<double>(q);
  family.evaluate = [q, flux](double phi, double k) {
    ComplexMatrix h = ComplexMatrix::Zero(q, q);
    const Complex forward = std::polar(1.0, phi);
    for (int x = 0; x < q; ++x) {
      h((x + 1) % q, x) += std::conj(forward);
      h(x, (x + 1) % q) += forward;
      h(x, x) = 2.0 * std::cos(flux * x + k);
    }
    return h;
  };
  family.evaluate_dk = [q, flux](double, double k) {
    ComplexMatrix d = ComplexMatrix::Zero(q, q);
    for (int x = 0; x < q; ++x) d(x, x) = -2.0 * std::sin(flux * x + k);
    return d;
  };
  return family;
}

ModelFamily h1_family() {
  ModelFamily family;
  family.name = "h1";
  family.dim = 2;
  const double quarter = kPi / 4.0;

  // a(s, k) and da/dk
  auto a_of = [quarter](double s, double k) {
    return Complex(std::cos(k + quarter), std::cos(k - quarter)) +
           Complex(1.0, 1.0) * (std::cos(s) + 1.0);
  };
  auto da_of = [quarter](double k) {
    return Complex(-std::sin(k + quarter), -std::sin(k - quarter));
  };
  auto norm_sq = [a_of](double s, double k) {
    return std::pow(std::sin(s), 2) + std::norm(a_of(s, k));
  };

  family.evaluate = [a_of, norm_sq](double s, double k) {
    const double n2 = norm_sq(s, k);
    if (n2 < 1e-24) throw InvalidModelError("h1: normalization vanishes");
    const Complex a = a_of(s, k);
    return ComplexMatrix(pauli_combination(a.real(), -a.imag(), std::sin(s)) / std::sqrt(n2));
  };
  family.evaluate_dk = [a_of, da_of, norm_sq](double s, double k) {
    const double n2 = norm_sq(s, k);
    if (n2 < 1e-24) throw InvalidModelError("h1: normalization vanishes");
    const Complex a = a_of(s, k);
    const Complex da = da_of(k);
    const double dn2 = 2.0 * (std::conj(a) * da).real();
    const double inv = 1.0 / std::sqrt(n2);
    const ComplexMatrix m = pauli_combination(a.real(), -a.imag(), std::sin(s));
    const ComplexMatrix dm = pauli_combination(da.real(), -da.imag(), 0.0);
    return ComplexMatrix(dm * inv - m * (0.5 * dn2 * inv / n2));
  };
  return family;
}

ModelFamily h2_family(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon == 1.0 || epsilon == -1.0) {
    throw InvalidModelError("h2: eps = +-1 makes the normalization vanish");
  }
  ModelFamily family;
  std::ostringstream name;
  name << "h2:eps=" << epsilon;
  family.name = name.str();
  family.dim = 2;
  family.params = {{"eps", epsilon}};

  family.evaluate = [epsilon](double s, double k) {
    const double a = std::cos(k);
    const double b = std::cos(s) + epsilon;
    const double c = std::cos(s + k);
    const double n2 = a * a + b * b + c * c;
    if (n2 < 1e-24) throw InvalidModelError("h2: normalization vanishes");
    return ComplexMatrix(pauli_combination(b, c, a) / std::sqrt(n2));
  };
  family.evaluate_dk = [epsilon](double s, double k) {
    const double a = std::cos(k);
    const double b = std::cos(s) + epsilon;
    const double c = std::cos(s + k);
    const double da = -std::sin(k);
    const double dc = -std::sin(s + k);
    const double n2 = a * a + b * b + c * c;
    if (n2 < 1e-24) throw InvalidModelError("h2: normalization vanishes");
    const double inv = 1.0 / std::sqrt(n2);
    const double dn2 = 2.0 * (a * da + c * dc);
    const ComplexMatrix m = pauli_combination(b, c, a);
    const ComplexMatrix dm = pauli_combination(0.0, dc, da);
    return ComplexMatrix(dm * inv - m * (0.5 * dn2 * inv / n2));
  };
  return family;
}

ModelFamily constant_family(const ComplexMatrix& h, std::string name) {
  require_hermitian(h, "constant_family");
  ModelFamily family;
  family.name = std::move(name);
  family.dim = static_cast<int>(h.rows());
  family.evaluate = [h](double, double) { return h; };
  family.evaluate_dk = [n = h.rows()](double, double) { return ComplexMatrix(ComplexMatrix::Zero(n, n)); };
  return family;
}

ComplexMatrix simon_floquet(double tau, double k) {
  if (!(tau > 0.0) || !std::isfinite(tau) || !std::isfinite(k)) {
    throw ContractError("simon_floquet: need finite tau > 0 and finite k");
  }
  const double c = std::cos(1.0 / tau);
  const double s = std::sin(1.0 / tau);
  ComplexMatrix f(2, 2);
  f(0, 0) = c * std::exp(kI * k);
  f(0, 1) = s;
  f(1, 0) = -s;
  f(1, 1) = c * std::exp(-kI * k);
  return f;
}

MatrixField finite_difference_dk(const ModelFamily& family, double h) {
  if (!(h > 0.0 && h < 1e-2)) throw ContractError("finite_difference_dk: need 0 < h < 1e-2");
  return [evaluate = family.evaluate, h](double s, double k) {
    ComplexMatrix d = (evaluate(s, k + h) - evaluate(s, k - h)) / (2.0 * h);
    return ComplexMatrix(0.5 * (d + d.adjoint()));
  };
}

}  // namespace fchern
