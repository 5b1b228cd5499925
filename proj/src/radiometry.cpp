#include "thermolux/radiometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "thermolux/errors.hpp"

namespace thermolux {
namespace {

using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr unsigned kMaxDepth = 20;
constexpr std::size_t kRegimeSamples = 2048;

// ln(1 - e^-u) for u > 0.
double log1mexp(double u) {
  return u < std::numbers::ln2 ? std::log(-std::expm1(-u)) : std::log1p(-std::exp(-u));
}

// Integral of u^2 e^-u from `cut` to infinity; both constant integrands are
// bounded by it and approach it times e^-1.
double exponential_tail(double cut) { return std::exp(-cut) * (cut * cut + 2.0 * cut + 2.0); }

template <class F>
Integral integrate(F f, double a, double b, double rel_tol, const char* what) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = Quadrature::integrate(f, a, b, kMaxDepth, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > rel_tol * std::max(l1, std::abs(value)) * 10.0) {
    const double achieved = l1 > 0.0 ? error / l1 : error;
    std::ostringstream os;
    os << what << " quadrature did not converge (relative error " << achieved << ")";
    throw NumericalError(os.str(), achieved);
  }
  return {value, error};
}

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Two-point weight on the top level written in terms of rho = rP / h nu,
// finite for every rho >= 0 (x_m = rho / (1 + rho) may round to 1).
double top_weight_from_occupation(double rho) {
  if (rho == 0.0) return 1.0 / std::numbers::e;
  if (std::isinf(rho)) return 0.5;
  return 1.0 / (std::exp(std::log1p(rho) / rho) + rho / (1.0 + rho));
}

double occupation(double nu, double energy, const PhysicalConstants& c) { return energy / (c.h * nu); }

// Upper integration limit: the band edge, or kDimensionlessCut * kT/h for
// unbounded planck bands.
double effective_upper(const RadiometricScene& scene, const PhysicalConstants& c) {
  if (scene.band.bounded()) return scene.band.hi;
  return kDimensionlessCut * c.k * *scene.model.temperature() / c.h;
}

double mode_prefactor(const RadiometricScene& scene, const PhysicalConstants& c) {
  return 2.0 * scene.duration * scene.solid_angle * scene.area / (c.c * c.c);
}

void require_planck(const RadiometricScene& scene) {
  if (!scene.model.temperature()) throw DomainError("a planck signal model is required");
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(h > 0.0 && k > 0.0 && c > 0.0)) throw DomainError("physical constants must be positive");
}

SignalModel SignalModel::planck(double temperature, const PhysicalConstants& constants) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be positive");
  const double h = constants.h;
  const double kT = constants.k * temperature;
  return SignalModel(
      "planck:" + format(temperature),
      [h, kT](double nu) {
        const double e = h * nu;
        return e / std::expm1(e / kT);
      },
      temperature);
}

SignalModel SignalModel::flat(double energy) {
  if (!(energy >= 0.0) || !std::isfinite(energy)) throw DomainError("flat model energy must be nonnegative");
  return SignalModel("flat:" + format(energy), [energy](double) { return energy; }, std::nullopt);
}

SignalModel SignalModel::custom(std::string name, std::function<double(double)> energy) {
  return SignalModel(std::move(name), std::move(energy), std::nullopt);
}

bool FrequencyBand::bounded() const noexcept { return std::isfinite(hi); }

std::vector<std::string> validate_scene(const RadiometricScene& s, const PhysicalConstants& c) {
  c.validate();
  if (!(s.area > 0.0) || !std::isfinite(s.area)) throw DomainError("area must be positive");
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw DomainError("duration must be positive");
  if (!(s.solid_angle > 0.0 && s.solid_angle <= 2.0 * std::numbers::pi * (1.0 + 1e-15))) {
    throw DomainError("solid angle must lie in (0, 2 pi]");
  }
  if (!(s.band.lo >= 0.0) || !(s.band.lo < s.band.hi)) throw DomainError("band needs 0 <= nu_lo < nu_hi");
  if (!s.band.bounded() && !s.model.temperature()) {
    throw DomainError("an unbounded band needs a planck model");
  }

  std::vector<std::string> warnings;
  const double spatial_lo = s.band.lo * s.band.lo * s.solid_angle * s.area / (c.c * c.c);
  const double temporal = s.duration * s.band.width();
  const double modes = spatial_lo == 0.0 ? 0.0 : spatial_lo * temporal;
  if (!(modes >= kValidityThreshold)) {
    warnings.push_back("geometric optics: nu^2 Omega S tau dnu / c^2 = " + format(modes) +
                       " at the lower band edge is not much greater than 1");
  }
  if (!(temporal >= kValidityThreshold)) {
    warnings.push_back("band-time product (nu_hi - nu_lo) tau = " + format(temporal) +
                       " is not much greater than 1");
  }

  // Largest mean occupation across the band.
  double peak = 0.0;
  if (s.model.temperature()) {
    peak = s.band.lo == 0.0 ? std::numeric_limits<double>::infinity()
                            : occupation(s.band.lo, s.model.energy(s.band.lo), c);
  } else {
    const double hi = effective_upper(s, c);
    for (std::size_t i = 0; i <= kRegimeSamples; ++i) {
      const double nu = s.band.lo + (hi - s.band.lo) * static_cast<double>(i) / kRegimeSamples;
      if (nu > 0.0) peak = std::max(peak, occupation(nu, s.model.energy(nu), c));
    }
  }
  if (peak > kTwoLevelOccupationLimit) {
    warnings.push_back("mean occupation r P / h nu reaches " + format(peak) +
                       " > 9 in the band; the two-level capacity formula is not exact there");
  }
  return warnings;
}

DegreesOfFreedom degrees_of_freedom(const RadiometricScene& scene, const PhysicalConstants& c) {
  if (!(scene.band.hi > scene.band.lo)) throw DomainError("empty frequency band");
  if (!scene.band.bounded()) throw DomainError("an unbounded band has no finite mode count");
  const double nu = scene.band.center();
  DegreesOfFreedom dof;
  dof.spatial = nu * nu * scene.solid_angle * scene.area / (c.c * c.c);
  dof.temporal = scene.duration * scene.band.width();
  dof.total = 2.0 * dof.spatial * dof.temporal;
  return dof;
}

ResolutionCell resolution_cell(const RadiometricScene& scene, double nu, const PhysicalConstants& c) {
  if (!(nu > 0.0)) throw DomainError("frequency must be positive");
  return {c.c * c.c / (nu * nu * scene.solid_angle), 1.0 / scene.duration};
}

SignalLevel level_from_energy(double nu, double energy, const PhysicalConstants& c) {
  if (!(nu > 0.0)) throw DomainError("frequency must be positive");
  if (!(energy >= 0.0)) throw DomainError("recorded energy must be nonnegative");
  const double rho = occupation(nu, energy, c);
  return SignalLevel(rho / (1.0 + rho));
}

double per_oscillator_info(double nu, double energy, const PhysicalConstants& c) {
  if (!(nu > 0.0)) throw DomainError("frequency must be positive");
  if (!(energy >= 0.0)) throw DomainError("recorded energy must be nonnegative");
  const double rho = occupation(nu, energy, c);
  if (rho == 0.0) return 0.0;
  if (std::isinf(rho)) return std::numbers::ln2;
  // (h nu / (rP + h nu))^(h nu / rP) = exp(-ln(1 + rho) / rho)
  return std::log1p(rho / (1.0 + rho) * std::exp(-std::log1p(rho) / rho));
}

bool exceeds_two_level_regime(double nu, double energy, const PhysicalConstants& c) {
  return occupation(nu, energy, c) > kTwoLevelOccupationLimit;
}

Integral total_info(const RadiometricScene& scene, const PhysicalConstants& c) {
  if (scene.band.lo == scene.band.hi && scene.band.lo >= 0.0) return {};
  validate_scene(scene, c);
  const double pre = mode_prefactor(scene, c);
  auto f = [&](double nu) { return nu * nu * per_oscillator_info(nu, scene.model.energy(nu), c); };
  Integral r = integrate(f, scene.band.lo, effective_upper(scene, c), kBandRelativeTolerance, "J_m");
  if (!scene.band.bounded()) {
    // I_m <= x_m = e^-u beyond the cut.
    const double scale = c.k * *scene.model.temperature() / c.h;
    r.error += std::pow(scale, 3) * exponential_tail(kDimensionlessCut);
  }
  return {pre * r.value, pre * r.error};
}

Integral photon_count(const RadiometricScene& scene, const PhysicalConstants& c) {
  if (scene.band.lo == scene.band.hi && scene.band.lo >= 0.0) return {};
  validate_scene(scene, c);
  const double pre = mode_prefactor(scene, c);
  auto f = [&](double nu) {
    const double rho = occupation(nu, scene.model.energy(nu), c);
    return nu * nu * top_weight_from_occupation(rho) * rho;
  };
  Integral r = integrate(f, scene.band.lo, effective_upper(scene, c), kBandRelativeTolerance, "photon count");
  if (!scene.band.bounded()) {
    const double scale = c.k * *scene.model.temperature() / c.h;
    r.error += std::pow(scale, 3) * exponential_tail(kDimensionlessCut);
  }
  return {pre * r.value, pre * r.error};
}

double sigma_integrand(double u) {
  if (!(u > 0.0)) return 0.0;
  // e^-u (1 - e^-u)^(e^u - 1)
  const double inner = std::exp(-u + std::expm1(u) * log1mexp(u));
  return u * u * std::log1p(inner);
}

double eta_integrand(double u) {
  if (!(u > 0.0)) return 0.0;
  const double lg = log1mexp(u);
  const double num = std::exp(std::expm1(u) * lg);  // (1 - e^-u)^(e^u - 1)
  const double den = std::expm1(u) + num * -std::expm1(-u);  // (e^u - 1) + (1 - e^-u)^(e^u)
  return u * u * num / den;
}

Integral sigma_integral(double rel_tol) {
  Integral r = integrate(sigma_integrand, 0.0, kDimensionlessCut, rel_tol, "sigma");
  const double tail = exponential_tail(kDimensionlessCut);
  r.value += tail / std::numbers::e;
  r.error += tail;
  return r;
}

Integral eta_integral(double rel_tol) {
  Integral r = integrate(eta_integrand, 0.0, kDimensionlessCut, rel_tol, "eta");
  const double tail = exponential_tail(kDimensionlessCut);
  r.value += tail / std::numbers::e;
  r.error += tail;
  return r;
}

const Integral& sigma_constant() {
  static const Integral cached = sigma_integral();
  return cached;
}

const Integral& eta_constant() {
  static const Integral cached = eta_integral();
  return cached;
}

double nats_per_photon() { return sigma_constant().value / eta_constant().value; }

double bits_per_photon() { return nats_per_photon() / std::numbers::ln2; }

double planck_prefactor(const RadiometricScene& scene, const PhysicalConstants& c) {
  require_planck(scene);
  const double kT = c.k * *scene.model.temperature();
  return mode_prefactor(scene, c) * std::pow(kT / c.h, 3);
}

double planck_total_info(const RadiometricScene& scene, const PhysicalConstants& c) {
  return planck_prefactor(scene, c) * sigma_constant().value;
}

double photon_count_total(const RadiometricScene& scene, const PhysicalConstants& c) {
  return planck_prefactor(scene, c) * eta_constant().value;
}

double max_rate(double temperature, const PhysicalConstants& c) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  const double kT = c.k * temperature;
  return 4.0 * std::numbers::pi * kT * kT * kT * sigma_constant().value / (c.c * c.c * c.h * c.h * c.h);
}

double flux(double temperature, const PhysicalConstants& c) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  const double kT = c.k * temperature;
  const double pi5 = std::pow(std::numbers::pi, 5);
  return 4.0 * pi5 * kT * kT * kT * kT / (15.0 * c.c * c.c * c.h * c.h * c.h);
}

double max_rate_from_flux(double flux_w_m2, const PhysicalConstants& c) {
  if (!(flux_w_m2 >= 0.0)) throw DomainError("flux must be nonnegative");
  const double pi = std::numbers::pi;
  return sigma_constant().value * std::numbers::sqrt2 / (pi * pi * std::sqrt(c.c)) *
         std::pow(15.0 * flux_w_m2 / (pi * c.h), 0.75);
}

}  // namespace thermolux
