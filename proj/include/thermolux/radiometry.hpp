#pragma once

// Mode counting and spectral integration for a scene observed through an
// aperture: degrees of freedom, per-oscillator capacity I_m(nu), the total
// J_m over a band, and the Planck-illumination constants sigma and eta.
//
// Units are SI throughout: Hz, m^2, sr, s, K, J. Information is in nats.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermolux/photon_channel.hpp"

namespace thermolux {

struct PhysicalConstants {
  double h = 6.62607015e-34;  // J s
  double k = 1.380649e-23;    // J/K
  double c = 299792458.0;     // m/s

  void validate() const;
};

/// Recorded energy per oscillator at full reflectivity, r(nu) P(nu), in J.
class SignalModel {
 public:
  /// Blackbody illumination with r = 1: h nu / (exp(h nu / kT) - 1).
  static SignalModel planck(double temperature, const PhysicalConstants& constants = {});
  /// Constant r P across the band.
  static SignalModel flat(double energy);
  static SignalModel custom(std::string name, std::function<double(double)> energy);

  double energy(double nu) const { return energy_(nu); }
  const std::string& name() const noexcept { return name_; }
  /// Set only for planck models.
  std::optional<double> temperature() const noexcept { return temperature_; }

 private:
  SignalModel(std::string name, std::function<double(double)> energy, std::optional<double> temperature)
      : name_(std::move(name)), energy_(std::move(energy)), temperature_(temperature) {}

  std::string name_;
  std::function<double(double)> energy_;
  std::optional<double> temperature_;
};

struct FrequencyBand {
  double lo = 0.0;
  double hi = 0.0;  // may be +infinity for planck models

  bool bounded() const noexcept;
  double width() const noexcept { return hi - lo; }
  double center() const noexcept { return 0.5 * (lo + hi); }
};

struct RadiometricScene {
  double area = 1.0;         // S, m^2
  double solid_angle = 1.0;  // Omega, sr, in (0, 2 pi]
  double duration = 1.0;     // tau, s
  FrequencyBand band;
  SignalModel model = SignalModel::flat(0.0);
};

/// Throws DomainError on an invalid scene; returns human-readable warnings
/// for the geometric-optics mode count, the band-time product, and levels
/// where the two-level optimum no longer applies (r P / h nu > 9).
std::vector<std::string> validate_scene(const RadiometricScene& scene, const PhysicalConstants& constants = {});

/// Mode count threshold used for the "much greater than one" checks.
inline constexpr double kValidityThreshold = 100.0;
/// Mean occupation above which the two-point optimum is not claimed.
inline constexpr double kTwoLevelOccupationLimit = 9.0;

struct DegreesOfFreedom {
  double spatial = 0.0;   // nu^2 Omega S / c^2 at band center
  double temporal = 0.0;  // tau * delta nu
  double total = 0.0;     // 2 * spatial * temporal (two polarizations)
};

DegreesOfFreedom degrees_of_freedom(const RadiometricScene& scene, const PhysicalConstants& constants = {});

struct ResolutionCell {
  double area = 0.0;       // c^2 / (nu^2 Omega)
  double bandwidth = 0.0;  // 1 / tau
};

ResolutionCell resolution_cell(const RadiometricScene& scene, double nu, const PhysicalConstants& constants = {});

/// Peak signal level x_m = r P / (r P + h nu) of one oscillator.
SignalLevel level_from_energy(double nu, double energy, const PhysicalConstants& constants = {});

/// Maximum information per oscillator at frequency nu when the recorded
/// energy at full reflectivity is `energy`:
///   ln[1 + rP/(rP + h nu) * (h nu/(rP + h nu))^(h nu / rP)].
double per_oscillator_info(double nu, double energy, const PhysicalConstants& constants = {});

/// Whether r P / h nu exceeds the two-level regime limit.
bool exceeds_two_level_regime(double nu, double energy, const PhysicalConstants& constants = {});

struct Integral {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
};

/// J_m = (2 tau Omega S / c^2) * integral of nu^2 I_m(nu) over the band,
/// adaptive Gauss-Kronrod at relative tolerance 1e-9. A zero-width band gives 0.
Integral total_info(const RadiometricScene& scene, const PhysicalConstants& constants = {});

/// Expected recorded photons when every oscillator uses its two-point
/// optimum: (2 tau Omega S / c^2) * integral of nu^2 w(nu) nbar_m(nu).
Integral photon_count(const RadiometricScene& scene, const PhysicalConstants& constants = {});

inline constexpr double kBandRelativeTolerance = 1e-9;
inline constexpr double kConstantRelativeTolerance = 1e-12;
/// Dimensionless cut for integrals over u = h nu / kT; the rest is a
/// closed-form exponential tail.
inline constexpr double kDimensionlessCut = 50.0;

double sigma_integrand(double u);
double eta_integrand(double u);

Integral sigma_integral(double rel_tol = kConstantRelativeTolerance);
Integral eta_integral(double rel_tol = kConstantRelativeTolerance);

/// Cached sigma ~ 0.7707 (computed once, safe for concurrent readers).
const Integral& sigma_constant();
/// Cached eta ~ 0.9093.
const Integral& eta_constant();

double nats_per_photon();
double bits_per_photon();

/// 2 tau Omega S (kT)^3 / (c^2 h^3); requires a planck model.
double planck_prefactor(const RadiometricScene& scene, const PhysicalConstants& constants = {});
/// Full-band J_m under planck illumination: prefactor * sigma.
double planck_total_info(const RadiometricScene& scene, const PhysicalConstants& constants = {});
/// Full-band photon count under planck illumination: prefactor * eta.
double photon_count_total(const RadiometricScene& scene, const PhysicalConstants& constants = {});

/// R_m = 4 pi (kT)^3 sigma / (c^2 h^3) with Omega = 2 pi, nats / (s m^2).
double max_rate(double temperature, const PhysicalConstants& constants = {});
/// P = 4 pi^5 (kT)^4 / (15 c^2 h^3), W / m^2.
double flux(double temperature, const PhysicalConstants& constants = {});
/// R_m = sigma sqrt(2) / (pi^2 sqrt(c)) * (15 P / (pi h))^(3/4).
double max_rate_from_flux(double flux_w_m2, const PhysicalConstants& constants = {});

}  // namespace thermolux
