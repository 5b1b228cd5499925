#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "thermolux/errors.hpp"
#include "thermolux/radiometry.hpp"

using namespace thermolux;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

RadiometricScene optical_scene() {
  RadiometricScene s;
  s.area = 1e-4;
  s.solid_angle = 0.1;
  s.duration = 1e-3;
  s.band = {5e14 - 5e11, 5e14 + 5e11};
  s.model = SignalModel::flat(1e-19);
  return s;
}

RadiometricScene planck_scene(double T, double area = 1.0, double omega = kTwoPi, double tau = 1.0) {
  RadiometricScene s;
  s.area = area;
  s.solid_angle = omega;
  s.duration = tau;
  s.band = {0.0, kInf};
  s.model = SignalModel::planck(T);
  return s;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("physical constants") {
  const PhysicalConstants c;
  CHECK(c.h == 6.62607015e-34);
  CHECK(c.k == 1.380649e-23);
  CHECK(c.c == 299792458.0);
  PhysicalConstants bad;
  bad.c = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("scene validation") {
  auto s = optical_scene();
  CHECK_NOTHROW(validate_scene(s));
  s.area = 0.0;
  CHECK_THROWS_AS(validate_scene(s), DomainError);
  s = optical_scene();
  s.duration = -1.0;
  CHECK_THROWS_AS(validate_scene(s), DomainError);
  s = optical_scene();
  s.solid_angle = 7.0;
  CHECK_THROWS_AS(validate_scene(s), DomainError);
  s.solid_angle = kTwoPi;
  CHECK_NOTHROW(validate_scene(s));
  s = optical_scene();
  s.band = {2e14, 1e14};
  CHECK_THROWS_AS(validate_scene(s), DomainError);
  s.band = {1e14, kInf};
  CHECK_THROWS_AS(validate_scene(s), DomainError);
  CHECK_THROWS_AS(SignalModel::planck(0.0), DomainError);
  CHECK_THROWS_AS(SignalModel::flat(-1.0), DomainError);

  SUBCASE("warnings") {
    CHECK(validate_scene(optical_scene()).empty());

    auto tiny = optical_scene();
    tiny.area = 1e-20;
    tiny.duration = 1e-12;
    const auto w = validate_scene(tiny);
    CHECK(w.size() == 2);

    auto bright = optical_scene();
    const PhysicalConstants c;
    bright.model = SignalModel::flat(20.0 * c.h * 5e14);
    bool regime = false;
    for (const auto& m : validate_scene(bright)) regime = regime || m.find("> 9") != std::string::npos;
    CHECK(regime);
  }
}

TEST_CASE("degrees of freedom") {
  const auto dof = degrees_of_freedom(optical_scene());
  CHECK(dof.total == doctest::Approx(5.5633e16).epsilon(1e-4));
  CHECK(dof.temporal == doctest::Approx(1e9).epsilon(1e-12));
  CHECK(dof.total == doctest::Approx(2.0 * dof.spatial * dof.temporal).epsilon(1e-15));

  auto s = optical_scene();
  s.duration *= 2.0;
  CHECK(degrees_of_freedom(s).total == 2.0 * dof.total);

  s = optical_scene();
  s.solid_angle = 1e-300;
  CHECK(degrees_of_freedom(s).total < 1e-250);

  s.band = {1e14, 1e14};
  CHECK_THROWS_AS(degrees_of_freedom(s), DomainError);
  CHECK_THROWS_AS(degrees_of_freedom(planck_scene(6000.0)), DomainError);
}

TEST_CASE("resolution cell") {
  auto s = optical_scene();
  s.duration = 1.0;
  const auto cell = resolution_cell(s, 5e14);
  CHECK(cell.bandwidth == 1.0);
  CHECK(cell.area == doctest::Approx(3.595e-12).epsilon(1e-3));
  const double spatial = 5e14 * 5e14 * s.solid_angle * s.area / (299792458.0 * 299792458.0);
  CHECK(cell.area * spatial == doctest::Approx(s.area).epsilon(1e-14));
  CHECK_THROWS_AS(resolution_cell(s, 0.0), DomainError);
}

TEST_CASE("per-oscillator information") {
  const PhysicalConstants c;
  const double nu = 5e14;
  CHECK(per_oscillator_info(nu, 0.0) == 0.0);
  CHECK(per_oscillator_info(nu, c.h * nu) == doctest::Approx(std::log(1.25)).epsilon(1e-14));
  CHECK(per_oscillator_info(nu, 9.0 * c.h * nu) == doctest::Approx(two_point_capacity(SignalLevel(0.9))).epsilon(1e-13));
  CHECK_THROWS_AS(per_oscillator_info(nu, -1e-20), DomainError);
  CHECK_THROWS_AS(per_oscillator_info(0.0, 1e-20), DomainError);
  CHECK(exceeds_two_level_regime(nu, 9.5 * c.h * nu));
  CHECK_FALSE(exceeds_two_level_regime(nu, 8.5 * c.h * nu));

  // Same quantity through the level x_m = rP / (rP + h nu).
  oracle::Gen gen(21);
  for (int i = 0; i < 100; ++i) {
    const double f = gen.log_uniform(1e9, 1e16);
    const double rho = gen.log_uniform(1e-4, 1e3);
    const double energy = rho * c.h * f;
    const double direct = per_oscillator_info(f, energy);
    const double via_level = two_point_capacity(SignalLevel(energy / (energy + c.h * f)));
    CHECK(std::abs(direct - via_level) <= 1e-12 * std::max(1.0, direct));
  }
}

TEST_CASE("planck illumination sets x_m = exp(-h nu / kT)") {
  const PhysicalConstants c;
  oracle::Gen gen(22);
  for (int i = 0; i < 50; ++i) {
    const double T = gen.log_uniform(3.0, 3e5);
    const double u = gen.log_uniform(1e-3, 30.0);
    const double nu = u * c.k * T / c.h;
    const double level = level_from_energy(nu, SignalModel::planck(T).energy(nu)).value();
    CHECK(std::abs(level - std::exp(-c.h * nu / (c.k * T))) <= 1e-12);
  }
}

TEST_CASE("sigma and eta") {
  CHECK(std::abs(sigma_constant().value - 0.772) <= 0.002);
  CHECK(std::abs(eta_constant().value - 0.909) <= 0.002);
  CHECK(sigma_constant().error < 1e-10);
  CHECK(eta_constant().error < 1e-10);

  // 1^2 ln(1 + e^-1 (1 - e^-1)^(e - 1))
  CHECK(sigma_integrand(1.0) == doctest::Approx(0.155).epsilon(3e-3));
  for (double u : {1e-3, 1e-5}) {
    CHECK(sigma_integrand(u) / (u * u) == doctest::Approx(std::log(2.0)).epsilon(10 * u));
    CHECK(eta_integrand(u) / u == doctest::Approx(0.5).epsilon(20 * u * std::abs(std::log(u))));
  }
  CHECK(sigma_integrand(0.0) == 0.0);
  CHECK(eta_integrand(0.0) == 0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double u = i * 0.05;
    REQUIRE(eta_integrand(u) >= 0.0);
    REQUIRE(sigma_integrand(u) >= 0.0);
  }

  SUBCASE("independent Simpson quadrature") {
    const double s = oracle::simpson([](double u) { return sigma_integrand(u); }, 0.0, 60.0, 60000);
    const double e = oracle::simpson([](double u) { return eta_integrand(u); }, 0.0, 60.0, 60000);
    CHECK(s == doctest::Approx(sigma_constant().value).epsilon(1e-10));
    CHECK(e == doctest::Approx(eta_constant().value).epsilon(1e-10));
  }

  SUBCASE("tolerance halving stays inside the error estimate") {
    const Integral s1 = sigma_integral(1e-10);
    const Integral s2 = sigma_integral(5e-11);
    CHECK(std::abs(s1.value - s2.value) <= s1.error + 1e-16);
    const Integral e1 = eta_integral(1e-10);
    const Integral e2 = eta_integral(5e-11);
    CHECK(std::abs(e1.value - e2.value) <= e1.error + 1e-16);
  }

  CHECK(std::abs(nats_per_photon() - 0.849) <= 0.002);
  CHECK(std::abs(bits_per_photon() - 1.225) <= 0.003);
  CHECK(bits_per_photon() == doctest::Approx(nats_per_photon() / std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("band information") {
  SUBCASE("zero-width band") {
    auto s = optical_scene();
    s.band = {5e14, 5e14};
    CHECK(total_info(s).value == 0.0);
    CHECK(photon_count(s).value == 0.0);
  }

  SUBCASE("linear in area and duration") {
    const auto s = optical_scene();
    const double base = total_info(s).value;
    auto t = s;
    t.area *= 3.0;
    CHECK(relative(total_info(t).value / base, 3.0) <= 1e-12);
    t = s;
    t.duration *= 7.0;
    CHECK(relative(total_info(t).value / base, 7.0) <= 1e-12);
  }

  SUBCASE("flat model against Simpson") {
    const auto s = optical_scene();
    const PhysicalConstants c;
    const double pre = 2.0 * s.duration * s.solid_angle * s.area / (c.c * c.c);
    const double direct = pre * oracle::simpson(
                                    [&](double nu) {
                                      const double e = 1e-19;
                                      return nu * nu * two_point_capacity(SignalLevel(e / (e + c.h * nu)));
                                    },
                                    s.band.lo, s.band.hi, 2000);
    CHECK(total_info(s).value == doctest::Approx(direct).epsilon(1e-10));
  }

  SUBCASE("additive over sub-bands") {
    RadiometricScene s = planck_scene(3000.0, 1e-2, 0.5, 1e-3);
    s.band = {1e13, 1e15};
    const Integral whole = total_info(s);
    s.band = {1e13, 2.7e14};
    const Integral left = total_info(s);
    s.band = {2.7e14, 1e15};
    const Integral right = total_info(s);
    CHECK(std::abs(left.value + right.value - whole.value) <=
          kBandRelativeTolerance * whole.value + whole.error + left.error + right.error);
  }

  SUBCASE("planck full band reduces to sigma") {
    for (double T : {300.0, 6000.0}) {
      const auto s = planck_scene(T);
      const Integral j = total_info(s);
      CHECK(relative(j.value, planck_prefactor(s) * sigma_constant().value) <= 1e-8);
      CHECK(planck_total_info(s) == doctest::Approx(planck_prefactor(s) * sigma_constant().value).epsilon(1e-15));
      CHECK(relative(photon_count(s).value, photon_count_total(s)) <= 1e-8);
    }
    CHECK_THROWS_AS(planck_prefactor(optical_scene()), DomainError);
  }
}

TEST_CASE("photon count") {
  const auto s = planck_scene(6000.0);
  const double n = photon_count_total(s);

  auto t = s;
  t.duration = 2.5;
  CHECK(relative(photon_count_total(t) / n, 2.5) <= 1e-12);
  t = s;
  t.area = 0.1;
  CHECK(relative(photon_count_total(t) / n, 0.1) <= 1e-12);
  CHECK(relative(photon_count_total(planck_scene(12000.0)) / n, 8.0) <= 1e-12);

  // Expected photons from each oscillator's two-point optimum, integrated
  // in frequency with Simpson's rule.
  const PhysicalConstants c;
  const double T = 6000.0;
  const double pre = 2.0 * s.duration * s.solid_angle * s.area / (c.c * c.c);
  const double nu_max = 60.0 * c.k * T / c.h;
  const double direct = pre * oracle::simpson(
                                  [&](double nu) {
                                    if (nu == 0.0) return 0.0;
                                    const double x_m = std::exp(-c.h * nu / (c.k * T));
                                    const auto f = optimal_two_point_distribution(SignalLevel(x_m));
                                    const double nbar_m = x_m / (1.0 - x_m);
                                    return nu * nu * f[1].weight * nbar_m;
                                  },
                                  0.0, nu_max, 60000);
  CHECK(n == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("information per photon does not depend on the scene") {
  oracle::Gen gen(23);
  for (int i = 0; i < 5; ++i) {
    const double T = gen.uniform(1000.0, 10000.0);
    const auto a = planck_scene(T, gen.log_uniform(1e-6, 1e2), gen.uniform(0.01, kTwoPi), gen.log_uniform(1e-6, 1e3));
    const auto b = planck_scene(T, gen.log_uniform(1e-6, 1e2), gen.uniform(0.01, kTwoPi), gen.log_uniform(1e-6, 1e3));
    const double ra = total_info(a).value / photon_count(a).value;
    const double rb = total_info(b).value / photon_count(b).value;
    CHECK(relative(ra, rb) <= 1e-9);
    CHECK(std::abs(ra - nats_per_photon()) <= 1e-8);
  }
}

TEST_CASE("rate laws") {
  for (double T : {300.0, 3000.0, 3e5}) {
    CAPTURE(T);
    CHECK(relative(max_rate_from_flux(flux(T)), max_rate(T)) <= 1e-10);
    CHECK(relative(max_rate(2.0 * T) / max_rate(T), 8.0) <= 1e-12);
    CHECK(relative(flux(2.0 * T) / flux(T), 16.0) <= 1e-12);
    // Full-band rate over a hemisphere per unit area and time.
    CHECK(relative(max_rate(T), planck_total_info(planck_scene(T))) <= 1e-12);
  }
  // 4 pi^5 (kT)^4 / (15 c^2 h^3) is twice the Stefan-Boltzmann exitance, sigma_SB = 5.670374419e-8.
  CHECK(flux(1000.0) == doctest::Approx(2.0 * 5.670374419e-8 * 1e12).epsilon(1e-9));

  const double slope = std::log(max_rate(600.0) / max_rate(300.0)) / std::log(flux(600.0) / flux(300.0));
  CHECK(std::abs(slope - 0.75) <= 1e-12);
  CHECK_THROWS_AS(max_rate(0.0), DomainError);
  CHECK_THROWS_AS(max_rate_from_flux(-1.0), DomainError);
}
