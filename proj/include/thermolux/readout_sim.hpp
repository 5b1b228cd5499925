#pragma once

// Seeded Monte Carlo readout of the photon-counting channel.
//
// Random streams: every stream is a std::mt19937_64 (its output sequence is
// fixed by the C++ standard) seeded with splitmix64(seed + k * 0x9E3779B97F4A7C15)
// for substream k. Uniforms on (0, 1) use the top 53 bits, offset by half an
// ulp. run_simulation draws samples in blocks of kSamplesPerBlock, block b
// using substream b; empirical_nats_per_photon uses substream k for
// oscillator k. Results therefore do not depend on the worker count.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>

#include "thermolux/photon_channel.hpp"

namespace thermolux {

inline constexpr std::uint64_t kSamplesPerBlock = 1u << 16;

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream);

  /// Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Inverse-CDF draw n = floor(ln U / ln x); always 0 at x = 0.
std::uint64_t sample_count(SignalLevel x, RandomStream& rng);
/// Same draw with ln x supplied directly (exact for x = e^-u).
std::uint64_t sample_count_log(double log_x, RandomStream& rng);

struct SimulationConfig {
  InputDistribution distribution = InputDistribution::point_mass(SignalLevel{});
  SignalLevel x_max{0.5};
  std::uint64_t samples = 1;
  std::uint64_t seed = 0;
  double tail_epsilon = kDefaultTailEpsilon;

  void validate() const;
};

struct SimulationReport {
  double empirical_mi_nats = 0.0;   // plug-in with Miller-Madow correction, floored at 0
  double mi_standard_error = 0.0;   // jackknife
  double photon_mean = 0.0;
  double photon_mean_standard_error = 0.0;
  std::optional<double> map_error_rate;  // two-atom inputs only
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  /// (atom index, photon count) -> frequency. Counts above the channel
  /// truncation share the bin truncation + 1.
  std::map<std::pair<std::size_t, std::uint64_t>, std::uint64_t> count_histogram;
};

/// MAP decision between the two atoms of `f` after observing n photons.
/// Ties go to the lower atom. Requires f.size() == 2.
std::size_t map_decide(const InputDistribution& f, std::uint64_t n);

SimulationReport run_simulation(const SimulationConfig& cfg, unsigned threads = 0);

struct MutualInformationEstimate {
  double nats = 0.0;
  double standard_error = 0.0;
};

/// Miller-Madow corrected plug-in MI of a joint histogram and its jackknife
/// standard error. Exposed for testing.
MutualInformationEstimate estimate_mutual_information(
    const std::map<std::pair<std::size_t, std::uint64_t>, std::uint64_t>& histogram);

struct PerPhotonEstimate {
  // Frequency Monte Carlo: information and expected photon count of each
  // sampled oscillator under its two-point optimum.
  double nats_per_photon = 0.0;
  double standard_error = 0.0;
  // Same oscillators with one simulated photon count each. The count noise
  // gives a relative standard error near 9.7 / sqrt(oscillators); infinite
  // when no photon was recorded.
  double counted_nats_per_photon = 0.0;
  double counted_standard_error = 0.0;
  double info_per_oscillator = 0.0;            // importance-weighted mean, estimates sigma
  double photons_per_oscillator = 0.0;         // importance-weighted mean, estimates eta
  double counted_photons_per_oscillator = 0.0;
  std::uint64_t oscillators = 0;
  std::uint64_t seed = 0;
};

/// Draws oscillator frequencies u = h nu / kT from a Gamma(2, scale 3)
/// envelope of the nu^2-weighted Planck spectra, gives each its two-point
/// optimal input, and returns the ratio of importance-weighted information
/// to photons, both from expected counts and from simulated counts. With a
/// single oscillator the standard errors are set to the estimates.
PerPhotonEstimate empirical_nats_per_photon(double temperature, std::uint64_t oscillators, std::uint64_t seed,
                                            unsigned threads = 0);

}  // namespace thermolux
