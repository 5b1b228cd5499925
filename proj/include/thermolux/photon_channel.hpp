#pragma once

// Per-oscillator photon-counting channel.
//
// A thermal mode with mean occupation nbar emits n photons with the
// Bose-Einstein (geometric) law p(n|x) = (1 - x) x^n, where the signal level
// x = nbar / (nbar + 1) lies in [0, 1). The input is constrained by a peak
// level x <= x_max. All information quantities are in nats.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace thermolux {

inline constexpr double kDefaultTailEpsilon = 1e-12;

/// Channel input level x = nbar / (nbar + 1), 0 <= x < 1.
class SignalLevel {
 public:
  constexpr SignalLevel() = default;
  /// Throws DomainError unless 0 <= x < 1.
  explicit SignalLevel(double x);

  static SignalLevel from_mean_occupation(double nbar);

  constexpr double value() const noexcept { return x_; }
  double mean_occupation() const noexcept { return x_ / (1.0 - x_); }

  friend constexpr auto operator<=>(SignalLevel, SignalLevel) = default;

 private:
  double x_ = 0.0;
};

struct Atom {
  SignalLevel level;
  double weight = 0.0;
};

/// Discrete law over signal levels. Levels strictly increase and weights sum
/// to one within 1e-12.
class InputDistribution {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;

  explicit InputDistribution(std::vector<Atom> atoms);

  static InputDistribution point_mass(SignalLevel level);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  /// Largest level carrying positive weight.
  SignalLevel top_level() const noexcept;

 private:
  std::vector<Atom> atoms_;
};

/// Geometric channel with peak constraint x_max and a truncation tolerance
/// for the infinite sums over photon counts.
class GeometricChannel {
 public:
  /// Requires 0 < x_max < 1 and 0 < tail_epsilon <= 1e-9.
  explicit GeometricChannel(SignalLevel x_max, double tail_epsilon = kDefaultTailEpsilon);

  SignalLevel x_max() const noexcept { return x_max_; }
  double tail_epsilon() const noexcept { return tail_epsilon_; }
  /// Largest count N kept in truncated sums; the discarded pmf mass is
  /// x^(N+1) <= tail_epsilon for every admissible x.
  std::uint64_t truncation() const noexcept { return truncation_; }

 private:
  SignalLevel x_max_;
  double tail_epsilon_;
  std::uint64_t truncation_;
};

/// (1 - x) x^n. Throws DomainError for x outside [0, 1).
double gibbs_pmf(std::uint64_t n, double x);
inline double gibbs_pmf(std::uint64_t n, SignalLevel x) { return gibbs_pmf(n, x.value()); }

SignalLevel nbar_to_level(double nbar);
double level_to_nbar(SignalLevel x);

/// Smallest N with x^N <= eps (1 - x) whose output-entropy tail bound is
/// also below eps.
std::uint64_t truncation_length(double x_max, double tail_epsilon);

/// Shannon entropy of the count law at level x, in nats:
/// -ln(1 - x) - x ln(x) / (1 - x).
double count_entropy(double x);

/// ln[1 + x_m (1 - x_m)^((1 - x_m)/x_m)], with the x_m -> 0 limit 0.
double two_point_capacity(SignalLevel x_m);

/// Weight x_0/x_m placed on the top level by the two-point optimum.
double two_point_top_weight(SignalLevel x_m);

/// {(0, 1 - x_0/x_m), (x_m, x_0/x_m)}. Throws DegenerateDistributionError
/// for x_m = 0.
InputDistribution optimal_two_point_distribution(SignalLevel x_m);

/// I(f) between input level and photon count, in nats.
double mutual_information(const InputDistribution& f, const GeometricChannel& ch);

/// Relative entropy D(p(.|x) || q) of the count law at x against the output
/// marginal q induced by f.
double information_density(SignalLevel x, const InputDistribution& f, const GeometricChannel& ch);

}  // namespace thermolux
