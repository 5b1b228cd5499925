#pragma once

// Numerical capacity of the peak-constrained geometric channel on an
// equispaced level grid, KKT verification of the analytic two-point law, and
// the crossover level beyond which two-level signaling stops being optimal.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thermolux/photon_channel.hpp"

namespace thermolux {

/// Boolean optimality threshold for the KKT scan, in nats.
inline constexpr double kKktTolerance = 1e-7;

struct SolverConfig {
  std::size_t grid_points = 2001;     // equispaced on [0, x_m], endpoints included
  double tol = 1e-9;                  // bracket width at which the solver stops, nats
  std::size_t max_iters = 20000;
  double support_weight_floor = 1e-6;
  double tail_epsilon = kDefaultTailEpsilon;

  void validate() const;
};

/// One certified bracket lower <= C_grid <= upper.
struct BracketSample {
  enum class Phase { kBlahutArimoto, kActiveSet };
  Phase phase;
  std::size_t iteration;
  double lower;
  double upper;
};

struct CapacityResult {
  double capacity_nats = 0.0;       // I(p) of the final grid law
  double upper_bound_nats = 0.0;    // max over the grid of the information density
  // Pruned at support_weight_floor and renormalized.
  InputDistribution distribution = InputDistribution::point_mass(SignalLevel{});
  std::size_t iterations = 0;
  double kkt_max_violation = 0.0;   // upper_bound_nats - capacity_nats
  bool converged = false;
  std::vector<BracketSample> trace;
};

/// Alternating maximization over the grid. Blahut-Arimoto sweeps run first;
/// the law is then polished on an active set of grid atoms (Newton steps on
/// the simplex) that grows by the most violating grid atom until the
/// full-grid bracket closes to cfg.tol. The bracket is valid even when the
/// iteration budget runs out; `converged` records which case occurred.
CapacityResult solve_capacity(SignalLevel x_m, const SolverConfig& cfg = {});

struct KktReport {
  bool is_optimal = false;
  double max_excess_nats = 0.0;  // max_x D(x) - C over the probe grid
  double argmax_level = 0.0;
  double capacity_nats = 0.0;
};

/// Scans the information density of the analytic two-point law on
/// `probe_points` equispaced levels of [0, x_m] (probe_points >= 100).
KktReport verify_two_point_kkt(SignalLevel x_m, std::size_t probe_points = 2001);

struct ThresholdResult {
  SignalLevel crossover;   // midpoint of the final bracket
  double bracket_lo = 0.0; // last level found optimal
  double bracket_hi = 0.0; // last level found non-optimal
  std::size_t bisections = 0;
};

/// Bisects the two-point KKT boolean between lo (optimal) and hi (not
/// optimal) until hi - lo <= resolution. Throws BracketError otherwise.
ThresholdResult find_two_point_threshold(SignalLevel lo, SignalLevel hi, double resolution,
                                         std::size_t probe_points = 2001);

}  // namespace thermolux
