#include "thermolux/readout_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "thermolux/errors.hpp"
#include "thermolux/parallel.hpp"
#include "thermolux/radiometry.hpp"

namespace thermolux {
namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kOscillatorsPerBlock = 4096;
constexpr std::uint64_t kMaxSamples = std::uint64_t{1} << 62;

double xlogx(double c) { return c > 0.0 ? c * std::log(c) : 0.0; }

double log_posterior(const Atom& a, std::uint64_t n) {
  const double x = a.level.value();
  if (a.weight <= 0.0) return -std::numeric_limits<double>::infinity();
  if (n == 0) return std::log(a.weight) + std::log1p(-x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(a.weight) + std::log1p(-x) + static_cast<double>(n) * std::log(x);
}

struct BlockTally {
  std::vector<std::vector<std::uint64_t>> cells;  // [atom][n], n clamped to truncation + 1
  double photons = 0.0;
  double photons_sq = 0.0;
  std::uint64_t map_errors = 0;
};

unsigned resolve_threads(unsigned threads) { return threads == 0 ? thread_budget() : threads; }

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream)
    : engine_(splitmix64(seed + substream * kGoldenGamma)) {}

double RandomStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t sample_count_log(double log_x, RandomStream& rng) {
  const double u = rng.uniform();
  if (log_x == -std::numeric_limits<double>::infinity()) return 0;
  const double n = std::floor(std::log(u) / log_x);
  if (!(n < 9.2e18)) return std::numeric_limits<std::uint64_t>::max() / 2;
  return static_cast<std::uint64_t>(n);
}

std::uint64_t sample_count(SignalLevel x, RandomStream& rng) {
  return sample_count_log(x.value() > 0.0 ? std::log(x.value()) : -std::numeric_limits<double>::infinity(), rng);
}

void SimulationConfig::validate() const {
  if (samples < 1) throw DomainError("samples must be at least 1");
  if (samples > kMaxSamples) throw CapacityError("sample count would overflow the histogram counters");
  if (!(x_max.value() > 0.0)) throw DomainError("x_max must be positive");
  for (const Atom& a : distribution.atoms()) {
    if (a.level > x_max) throw ConstraintError("simulation atom exceeds x_max");
  }
}

std::size_t map_decide(const InputDistribution& f, std::uint64_t n) {
  if (f.size() != 2) throw DomainError("MAP detector needs exactly two atoms");
  return log_posterior(f[1], n) > log_posterior(f[0], n) ? 1 : 0;
}

MutualInformationEstimate estimate_mutual_information(
    const std::map<std::pair<std::size_t, std::uint64_t>, std::uint64_t>& histogram) {
  std::map<std::size_t, double> by_atom;
  std::map<std::uint64_t, double> by_count;
  double total = 0.0;
  double cells_term = 0.0;
  double bins_joint = 0.0;
  for (const auto& [key, c] : histogram) {
    if (c == 0) continue;
    const auto cd = static_cast<double>(c);
    by_atom[key.first] += cd;
    by_count[key.second] += cd;
    total += cd;
    cells_term += xlogx(cd);
    bins_joint += 1.0;
  }
  if (total == 0.0) return {0.0, 0.0};

  double atoms_term = 0.0;
  for (const auto& [a, c] : by_atom) atoms_term += xlogx(c);
  double counts_term = 0.0;
  for (const auto& [n, c] : by_count) counts_term += xlogx(c);

  auto estimate = [](double joint, double atoms, double counts, double m, double m_joint, double m_atoms,
                     double m_counts) {
    const double plugin = (joint - atoms - counts + xlogx(m)) / m;
    return plugin + (m_atoms + m_counts - m_joint - 1.0) / (2.0 * m);
  };
  const auto m_atoms = static_cast<double>(by_atom.size());
  const auto m_counts = static_cast<double>(by_count.size());
  const double full = estimate(cells_term, atoms_term, counts_term, total, bins_joint, m_atoms, m_counts);

  MutualInformationEstimate out;
  out.nats = std::max(0.0, full);
  if (total < 2.0) {
    out.standard_error = std::numeric_limits<double>::infinity();
    return out;
  }

  // Jackknife: every sample in a cell yields the same leave-one-out value.
  std::vector<std::pair<double, double>> loo;  // (value, multiplicity)
  for (const auto& [key, c] : histogram) {
    if (c == 0) continue;
    const auto cd = static_cast<double>(c);
    const double ca = by_atom[key.first];
    const double cn = by_count[key.second];
    const double joint = cells_term - xlogx(cd) + xlogx(cd - 1.0);
    const double atoms = atoms_term - xlogx(ca) + xlogx(ca - 1.0);
    const double counts = counts_term - xlogx(cn) + xlogx(cn - 1.0);
    const double value = estimate(joint, atoms, counts, total - 1.0, bins_joint - (cd == 1.0 ? 1.0 : 0.0),
                                  m_atoms - (ca == 1.0 ? 1.0 : 0.0), m_counts - (cn == 1.0 ? 1.0 : 0.0));
    loo.emplace_back(value, cd);
  }
  double mean = 0.0;
  for (const auto& [v, k] : loo) mean += k * (v - full);
  mean /= total;
  double ss = 0.0;
  for (const auto& [v, k] : loo) ss += k * (v - full - mean) * (v - full - mean);
  out.standard_error = std::sqrt((total - 1.0) / total * ss);
  return out;
}

SimulationReport run_simulation(const SimulationConfig& cfg, unsigned threads) {
  cfg.validate();
  const GeometricChannel channel(cfg.x_max, cfg.tail_epsilon);
  const std::uint64_t overflow_bin = channel.truncation() + 1;
  const auto atoms = cfg.distribution.atoms();
  const bool two_level = atoms.size() == 2;

  std::vector<double> cumulative;
  double acc = 0.0;
  for (const Atom& a : atoms) cumulative.push_back(acc += a.weight);
  std::vector<double> log_levels;
  for (const Atom& a : atoms) {
    log_levels.push_back(a.level.value() > 0.0 ? std::log(a.level.value())
                                               : -std::numeric_limits<double>::infinity());
  }
  std::vector<std::size_t> decision;
  if (two_level) {
    for (std::uint64_t n = 0; n <= overflow_bin; ++n) decision.push_back(map_decide(cfg.distribution, n));
  }

  const std::uint64_t blocks = (cfg.samples + kSamplesPerBlock - 1) / kSamplesPerBlock;
  std::vector<BlockTally> tallies(blocks);
  parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
    BlockTally& t = tallies[b];
    t.cells.assign(atoms.size(), std::vector<std::uint64_t>(overflow_bin + 1, 0));
    RandomStream rng(cfg.seed, b);
    const std::uint64_t begin = b * kSamplesPerBlock;
    const std::uint64_t end = std::min(cfg.samples, begin + kSamplesPerBlock);
    for (std::uint64_t s = begin; s < end; ++s) {
      const double pick = rng.uniform() * acc;
      const auto atom = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
                                   static_cast<std::ptrdiff_t>(atoms.size()) - 1));
      const std::uint64_t n = sample_count_log(log_levels[atom], rng);
      const auto nd = static_cast<double>(n);
      t.photons += nd;
      t.photons_sq += nd * nd;
      const std::uint64_t bin = std::min(n, overflow_bin);
      ++t.cells[atom][bin];
      if (two_level) {
        const std::size_t guess = n < overflow_bin ? decision[n] : map_decide(cfg.distribution, n);
        if (guess != atom) ++t.map_errors;
      }
    }
  });

  SimulationReport report;
  report.seed = cfg.seed;
  report.samples = cfg.samples;
  double photons = 0.0;
  double photons_sq = 0.0;
  std::uint64_t map_errors = 0;
  for (const BlockTally& t : tallies) {
    photons += t.photons;
    photons_sq += t.photons_sq;
    map_errors += t.map_errors;
    for (std::size_t a = 0; a < t.cells.size(); ++a) {
      for (std::uint64_t n = 0; n < t.cells[a].size(); ++n) {
        if (t.cells[a][n] > 0) report.count_histogram[{a, n}] += t.cells[a][n];
      }
    }
  }

  const auto m = static_cast<double>(cfg.samples);
  report.photon_mean = photons / m;
  if (cfg.samples > 1) {
    const double var = std::max(0.0, (photons_sq - m * report.photon_mean * report.photon_mean) / (m - 1.0));
    report.photon_mean_standard_error = std::sqrt(var / m);
  } else {
    report.photon_mean_standard_error = std::numeric_limits<double>::infinity();
  }
  if (two_level) report.map_error_rate = static_cast<double>(map_errors) / m;

  const MutualInformationEstimate mi = estimate_mutual_information(report.count_histogram);
  report.empirical_mi_nats = mi.nats;
  report.mi_standard_error = mi.standard_error;
  return report;
}

PerPhotonEstimate empirical_nats_per_photon(double temperature, std::uint64_t oscillators, std::uint64_t seed,
                                            unsigned threads) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  if (oscillators < 1) throw DomainError("at least one oscillator is required");
  const PhysicalConstants constants;
  const double scale = constants.k * temperature / constants.h;  // Hz per unit of u

  // Per oscillator: information, expected photons, counted photons.
  struct Sums {
    double info = 0.0, expected = 0.0, counted = 0.0;
    double info_sq = 0.0, expected_sq = 0.0, counted_sq = 0.0;
    double info_expected = 0.0, info_counted = 0.0;
  };
  const std::uint64_t blocks = (oscillators + kOscillatorsPerBlock - 1) / kOscillatorsPerBlock;
  std::vector<Sums> partial(blocks);
  parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
    Sums& s = partial[b];
    const std::uint64_t begin = b * kOscillatorsPerBlock;
    const std::uint64_t end = std::min(oscillators, begin + kOscillatorsPerBlock);
    for (std::uint64_t k = begin; k < end; ++k) {
      RandomStream rng(seed, k);
      // Gamma(2, scale 3) proposal g(u) = u e^{-u/3} / 9.
      const double u_draw = -3.0 * (std::log(rng.uniform()) + std::log(rng.uniform()));
      const double nu = u_draw * scale;
      const double u = std::max(constants.h * nu / (constants.k * temperature), 1e-12);
      const double weight = 9.0 * u * std::exp(u / 3.0);  // u^2 / g(u)

      const SignalLevel x_m(std::exp(-u));
      const double top = two_point_top_weight(x_m);
      const double info = weight * two_point_capacity(x_m);
      const double expected = weight * top / std::expm1(u);
      const bool lit = rng.uniform() < top;
      const double counted = lit ? weight * static_cast<double>(sample_count_log(-u, rng)) : 0.0;

      s.info += info;
      s.expected += expected;
      s.counted += counted;
      s.info_sq += info * info;
      s.expected_sq += expected * expected;
      s.counted_sq += counted * counted;
      s.info_expected += info * expected;
      s.info_counted += info * counted;
    }
  });

  Sums t;
  for (const Sums& s : partial) {
    t.info += s.info;
    t.expected += s.expected;
    t.counted += s.counted;
    t.info_sq += s.info_sq;
    t.expected_sq += s.expected_sq;
    t.counted_sq += s.counted_sq;
    t.info_expected += s.info_expected;
    t.info_counted += s.info_counted;
  }

  const auto m = static_cast<double>(oscillators);
  // Delta method for a ratio of means.
  auto ratio_se = [m](double si, double sp, double sii, double spp, double sip) {
    const double mi = si / m;
    const double mp = sp / m;
    const double r = mi / mp;
    const double var_i = (sii - m * mi * mi) / (m - 1.0);
    const double var_p = (spp - m * mp * mp) / (m - 1.0);
    const double cov = (sip - m * mi * mp) / (m - 1.0);
    return std::sqrt(std::max(0.0, (var_i - 2.0 * r * cov + r * r * var_p) / (mp * mp * m)));
  };

  PerPhotonEstimate out;
  out.oscillators = oscillators;
  out.seed = seed;
  out.info_per_oscillator = t.info / m;
  out.photons_per_oscillator = t.expected / m;
  out.counted_photons_per_oscillator = t.counted / m;
  out.nats_per_photon = out.info_per_oscillator / out.photons_per_oscillator;
  out.standard_error =
      oscillators < 2 ? out.nats_per_photon : ratio_se(t.info, t.expected, t.info_sq, t.expected_sq, t.info_expected);
  if (t.counted > 0.0) {
    out.counted_nats_per_photon = out.info_per_oscillator / out.counted_photons_per_oscillator;
    out.counted_standard_error = oscillators < 2 ? out.counted_nats_per_photon
                                                 : ratio_se(t.info, t.counted, t.info_sq, t.counted_sq, t.info_counted);
  } else {
    out.counted_nats_per_photon = std::numeric_limits<double>::infinity();
    out.counted_standard_error = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace thermolux
