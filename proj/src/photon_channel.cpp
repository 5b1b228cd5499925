#include "thermolux/photon_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "thermolux/errors.hpp"

namespace thermolux {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Below this the direct sum for q(n) is recomputed in log space.
constexpr double kUnderflowGuard = 1e-290;

std::string describe_level(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_level(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw DomainError("signal level must lie in [0, 1), got " + describe_level(x));
  }
}

// ln q(n) for n = 0..N. Entries are -inf where every atom assigns zero
// probability to n.
std::vector<double> log_output_marginal(const InputDistribution& f, std::uint64_t N) {
  const auto atoms = f.atoms();
  std::vector<double> term(atoms.size());
  std::vector<double> log_base(atoms.size());
  std::vector<double> log_x(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double x = atoms[i].level.value();
    term[i] = atoms[i].weight * (1.0 - x);
    log_base[i] = atoms[i].weight > 0.0 ? std::log(atoms[i].weight) + std::log1p(-x) : kNegInf;
    log_x[i] = x > 0.0 ? std::log(x) : kNegInf;
  }

  std::vector<double> log_q(N + 1);
  for (std::uint64_t n = 0; n <= N; ++n) {
    double q = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) q += term[i];

    if (q > kUnderflowGuard) {
      log_q[n] = std::log(q);
    } else {
      double peak = kNegInf;
      std::vector<double> logs(atoms.size(), kNegInf);
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (log_base[i] == kNegInf) continue;
        if (n > 0 && log_x[i] == kNegInf) continue;
        logs[i] = log_base[i] + (n > 0 ? static_cast<double>(n) * log_x[i] : 0.0);
        peak = std::max(peak, logs[i]);
      }
      if (peak == kNegInf) {
        log_q[n] = kNegInf;
      } else {
        double s = 0.0;
        for (double l : logs) {
          if (l != kNegInf) s += std::exp(l - peak);
        }
        log_q[n] = peak + std::log(s);
      }
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) term[i] *= atoms[i].level.value();
  }
  return log_q;
}

void require_admissible(const InputDistribution& f, const GeometricChannel& ch) {
  for (const Atom& a : f.atoms()) {
    if (a.level > ch.x_max()) {
      throw ConstraintError("atom at level " + describe_level(a.level.value()) +
                            " exceeds channel x_max " + describe_level(ch.x_max().value()));
    }
  }
}

}  // namespace

SignalLevel::SignalLevel(double x) : x_(x) { require_level(x); }

SignalLevel SignalLevel::from_mean_occupation(double nbar) { return nbar_to_level(nbar); }

InputDistribution::InputDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("input distribution needs at least one atom");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const double w = atoms_[i].weight;
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("atom weights must be finite and nonnegative");
    if (i > 0 && !(atoms_[i - 1].level < atoms_[i].level)) {
      throw DomainError("atom levels must be strictly increasing");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw DomainError("atom weights sum to " + describe_level(total) + ", expected 1");
  }
}

InputDistribution InputDistribution::point_mass(SignalLevel level) {
  return InputDistribution({Atom{level, 1.0}});
}

SignalLevel InputDistribution::top_level() const noexcept {
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    if (it->weight > 0.0) return it->level;
  }
  return atoms_.back().level;
}

GeometricChannel::GeometricChannel(SignalLevel x_max, double tail_epsilon)
    : x_max_(x_max), tail_epsilon_(tail_epsilon) {
  if (!(x_max.value() > 0.0)) throw DomainError("channel x_max must be positive");
  if (!(tail_epsilon > 0.0 && tail_epsilon <= 1e-9)) {
    throw DomainError("tail_epsilon must lie in (0, 1e-9]");
  }
  truncation_ = truncation_length(x_max.value(), tail_epsilon);
}

double gibbs_pmf(std::uint64_t n, double x) {
  require_level(x);
  if (n == 0) return 1.0 - x;
  if (x == 0.0) return 0.0;
  return (1.0 - x) * std::exp(static_cast<double>(n) * std::log(x));
}

SignalLevel nbar_to_level(double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
    throw DomainError("mean occupation must be finite and nonnegative");
  }
  return SignalLevel(nbar / (nbar + 1.0));
}

double level_to_nbar(SignalLevel x) { return x.mean_occupation(); }

std::uint64_t truncation_length(double x_max, double tail_epsilon) {
  require_level(x_max);
  if (x_max == 0.0) return 0;
  const double log_x = std::log(x_max);
  const double one_minus = 1.0 - x_max;
  const double start = std::ceil(std::log(tail_epsilon * one_minus) / log_x);
  auto N = static_cast<std::uint64_t>(std::max(start, 0.0));

  // sum_{n>N} -q ln q <= |ln x| sum_{n>N} n x^n since q(n) <= x_max^n < 1/e.
  auto entropy_tail = [&](std::uint64_t m) {
    const double nn = static_cast<double>(m);
    return -log_x * std::exp((nn + 1.0) * log_x) * ((nn + 1.0) - nn * x_max) / (one_minus * one_minus);
  };
  while (entropy_tail(N) > tail_epsilon) N += 1 + N / 64;
  return N;
}

double count_entropy(double x) {
  require_level(x);
  if (x == 0.0) return 0.0;
  return -std::log1p(-x) - x * std::log(x) / (1.0 - x);
}

double two_point_capacity(SignalLevel x_m) {
  const double x = x_m.value();
  if (x == 0.0) return 0.0;
  return std::log1p(x * std::exp((1.0 - x) / x * std::log1p(-x)));
}

double two_point_top_weight(SignalLevel x_m) {
  const double x = x_m.value();
  if (x == 0.0) throw DegenerateDistributionError("two-point law needs x_m > 0");
  return 1.0 / (std::exp((x - 1.0) / x * std::log1p(-x)) + x);
}

InputDistribution optimal_two_point_distribution(SignalLevel x_m) {
  const double w = two_point_top_weight(x_m);
  return InputDistribution({Atom{SignalLevel(0.0), 1.0 - w}, Atom{x_m, w}});
}

double mutual_information(const InputDistribution& f, const GeometricChannel& ch) {
  require_admissible(f, ch);
  double conditional = 0.0;
  for (const Atom& a : f.atoms()) conditional += a.weight * count_entropy(a.level.value());

  const std::vector<double> log_q = log_output_marginal(f, ch.truncation());
  double output = 0.0;
  for (double lq : log_q) {
    if (lq != kNegInf) output -= std::exp(lq) * lq;
  }
  return std::max(0.0, output - conditional);
}

double information_density(SignalLevel x, const InputDistribution& f, const GeometricChannel& ch) {
  if (x > ch.x_max()) {
    throw ConstraintError("probe level " + describe_level(x.value()) + " exceeds channel x_max");
  }
  require_admissible(f, ch);
  const std::vector<double> log_q = log_output_marginal(f, ch.truncation());
  const double xv = x.value();

  double cross = 0.0;  // -sum_n p(n|x) ln q(n)
  double p = 1.0 - xv;
  for (std::uint64_t n = 0; n < log_q.size() && p > 0.0; ++n) {
    if (log_q[n] == kNegInf) {
      throw UnsupportedOutputError("output marginal vanishes at n = " + std::to_string(n) +
                                   " which level " + describe_level(xv) + " can emit");
    }
    cross -= p * log_q[n];
    p *= xv;
  }
  return std::max(0.0, cross - count_entropy(xv));
}

}  // namespace thermolux
