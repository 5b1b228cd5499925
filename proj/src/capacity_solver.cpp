#include "thermolux/capacity_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "thermolux/errors.hpp"

namespace thermolux {
namespace {

constexpr std::size_t kWarmupSweeps = 50;
constexpr std::size_t kMaxSeedCandidates = 8;
constexpr int kMaxBacktracks = 50;
// Terms below this fraction of the running sum are dropped from the count
// sums; the dropped tail is geometric and stays below 1e-17 nats.
constexpr double kRelativeCutoff = 1e-18;

struct LevelGrid {
  std::vector<double> x;
  std::vector<double> neg_entropy;  // sum_n p ln p at each level
  std::size_t counts;               // number of photon counts kept, N + 1
};

LevelGrid make_grid(double x_m, std::size_t points, double tail_epsilon) {
  LevelGrid g;
  g.x.resize(points);
  g.neg_entropy.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    // Last point is x_m exactly.
    g.x[i] = i + 1 == points ? x_m : x_m * static_cast<double>(i) / static_cast<double>(points - 1);
    g.neg_entropy[i] = -count_entropy(g.x[i]);
  }
  g.counts = static_cast<std::size_t>(truncation_length(x_m, tail_epsilon)) + 1;
  return g;
}

// q(n) = sum_i w_i (1 - x_i) x_i^n over the listed atoms, visited from the
// highest level down so the relative cutoff compares against the dominant
// contribution.
std::vector<double> output_marginal(const LevelGrid& g, const std::vector<std::size_t>& atoms,
                                    const std::vector<double>& weights) {
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] > atoms[b]; });

  std::vector<double> q(g.counts, 0.0);
  for (std::size_t k : order) {
    if (weights[k] <= 0.0) continue;
    const double x = g.x[atoms[k]];
    double t = weights[k] * (1.0 - x);
    for (std::size_t n = 0; n < g.counts; ++n) {
      q[n] += t;
      t *= x;
      if (t <= kRelativeCutoff * q[n]) break;
    }
  }
  return q;
}

std::vector<double> log_of(const std::vector<double>& q) {
  std::vector<double> out(q.size());
  std::transform(q.begin(), q.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

double density_at(const LevelGrid& g, std::size_t i, const std::vector<double>& log_q) {
  const double x = g.x[i];
  double p = 1.0 - x;
  double cross = 0.0;
  for (std::size_t n = 0; n < g.counts; ++n) {
    cross -= p * log_q[n];
    p *= x;
    if (p <= kRelativeCutoff * (1.0 - x)) break;
  }
  return g.neg_entropy[i] + cross;
}

struct Evaluation {
  std::vector<double> density;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t argmax = 0;
};

// Densities at every grid level for a law supported on `atoms`.
Evaluation evaluate_grid(const LevelGrid& g, const std::vector<std::size_t>& atoms,
                         const std::vector<double>& weights) {
  const auto log_q = log_of(output_marginal(g, atoms, weights));
  Evaluation ev;
  ev.density.resize(g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) ev.density[i] = density_at(g, i, log_q);
  for (std::size_t k = 0; k < atoms.size(); ++k) ev.lower += weights[k] * ev.density[atoms[k]];
  const auto it = std::max_element(ev.density.begin(), ev.density.end());
  ev.upper = *it;
  ev.argmax = static_cast<std::size_t>(it - ev.density.begin());
  return ev;
}

// Capacity problem restricted to a handful of grid atoms. Rows of the
// channel matrix are materialized so Newton steps can form the Hessian.
class ActiveSet {
 public:
  ActiveSet(const LevelGrid& g, std::vector<std::size_t> atoms, std::vector<double> weights)
      : grid_(g), atoms_(std::move(atoms)), weights_(std::move(weights)) {
    for (std::size_t a : atoms_) rows_.push_back(row(a));
  }

  const std::vector<std::size_t>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  bool contains(std::size_t index) const {
    return std::find(atoms_.begin(), atoms_.end(), index) != atoms_.end();
  }

  double information() const { return information(weights_); }

  // Mixes in a new atom with positive directional derivative, choosing the
  // largest trial share that increases the information.
  void add(std::size_t index) {
    atoms_.push_back(index);
    rows_.push_back(row(index));
    weights_.push_back(0.0);
    const double base = information(weights_);
    for (double share = 0.25; share > 1e-12; share *= 0.5) {
      std::vector<double> trial = weights_;
      for (double& w : trial) w *= 1.0 - share;
      trial.back() = share;
      if (information(trial) > base) {
        weights_ = std::move(trial);
        return;
      }
    }
  }

  void drop_empty() {
    std::size_t keep = 0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (weights_[k] > 0.0) {
        if (keep != k) {
          atoms_[keep] = atoms_[k];
          weights_[keep] = weights_[k];
          rows_[keep] = std::move(rows_[k]);
        }
        ++keep;
      }
    }
    atoms_.resize(keep);
    weights_.resize(keep);
    rows_.resize(keep);
  }

  // Newton ascent on the simplex until the restricted bracket is below
  // `tol` or `budget` steps are used. Returns the steps taken.
  std::size_t solve(double tol, std::size_t budget) {
    std::size_t steps = 0;
    while (steps < budget) {
      const auto q = marginal(weights_);
      const auto d = densities(log_of(q));
      const double info = dot(weights_, d);
      if (*std::max_element(d.begin(), d.end()) - info <= tol) break;
      ++steps;

      std::vector<std::size_t> free;
      for (std::size_t k = 0; k < atoms_.size(); ++k) {
        if (weights_[k] > 0.0 || d[k] > info) free.push_back(k);
      }
      const std::vector<double> step = newton_direction(free, q, d);
      if (!line_search(step, d, info)) {
        // Fallback keeps the ascent property: one multiplicative sweep.
        const double peak = *std::max_element(d.begin(), d.end());
        double total = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
          weights_[k] *= std::exp(d[k] - peak);
          total += weights_[k];
        }
        for (double& w : weights_) w /= total;
      }
    }
    return steps;
  }

 private:
  std::vector<double> row(std::size_t index) const {
    const double x = grid_.x[index];
    std::vector<double> r(grid_.counts, 0.0);
    double p = 1.0 - x;
    for (std::size_t n = 0; n < grid_.counts && p > 0.0; ++n) {
      r[n] = p;
      p *= x;
    }
    return r;
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  }

  std::vector<double> marginal(const std::vector<double>& w) const {
    std::vector<double> q(grid_.counts, 0.0);
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (w[k] <= 0.0) continue;
      for (std::size_t n = 0; n < grid_.counts; ++n) q[n] += w[k] * rows_[k][n];
    }
    return q;
  }

  std::vector<double> densities(const std::vector<double>& log_q) const {
    std::vector<double> d(atoms_.size());
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      double cross = 0.0;
      for (std::size_t n = 0; n < grid_.counts; ++n) {
        if (rows_[k][n] > 0.0) cross -= rows_[k][n] * log_q[n];
      }
      d[k] = grid_.neg_entropy[atoms_[k]] + cross;
    }
    return d;
  }

  double information(const std::vector<double>& w) const {
    const auto q = marginal(w);
    double conditional = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) conditional += w[k] * grid_.neg_entropy[atoms_[k]];
    double output = 0.0;
    for (double v : q) {
      if (v > 0.0) output -= v * std::log(v);
    }
    return output + conditional;
  }

  // Maximizes the quadratic model d.s + s'Hs/2 subject to sum(s) = 0 over
  // the free atoms; H_ab = -sum_n P_an P_bn / q_n.
  std::vector<double> newton_direction(const std::vector<std::size_t>& free, const std::vector<double>& q,
                                       const std::vector<double>& d) const {
    const auto m = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    double diag_scale = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = a; b < m; ++b) {
        const auto& ra = rows_[free[a]];
        const auto& rb = rows_[free[b]];
        double h = 0.0;
        for (std::size_t n = 0; n < grid_.counts; ++n) {
          if (q[n] > 0.0) h -= ra[n] * rb[n] / q[n];
        }
        kkt(a, b) = h;
        kkt(b, a) = h;
      }
      diag_scale = std::max(diag_scale, -kkt(a, a));
      kkt(a, m) = -1.0;
      kkt(m, a) = 1.0;
      rhs(a) = -d[free[a]];
    }
    // Adjacent grid atoms make H nearly singular.
    for (Eigen::Index a = 0; a < m; ++a) kkt(a, a) -= 1e-12 * diag_scale;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);

    std::vector<double> step(atoms_.size(), 0.0);
    for (Eigen::Index a = 0; a < m; ++a) step[free[a]] = sol(a);
    return step;
  }

  bool line_search(const std::vector<double>& step, const std::vector<double>& d, double info) {
    const double slope = dot(step, d);
    if (!(slope > 0.0) || !std::isfinite(slope)) return false;

    double alpha_max = 1.0;
    std::size_t blocking = atoms_.size();
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (step[k] < 0.0 && weights_[k] / -step[k] < alpha_max) {
        alpha_max = weights_[k] / -step[k];
        blocking = k;
      }
    }

    double alpha = alpha_max;
    for (int tries = 0; tries < kMaxBacktracks; ++tries, alpha *= 0.5) {
      std::vector<double> trial(weights_.size());
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = std::max(0.0, weights_[k] + alpha * step[k]);
      if (alpha == alpha_max && blocking < trial.size()) trial[blocking] = 0.0;
      const double total = std::accumulate(trial.begin(), trial.end(), 0.0);
      for (double& w : trial) w /= total;
      const double gained = information(trial) - info;
      if (gained >= 1e-4 * alpha * slope || (gained > 0.0 && alpha < 1e-6)) {
        weights_ = std::move(trial);
        return true;
      }
    }
    return false;
  }

  const LevelGrid& grid_;
  std::vector<std::size_t> atoms_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> rows_;
};

InputDistribution report_distribution(const LevelGrid& g, const std::vector<std::size_t>& atoms,
                                      const std::vector<double>& weights, double floor) {
  std::vector<std::pair<std::size_t, double>> kept;
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] >= floor && weights[k] > 0.0) {
      kept.emplace_back(atoms[k], weights[k]);
      total += weights[k];
    }
  }
  std::sort(kept.begin(), kept.end());
  std::vector<Atom> out;
  for (const auto& [index, w] : kept) out.push_back(Atom{SignalLevel(g.x[index]), w / total});
  // Renormalize so the sum passes the 1e-12 check after rounding.
  double sum = 0.0;
  for (const Atom& a : out) sum += a.weight;
  out.back().weight += 1.0 - sum;
  return InputDistribution(std::move(out));
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_points < 3) throw DomainError("grid_points must be at least 3");
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(support_weight_floor >= 0.0 && support_weight_floor < 1.0)) {
    throw DomainError("support_weight_floor must lie in [0, 1)");
  }
  if (!(tail_epsilon > 0.0 && tail_epsilon <= 1e-9)) throw DomainError("tail_epsilon must lie in (0, 1e-9]");
}

CapacityResult solve_capacity(SignalLevel x_m, const SolverConfig& cfg) {
  cfg.validate();
  if (!(x_m.value() > 0.0)) throw DomainError("capacity solve needs x_m > 0");

  const LevelGrid g = make_grid(x_m.value(), cfg.grid_points, cfg.tail_epsilon);
  const std::size_t G = g.x.size();
  std::vector<std::size_t> all(G);
  std::iota(all.begin(), all.end(), 0);

  CapacityResult result;
  std::vector<double> p(G, 1.0 / static_cast<double>(G));
  Evaluation ev;
  std::size_t iters = 0;

  auto finish = [&](const std::vector<std::size_t>& atoms, const std::vector<double>& weights, bool converged) {
    result.capacity_nats = ev.lower;
    result.upper_bound_nats = ev.upper;
    result.kkt_max_violation = ev.upper - ev.lower;
    result.iterations = iters;
    result.converged = converged;
    result.distribution = report_distribution(g, atoms, weights, cfg.support_weight_floor);
    return result;
  };

  // Blahut-Arimoto sweeps: p_i <- p_i exp(D_i) / Z.
  const std::size_t sweeps = std::min(kWarmupSweeps, cfg.max_iters);
  for (std::size_t s = 0; s < sweeps; ++s) {
    ev = evaluate_grid(g, all, p);
    ++iters;
    result.trace.push_back({BracketSample::Phase::kBlahutArimoto, iters, ev.lower, ev.upper});
    if (ev.upper - ev.lower <= cfg.tol) return finish(all, p, true);
    double total = 0.0;
    for (std::size_t i = 0; i < G; ++i) {
      p[i] *= std::exp(ev.density[i] - ev.upper);
      total += p[i];
    }
    for (double& v : p) v /= total;
  }
  ev = evaluate_grid(g, all, p);
  if (ev.upper - ev.lower <= cfg.tol) return finish(all, p, true);
  if (iters >= cfg.max_iters) return finish(all, p, false);

  // Seed the active set with both endpoints plus the interior local maxima
  // of the density that still sit above the current lower bound.
  std::vector<std::size_t> seeds = {0, G - 1};
  std::vector<std::size_t> bumps;
  for (std::size_t i = 1; i + 1 < G; ++i) {
    const auto& D = ev.density;
    if (D[i] >= D[i - 1] && D[i] > D[i + 1] && D[i] > ev.lower) bumps.push_back(i);
  }
  std::sort(bumps.begin(), bumps.end(), [&](std::size_t a, std::size_t b) { return ev.density[a] > ev.density[b]; });
  if (bumps.size() > kMaxSeedCandidates) bumps.resize(kMaxSeedCandidates);
  seeds.insert(seeds.end(), bumps.begin(), bumps.end());

  std::vector<double> seed_weights;
  for (std::size_t i : seeds) seed_weights.push_back(p[i]);
  const double seed_total = std::accumulate(seed_weights.begin(), seed_weights.end(), 0.0);
  for (double& w : seed_weights) w /= seed_total;

  ActiveSet active(g, seeds, seed_weights);
  const double inner_tol = 0.1 * cfg.tol;
  while (true) {
    iters += active.solve(inner_tol, cfg.max_iters > iters ? cfg.max_iters - iters : 0);
    active.drop_empty();
    ev = evaluate_grid(g, active.atoms(), active.weights());
    ++iters;
    result.trace.push_back({BracketSample::Phase::kActiveSet, iters, ev.lower, ev.upper});
    if (ev.upper - ev.lower <= cfg.tol) return finish(active.atoms(), active.weights(), true);
    if (iters >= cfg.max_iters) return finish(active.atoms(), active.weights(), false);
    if (active.contains(ev.argmax)) {
      // Restricted problem is not yet solved to the grid's precision.
      const std::size_t used = active.solve(0.01 * inner_tol, cfg.max_iters - iters);
      iters += used;
      if (used == 0) {
        ev = evaluate_grid(g, active.atoms(), active.weights());
        return finish(active.atoms(), active.weights(), ev.upper - ev.lower <= cfg.tol);
      }
      continue;
    }
    active.add(ev.argmax);
  }
}

KktReport verify_two_point_kkt(SignalLevel x_m, std::size_t probe_points) {
  if (!(x_m.value() > 0.0)) throw DomainError("KKT scan needs x_m > 0");
  if (probe_points < 100) throw DomainError("KKT scan needs at least 100 probe points");

  const InputDistribution law = optimal_two_point_distribution(x_m);
  const GeometricChannel channel(x_m);
  KktReport report;
  report.capacity_nats = two_point_capacity(x_m);
  double best = -1.0;
  for (std::size_t i = 0; i < probe_points; ++i) {
    const double x = i + 1 == probe_points
                         ? x_m.value()
                         : x_m.value() * static_cast<double>(i) / static_cast<double>(probe_points - 1);
    const double d = information_density(SignalLevel(x), law, channel);
    if (d > best) {
      best = d;
      report.argmax_level = x;
    }
  }
  report.max_excess_nats = best - report.capacity_nats;
  report.is_optimal = report.max_excess_nats <= kKktTolerance;
  return report;
}

ThresholdResult find_two_point_threshold(SignalLevel lo, SignalLevel hi, double resolution,
                                         std::size_t probe_points) {
  if (!(lo.value() > 0.0) || !(lo < hi)) throw BracketError("threshold bracket needs 0 < lo < hi < 1");
  if (!(resolution > 0.0)) throw DomainError("resolution must be positive");
  if (!verify_two_point_kkt(lo, probe_points).is_optimal) {
    throw BracketError("two-point law is already suboptimal at the lower end of the bracket");
  }
  if (verify_two_point_kkt(hi, probe_points).is_optimal) {
    throw BracketError("two-point law is still optimal at the upper end of the bracket");
  }

  ThresholdResult out;
  double a = lo.value();
  double b = hi.value();
  while (b - a > resolution) {
    const double mid = 0.5 * (a + b);
    if (verify_two_point_kkt(SignalLevel(mid), probe_points).is_optimal) {
      a = mid;
    } else {
      b = mid;
    }
    ++out.bisections;
  }
  out.bracket_lo = a;
  out.bracket_hi = b;
  out.crossover = SignalLevel(0.5 * (a + b));
  return out;
}

}  // namespace thermolux
