#pragma once

// Reference computations for the tests. These deliberately avoid the
// library's numerical paths: plain loops, direct pow/log, fixed truncation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// I = sum_i f_i sum_n p(n|x_i) ln(p(n|x_i) / q(n)), summed literally up to
// `counts` terms.
inline double mutual_information(const std::vector<std::pair<double, double>>& atoms, int counts = 20000) {
  double total = 0.0;
  for (int n = 0; n < counts; ++n) {
    double q = 0.0;
    for (auto [x, w] : atoms) q += w * (1.0 - x) * std::pow(x, n);
    if (q <= 0.0) continue;
    for (auto [x, w] : atoms) {
      const double p = (1.0 - x) * std::pow(x, n);
      if (w > 0.0 && p > 0.0) total += w * p * std::log(p / q);
    }
  }
  return total;
}

// D(x) = sum_n p(n|x) ln(p(n|x) / q(n)).
inline double information_density(double x, const std::vector<std::pair<double, double>>& atoms,
                                  int counts = 20000) {
  double total = 0.0;
  for (int n = 0; n < counts; ++n) {
    const double p = (1.0 - x) * std::pow(x, n);
    if (p <= 0.0) continue;
    double q = 0.0;
    for (auto [y, w] : atoms) q += w * (1.0 - y) * std::pow(y, n);
    total += p * std::log(p / q);
  }
  return total;
}

// Composite Simpson on [a, b] with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  // Random sorted distinct levels in [0, x_max] with random positive weights.
  std::vector<std::pair<double, double>> distribution(double x_max, int max_atoms) {
    const int k = integer(1, max_atoms);
    std::vector<double> levels;
    while (static_cast<int>(levels.size()) < k) {
      const double x = uniform(0.0, x_max);
      bool fresh = true;
      for (double l : levels) fresh = fresh && std::abs(l - x) > 1e-6;
      if (fresh) levels.push_back(x);
    }
    std::sort(levels.begin(), levels.end());
    std::vector<std::pair<double, double>> out;
    double total = 0.0;
    for (double l : levels) {
      out.emplace_back(l, uniform(0.05, 1.0));
      total += out.back().second;
    }
    for (auto& a : out) a.second /= total;
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace oracle
