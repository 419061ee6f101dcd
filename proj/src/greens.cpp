#include "membrane/greens.hpp"

#include <cmath>
#include <limits>

#include "membrane/walk.hpp"

namespace membrane {

namespace {

void check_md(int m, int d) {
  if (m < 3) throw std::invalid_argument("greens: m must be >= 3");
  if (d < 0) throw std::invalid_argument("greens: d must be >= 0");
}

}  // namespace

double gamma_z(int m, int d, double z) {
  check_md(m, d);
  if (!(z >= 0.0 && z <= 1.0))
    throw std::invalid_argument("gamma_z: z must lie in [0, 1]");
  if (z == 0.0) return d == 0 ? 1.0 : 0.0;
  const double rho = std::sqrt(static_cast<double>(m) * m - 4.0 * (m - 1) * z * z);
  const double head = 2.0 * (m - 1) / (m - 2 + rho);
  return head * std::pow((m - rho) / (2.0 * (m - 1) * z), d);
}

double greens_g1(int m, int d) {
  check_md(m, d);
  return (m - 1.0) / (m - 2.0) * std::pow(m - 1.0, -d);
}

double greens_gprime_over_g(int m, int d) {
  check_md(m, d);
  return (2.0 * (m - 1) + static_cast<double>(d) * m * (m - 2)) /
         (static_cast<double>(m - 2) * (m - 2));
}

double greens_infinite(int m, int d) {
  check_md(m, d);
  const double num = (static_cast<double>(d) + 1.0) * m * (m - 2) + 2.0;
  const double den = std::pow(static_cast<double>(m - 2), 3) * std::pow(m - 1.0, d - 1);
  return num / den;
}

double greens_statement_variant(int m, int d) {
  check_md(m, d);
  const double num =
      (static_cast<double>(d) + 1.0) * m * (m - 1) * (m - 2) - 2.0 * (m - 1);
  const double den = std::pow(static_cast<double>(m - 2), 3) * std::pow(m - 1.0, d);
  return num / den;
}

double g_derivative_series(int m, int d, int k, double tol) {
  check_md(m, d);
  if (k < 1) throw std::invalid_argument("g_derivative_series: k must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("g_derivative_series: tol must be > 0");
  const double rho = walk_spectral_ratio(m);
  int horizon = series_horizon(m, k, tol);
  double sum = 0.0;
  for (int round = 0; round < 40; ++round) {
    const DistanceChainSeries series = pk_series(m, d, horizon);
    sum = 0.0;
    for (int j = horizon; j >= k; --j) {
      double w = 1.0;
      for (int i = 0; i < k; ++i) w *= static_cast<double>(j - i);
      sum += w * series.p[j];
    }
    // tail <= (K+2)^k rho^{K+1} / (1 - r*) with r* the worst step ratio
    const double rstar = rho * std::pow((horizon + 2.0) / (horizon + 1.0), k);
    const double tail =
        std::pow(horizon + 2.0, k) * std::pow(rho, horizon + 1.0) / (1.0 - rstar);
    if (tail <= tol * std::max(sum, std::numeric_limits<double>::min())) return sum;
    horizon *= 2;
    if (horizon > 2'000'000)
      throw TruncationError("g_derivative_series: tolerance unattainable within step cap");
  }
  throw TruncationError("g_derivative_series: tolerance unattainable");
}

double g_derivative_bound(int m, int d, int k) {
  check_md(m, d);
  if (k < 1) throw std::invalid_argument("g_derivative_bound: k must be >= 1");
  const double km1 = k - 1.0;
  const double lead = std::pow(3.0, km1 * km1) * (k == 1 ? 1.0 : std::pow(km1, km1));
  return lead * std::pow(4.0 * (m - 1) / (m - 2), k) * (m - 1.0) / (m - 2.0) *
         std::pow(static_cast<double>(d), k) * std::pow(m - 1.0, -d);
}

AlphaTable alpha_coeffs(int power) {
  if (power < 1) throw std::invalid_argument("alpha_coeffs: power must be >= 1");
  if (power > 20) throw std::invalid_argument("alpha_coeffs: power too large for exact integers");
  AlphaTable table;
  table.power = power;
  std::vector<std::uint64_t> cur = {1};
  for (int l = 2; l <= power; ++l) {
    std::vector<std::uint64_t> next(l, 1);
    for (int i = 1; i <= l - 2; ++i)
      next[i] = static_cast<std::uint64_t>(i + 1) * cur[i] + cur[i - 1];
    cur = std::move(next);
  }
  table.coeff = std::move(cur);
  return table;
}

}  // namespace membrane
