#include "membrane/extremes.hpp"

#include <algorithm>
#include <cmath>

#include "membrane/greens.hpp"

namespace membrane {

ScalingConstants scaling_constants(int m, int n) {
  const std::int64_t count = RegularTree::closed_form_count(m, n);
  if (count < 3) throw std::invalid_argument("scaling_constants: need N >= 3");
  ScalingConstants c;
  c.n_vertices = count;
  c.g00 = greens_infinite(m, 0);
  const double logn = std::log(static_cast<double>(count));
  const double root = std::sqrt(2.0 * logn);
  c.big_b = root - (std::log(logn) + std::log(4.0 * M_PI)) / (2.0 * root);
  c.big_a = 1.0 / c.big_b;
  c.b_n = std::sqrt(c.g00) * c.big_b;
  c.a_n = c.g00 / c.b_n;
  return c;
}

double gumbel_cdf(double theta) { return std::exp(-std::exp(-theta)); }

double normal_upper_tail(double u) { return 0.5 * std::erfc(u / std::sqrt(2.0)); }

double mills_upper_tail(double u) {
  return std::exp(-0.5 * u * u) / (u * std::sqrt(2.0 * M_PI));
}

double lambda_n(int m, int n, double theta) {
  const ScalingConstants c = scaling_constants(m, n);
  return static_cast<double>(c.n_vertices) * normal_upper_tail(c.u(theta));
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double inv = 1.0 / static_cast<double>(samples.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    sup = std::max(sup, std::max(std::abs((i + 1) * inv - f), std::abs(i * inv - f)));
  }
  return sup;
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
double simpson(const std::function<double(double)>& f, double a, double m, double b,
               double fa, double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double indicator_cov(double r, double u) {
  if (!(r >= -1.0 && r <= 1.0))
    throw std::invalid_argument("indicator_cov: |r| must be <= 1");
  if (r == 0.0) return 0.0;
  // d/drho P(X>u, Y>u) = binormal density at (u,u); rho = sin t removes the
  // 1/sqrt(1-rho^2) singularity
  const double uu = u * u;
  auto f = [uu](double t) {
    const double denom = 1.0 + std::sin(t);
    if (denom <= 0.0) return uu == 0.0 ? 1.0 : 0.0;  // t = -pi/2 endpoint
    return std::exp(-uu / denom);
  };
  const double upper = std::asin(r);
  const double sign = upper >= 0.0 ? 1.0 : -1.0;
  const double integral = integrate(f, std::min(0.0, upper), std::max(0.0, upper), 1e-12);
  return sign * integral / (2.0 * M_PI);
}

RescaledMaxResult rescaled_max_experiment(const std::vector<double>& maxima, FieldLaw law,
                                          const ScalingConstants& constants) {
  if (maxima.empty()) throw std::invalid_argument("rescaled_max_experiment: empty sample");
  double center = 0.0, scale = 1.0;
  switch (law) {
    case FieldLaw::infinite_volume:
      center = constants.b_n;
      scale = constants.a_n;
      break;
    case FieldLaw::finite_normalized:
      center = constants.big_b;
      scale = constants.big_a;
      break;
    case FieldLaw::finite_volume:
      throw std::invalid_argument(
          "rescaled_max_experiment: the plain finite-volume law has no matching constants");
  }
  RescaledMaxResult out;
  out.rescaled.resize(maxima.size());
  for (std::size_t i = 0; i < maxima.size(); ++i)
    out.rescaled[i] = (maxima[i] - center) / scale;
  out.ks = ks_distance(out.rescaled, gumbel_cdf);
  for (std::size_t t = 0; t < kProbeThetas.size(); ++t) {
    std::size_t below = 0;
    for (const double v : out.rescaled)
      if (v <= kProbeThetas[t]) ++below;
    out.probe_cdf[t] = static_cast<double>(below) / static_cast<double>(maxima.size());
  }
  return out;
}

RescaledMaxResult rescaled_max_experiment(const FieldSampleBatch& batch,
                                          const ScalingConstants& constants) {
  std::vector<double> maxima(batch.samples.rows());
  for (Eigen::Index r = 0; r < batch.samples.rows(); ++r)
    maxima[r] = batch.samples.row(r).maxCoeff();
  return rescaled_max_experiment(maxima, batch.law, constants);
}

MaxRatio expected_max_ratio(const std::vector<double>& maxima,
                            const ScalingConstants& constants) {
  if (maxima.empty()) throw std::invalid_argument("expected_max_ratio: empty sample");
  const double denom = std::sqrt(2.0 * std::log(static_cast<double>(constants.n_vertices)));
  double sum = 0.0, sumsq = 0.0;
  for (const double v : maxima) {
    sum += v;
    sumsq += v * v;
  }
  const double count = static_cast<double>(maxima.size());
  const double mean = sum / count;
  const double var = maxima.size() > 1 ? (sumsq - count * mean * mean) / (count - 1.0) : 0.0;
  const double se = std::sqrt(std::max(0.0, var) / count);
  constexpr double z99 = 2.5758293035489004;  // 99% two-sided normal quantile
  MaxRatio out;
  out.estimate = mean / denom;
  out.ci_low = (mean - z99 * se) / denom;
  out.ci_high = (mean + z99 * se) / denom;
  return out;
}

MaxRatio expected_max_ratio(const FieldSampleBatch& batch, const ScalingConstants& constants) {
  if (batch.law != FieldLaw::finite_volume)
    throw std::invalid_argument("expected_max_ratio: batch must carry the finite-volume law");
  std::vector<double> maxima(batch.samples.rows());
  for (Eigen::Index r = 0; r < batch.samples.rows(); ++r)
    maxima[r] = batch.samples.row(r).maxCoeff();
  return expected_max_ratio(maxima, constants);
}

double stein_chen_bound(const RegularTree& tree, double theta) {
  const ScalingConstants c = scaling_constants(tree.m(), tree.n());
  const double u = c.u(theta);
  const double tail = normal_upper_tail(u);
  const double lambda = static_cast<double>(c.n_vertices) * tail;
  const DistanceClassTable classes = distance_class_counts(tree);
  double pair_sum = 0.0;
  for (int k = 1; k <= 2 * tree.n(); ++k) {
    if (classes.counts[k] == 0) continue;
    const double rk = greens_infinite(tree.m(), k) / c.g00;
    pair_sum += static_cast<double>(classes.counts[k]) * std::abs(indicator_cov(rk, u));
  }
  const double diag_sum = static_cast<double>(c.n_vertices) * tail * tail;
  return (1.0 - std::exp(-lambda)) / lambda * (diag_sum + pair_sum);
}

double stein_chen_bound(const RegularTree& tree, const Eigen::MatrixXd& gn, double theta) {
  const auto n = tree.vertex_count();
  if (gn.rows() != n) throw std::invalid_argument("stein_chen_bound: dimension mismatch");
  const ScalingConstants c = scaling_constants(tree.m(), tree.n());
  const double u = c.u(theta);
  const double tail = normal_upper_tail(u);
  const double lambda = static_cast<double>(n) * tail;
  Eigen::VectorXd inv_sd(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sd(i) = 1.0 / std::sqrt(gn(i, i));
  double pair_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = gn(i, j) * inv_sd(i) * inv_sd(j);
      pair_sum += 2.0 * std::abs(indicator_cov(r, u));
    }
  const double diag_sum = static_cast<double>(n) * tail * tail;
  return (1.0 - std::exp(-lambda)) / lambda * (diag_sum + pair_sum);
}

double exceedance_poisson_tv(const std::vector<int>& counts, double lambda) {
  if (counts.empty()) throw std::invalid_argument("exceedance_poisson_tv: empty sample");
  if (lambda < 0.0) throw std::invalid_argument("exceedance_poisson_tv: lambda must be >= 0");
  int max_count = 0;
  for (const int w : counts) max_count = std::max(max_count, w);
  // extend past the empirical support until the Poisson mass is negligible
  std::vector<double> poisson;
  double mass = std::exp(-lambda);
  int k = 0;
  while (k <= max_count || mass >= 1e-12) {
    poisson.push_back(mass);
    ++k;
    mass *= lambda / k;
    if (k > max_count + 4000) break;
  }
  std::vector<double> empirical(poisson.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(counts.size());
  for (const int w : counts) empirical[w] += inv;
  double tv = 0.0;
  for (std::size_t i = 0; i < poisson.size(); ++i)
    tv += std::abs(empirical[i] - poisson[i]);
  return 0.5 * tv;
}

}  // namespace membrane
