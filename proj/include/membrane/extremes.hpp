#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "membrane/sampler.hpp"
#include "membrane/tree.hpp"

namespace membrane {

/// Centering and scaling for the maximum over the N = |V_n| vertices:
///   B_n = sqrt(2 log N) - (log log N + log 4 pi) / (2 sqrt(2 log N)),
///   b_n = sqrt(G(o,o)) B_n,  a_n = G(o,o)/b_n,  A_n = 1/B_n,
/// and the threshold line u_n(theta) = A_n theta + B_n.
struct ScalingConstants {
  std::int64_t n_vertices = 0;
  double g00 = 0.0;
  double a_n = 0.0;
  double b_n = 0.0;
  double big_a = 0.0;
  double big_b = 0.0;
  double u(double theta) const { return big_a * theta + big_b; }
};

ScalingConstants scaling_constants(int m, int n);

double gumbel_cdf(double theta);

/// Standard normal upper tail via erfc.
double normal_upper_tail(double u);

/// phi(u)/u, the one-term tail asymptotic, exposed for comparison reports.
double mills_upper_tail(double u);

/// lambda_n = N * upper_tail(u_n(theta)).
double lambda_n(int m, int n, double theta);

/// Two-sided Kolmogorov-Smirnov distance of a sample against a cdf.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Cov(1{X>u}, 1{Y>u}) for standard bivariate normals with correlation r,
/// from the derivative-in-r identity integrated with the arcsine substitution
/// (the integrand is smooth up to |r| = 1). Absolute error <= 1e-10.
double indicator_cov(double r, double u);

/// Probe grid used by every cdf-level comparison.
inline constexpr std::array<double, 4> kProbeThetas = {-1.0, 0.0, 1.0, 2.0};

struct RescaledMaxResult {
  std::vector<double> rescaled;          // per-sample (max - center)/scale
  double ks = 0.0;                       // distance to the Gumbel cdf
  std::array<double, 4> probe_cdf{};     // empirical P(rescaled <= theta) on the probe grid
};

/// Rescale per-sample maxima by the pair of constants matching the law:
/// (a_n, b_n) for the infinite-volume field, (A_n, B_n) for the normalized
/// finite-volume field. The plain finite-volume law has no matching theorem
/// constants and is rejected.
RescaledMaxResult rescaled_max_experiment(const std::vector<double>& maxima, FieldLaw law,
                                          const ScalingConstants& constants);
RescaledMaxResult rescaled_max_experiment(const FieldSampleBatch& batch,
                                          const ScalingConstants& constants);

struct MaxRatio {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Mean of per-sample maxima divided by sqrt(2 log N), with a 99% normal CI.
MaxRatio expected_max_ratio(const std::vector<double>& maxima,
                            const ScalingConstants& constants);
MaxRatio expected_max_ratio(const FieldSampleBatch& batch,
                            const ScalingConstants& constants);

enum class CovSource { infinite, finite_normalized };

/// Total-variation bound for the exceedance count against Poisson(lambda_n):
///   (1 - e^-lambda)/lambda * [ sum_x tail(u)^2 + sum_{x != y} |Cov(1,1)| ].
/// The infinite-volume source aggregates pairs by distance class (the
/// correlation r_k depends only on k); the finite-normalized source walks the
/// full correlation matrix.
double stein_chen_bound(const RegularTree& tree, double theta);
double stein_chen_bound(const RegularTree& tree, const Eigen::MatrixXd& gn, double theta);

/// Total variation between the empirical exceedance-count pmf and
/// Poisson(lambda), truncated where the Poisson mass drops below 1e-12.
double exceedance_poisson_tv(const std::vector<int>& counts, double lambda);

}  // namespace membrane
