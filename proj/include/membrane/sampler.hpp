#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/tree.hpp"

namespace membrane {

enum class FieldLaw { infinite_volume, finite_volume, finite_normalized };

const char* field_law_name(FieldLaw law);

/// Gaussian field configurations: row = one configuration, column = vertex in
/// BFS order. Reproducible from (seed, count, N) alone; jitter records the
/// diagonal shift the factorization needed (0 when none).
struct FieldSampleBatch {
  FieldLaw law = FieldLaw::infinite_volume;
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  Eigen::MatrixXd samples;
};

/// Pairwise infinite-volume covariance on V_n: entry (x,y) is the closed-form
/// kernel at distance d(x,y).
Eigen::MatrixXd restricted_infinite_covariance(const RegularTree& tree);

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Lower Cholesky factor, adding an escalating diagonal jitter (from
/// 1e-14 * max diagonal up to the 1e-8 * max diagonal cap) if the plain
/// factorization fails. Throws SolverError past the cap.
CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& cov);

/// count i.i.d. rows L z, with z_j the counter-based standard normal draw
/// (seed, row, j). Bit-reproducible and order-independent across rows.
FieldSampleBatch sample_fields(const Eigen::MatrixXd& cov, FieldLaw law, int m, int n,
                               std::int64_t count, std::uint64_t seed);

/// Divide each coordinate by sqrt(G_n(x,x)); batch must carry the finite
/// volume law over the same tree.
FieldSampleBatch normalize_field(const FieldSampleBatch& batch, const Eigen::MatrixXd& gn);

/// Streaming fold over the same rows sample_fields would produce: per-sample
/// maximum and exceedance counts per threshold, without materializing the
/// batch. coordinate_scale (empty = none) divides each coordinate first.
struct MaxExceedStats {
  std::vector<double> maxima;                 // per sample
  std::vector<std::vector<int>> exceed_counts;  // [threshold][sample]
};

MaxExceedStats sample_max_stats(const CholeskyFactor& factor,
                                const std::vector<double>& coordinate_scale,
                                std::int64_t count, std::uint64_t seed,
                                const std::vector<double>& thresholds);

}  // namespace membrane
