#include "membrane/sampler.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "membrane/greens.hpp"
#include "membrane/rng.hpp"

namespace membrane {

const char* field_law_name(FieldLaw law) {
  switch (law) {
    case FieldLaw::infinite_volume: return "infinite";
    case FieldLaw::finite_volume: return "finite";
    case FieldLaw::finite_normalized: return "finite-normalized";
  }
  return "?";
}

Eigen::MatrixXd restricted_infinite_covariance(const RegularTree& tree) {
  const auto n = tree.vertex_count();
  std::vector<double> by_distance(2 * tree.n() + 1);
  for (int d = 0; d <= 2 * tree.n(); ++d)
    by_distance[d] = greens_infinite(tree.m(), d);
  Eigen::MatrixXd cov(n, n);
  for (std::int32_t i = 0; i < n; ++i) {
    cov(i, i) = by_distance[0];
    for (std::int32_t j = i + 1; j < n; ++j)
      cov(i, j) = cov(j, i) = by_distance[tree.distance(i, j)];
  }
  return cov;
}

CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  const double max_diag = cov.diagonal().maxCoeff();
  const double cap = 1e-8 * max_diag;
  double eps = 0.0;
  while (true) {
    Eigen::MatrixXd shifted = cov;
    if (eps > 0.0) shifted.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), eps};
    eps = eps == 0.0 ? 1e-14 * max_diag : 10.0 * eps;
    if (eps > cap) throw SolverError("cholesky_with_jitter: jitter cap exceeded");
  }
}

namespace {

constexpr std::int64_t kRowChunk = 1024;

// Fill rows [lo, hi) of z with the counter-based normals for those rows.
void fill_normals(Eigen::MatrixXd& z, std::int64_t lo, std::int64_t hi,
                  std::uint64_t seed) {
  const auto cols = z.cols();
  for (std::int64_t r = lo; r < hi; ++r)
    for (Eigen::Index j = 0; j < cols; ++j)
      z(r - lo, j) = rng::normal(seed, static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(j));
}

}  // namespace

FieldSampleBatch sample_fields(const Eigen::MatrixXd& cov, FieldLaw law, int m, int n,
                               std::int64_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_fields: count must be >= 1");
  const CholeskyFactor factor = cholesky_with_jitter(cov);
  const auto dim = cov.rows();
  FieldSampleBatch batch;
  batch.law = law;
  batch.m = m;
  batch.n = n;
  batch.seed = seed;
  batch.jitter = factor.jitter;
  batch.samples.resize(count, dim);
  Eigen::MatrixXd z(kRowChunk, dim);
  for (std::int64_t lo = 0; lo < count; lo += kRowChunk) {
    const std::int64_t hi = std::min(count, lo + kRowChunk);
    if (hi - lo != z.rows()) z.resize(hi - lo, dim);
    fill_normals(z, lo, hi, seed);
    batch.samples.middleRows(lo, hi - lo).noalias() = z * factor.lower.transpose();
  }
  return batch;
}

FieldSampleBatch normalize_field(const FieldSampleBatch& batch, const Eigen::MatrixXd& gn) {
  if (batch.law != FieldLaw::finite_volume)
    throw std::invalid_argument("normalize_field: batch must carry the finite-volume law");
  if (gn.rows() != batch.samples.cols())
    throw std::invalid_argument("normalize_field: covariance dimension mismatch");
  FieldSampleBatch out = batch;
  out.law = FieldLaw::finite_normalized;
  for (Eigen::Index j = 0; j < gn.rows(); ++j) {
    const double v = gn(j, j);
    if (!(v > 0.0)) throw SolverError("normalize_field: nonpositive variance");
    out.samples.col(j) /= std::sqrt(v);
  }
  return out;
}

MaxExceedStats sample_max_stats(const CholeskyFactor& factor,
                                const std::vector<double>& coordinate_scale,
                                std::int64_t count, std::uint64_t seed,
                                const std::vector<double>& thresholds) {
  if (count < 1) throw std::invalid_argument("sample_max_stats: count must be >= 1");
  const auto dim = factor.lower.rows();
  if (!coordinate_scale.empty() &&
      static_cast<Eigen::Index>(coordinate_scale.size()) != dim)
    throw std::invalid_argument("sample_max_stats: scale dimension mismatch");
  MaxExceedStats stats;
  stats.maxima.resize(count);
  stats.exceed_counts.assign(thresholds.size(), std::vector<int>(count, 0));
  Eigen::VectorXd inv_scale;
  if (!coordinate_scale.empty()) {
    inv_scale.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) inv_scale(j) = 1.0 / coordinate_scale[j];
  }
  Eigen::MatrixXd z(kRowChunk, dim), x(kRowChunk, dim);
  for (std::int64_t lo = 0; lo < count; lo += kRowChunk) {
    const std::int64_t hi = std::min(count, lo + kRowChunk);
    if (hi - lo != z.rows()) {
      z.resize(hi - lo, dim);
      x.resize(hi - lo, dim);
    }
    fill_normals(z, lo, hi, seed);
    x.noalias() = z * factor.lower.transpose();
    if (inv_scale.size() > 0) x = x.array().rowwise() * inv_scale.transpose().array();
    for (std::int64_t r = lo; r < hi; ++r) {
      const auto row = x.row(r - lo);
      stats.maxima[r] = row.maxCoeff();
      for (std::size_t ti = 0; ti < thresholds.size(); ++ti)
        stats.exceed_counts[ti][r] =
            static_cast<int>((row.array() > thresholds[ti]).count());
    }
  }
  return stats;
}

}  // namespace membrane
