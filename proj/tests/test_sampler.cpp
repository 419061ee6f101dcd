#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "membrane/greens.hpp"
#include "membrane/operators.hpp"
#include "membrane/sampler.hpp"

using namespace membrane;

namespace {

double column_mean(const Eigen::MatrixXd& s, Eigen::Index j) { return s.col(j).mean(); }

double column_var(const Eigen::MatrixXd& s, Eigen::Index j) {
  const double mu = column_mean(s, j);
  return (s.col(j).array() - mu).square().sum() / (s.rows() - 1.0);
}

double pair_cov(const Eigen::MatrixXd& s, Eigen::Index i, Eigen::Index j, double& se) {
  const auto prod = (s.col(i).array() * s.col(j).array()).eval();
  const double mean = prod.mean();
  const double var = (prod - mean).square().sum() / (s.rows() - 1.0);
  se = std::sqrt(var / s.rows());
  return mean;
}

}  // namespace

TEST_CASE("restricted infinite covariance") {
  const RegularTree t = RegularTree::build({3, 4});
  const Eigen::MatrixXd cov = restricted_infinite_covariance(t);
  for (std::int32_t i = 0; i < t.vertex_count(); ++i)
    CHECK(cov(i, i) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(cov(0, 1) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(cov(0, t.first_child(1)) == doctest::Approx(5.5).epsilon(1e-14));

  const RegularTree t40 = RegularTree::build({4, 0});
  CHECK(restricted_infinite_covariance(t40)(0, 0) == doctest::Approx(3.75).epsilon(1e-14));
}

TEST_CASE("cholesky with jitter") {
  const RegularTree t = RegularTree::build({3, 4});
  const Eigen::MatrixXd cov = restricted_infinite_covariance(t);
  const CholeskyFactor f = cholesky_with_jitter(cov);
  CHECK(f.jitter == 0.0);
  const Eigen::MatrixXd re = f.lower * f.lower.transpose();
  CHECK((re - cov).cwiseAbs().maxCoeff() <= 1e-8);

  // exactly singular PSD matrix needs a shift
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  const CholeskyFactor fj = cholesky_with_jitter(ones);
  CHECK(fj.jitter > 0.0);
  CHECK(fj.jitter <= 1e-8);

  // indefinite matrix can never factor within the cap
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky_with_jitter(bad), SolverError);
}

TEST_CASE("standard normal sanity on the identity covariance") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
  const FieldSampleBatch b = sample_fields(eye, FieldLaw::infinite_volume, 3, 0, 100000, 31);
  for (Eigen::Index j = 0; j < 5; ++j) {
    CHECK(column_var(b.samples, j) >= 0.98);
    CHECK(column_var(b.samples, j) <= 1.02);
    CHECK(std::abs(column_mean(b.samples, j)) <= 5.0 / std::sqrt(100000.0));
  }
  // skewness and excess kurtosis at 5 sigma
  const auto col = b.samples.col(0).array();
  const double mu = col.mean();
  const double sd = std::sqrt((col - mu).square().mean());
  const double skew = ((col - mu) / sd).cube().mean();
  const double kurt = ((col - mu) / sd).pow(4).mean() - 3.0;
  CHECK(std::abs(skew) <= 5.0 * std::sqrt(6.0 / 100000.0));
  CHECK(std::abs(kurt) <= 5.0 * std::sqrt(24.0 / 100000.0));
}

TEST_CASE("same seed reproduces the batch bit for bit") {
  const RegularTree t = RegularTree::build({3, 2});
  const Eigen::MatrixXd cov = restricted_infinite_covariance(t);
  const FieldSampleBatch a = sample_fields(cov, FieldLaw::infinite_volume, 3, 2, 4097, 77);
  const FieldSampleBatch b = sample_fields(cov, FieldLaw::infinite_volume, 3, 2, 4097, 77);
  CHECK((a.samples.array() == b.samples.array()).all());
  const FieldSampleBatch c = sample_fields(cov, FieldLaw::infinite_volume, 3, 2, 4097, 78);
  CHECK(!(c.samples.array() == a.samples.array()).all());
  CHECK_THROWS_AS(sample_fields(cov, FieldLaw::infinite_volume, 3, 2, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("empirical covariance hits the infinite-volume kernel") {
  const RegularTree t = RegularTree::build({3, 4});
  const Eigen::MatrixXd cov = restricted_infinite_covariance(t);
  const FieldSampleBatch b = sample_fields(cov, FieldLaw::infinite_volume, 3, 4, 100000, 5);
  // probe pair at distance 2: kernel value 11/2
  double se = 0.0;
  const double c = pair_cov(b.samples, 0, t.first_child(1), se);
  CHECK(std::abs(c - 5.5) <= 5.0 * se);

  // exchange property: equidistant pairs share their covariance
  double se_a = 0.0, se_b = 0.0;
  const double ca = pair_cov(b.samples, 1, 2, se_a);  // two root children, distance 2
  const double cb = pair_cov(b.samples, 0, t.first_child(1), se_b);
  CHECK(std::abs(ca - cb) <= 5.0 * std::sqrt(se_a * se_a + se_b * se_b));
}

TEST_CASE("normalized field has unit variances") {
  const RegularTree t = RegularTree::build({3, 4});
  const Eigen::MatrixXd gn = finite_covariance(t);
  const FieldSampleBatch finite = sample_fields(gn, FieldLaw::finite_volume, 3, 4, 100000, 9);
  const FieldSampleBatch psi = normalize_field(finite, gn);
  CHECK(psi.law == FieldLaw::finite_normalized);
  for (Eigen::Index j = 0; j < psi.samples.cols(); ++j) {
    const double v = column_var(psi.samples, j);
    CHECK(v >= 0.97);
    CHECK(v <= 1.03);
  }
  CHECK_THROWS_AS(normalize_field(psi, gn), std::invalid_argument);

  // scaling the field by 2 and the covariance by 4 normalizes to the same
  // values exactly (powers of two commute with the square root)
  FieldSampleBatch doubled = finite;
  doubled.samples *= 2.0;
  const FieldSampleBatch psi2 = normalize_field(doubled, Eigen::MatrixXd(4.0 * gn));
  CHECK((psi2.samples.array() == psi.samples.array()).all());
}

TEST_CASE("single-vertex normalization") {
  const RegularTree t0 = RegularTree::build({3, 0});
  const Eigen::MatrixXd g0 = finite_covariance(t0);
  const FieldSampleBatch b = sample_fields(g0, FieldLaw::finite_volume, 3, 0, 1000, 3);
  const FieldSampleBatch psi = normalize_field(b, g0);
  for (Eigen::Index r = 0; r < 1000; ++r)
    CHECK(psi.samples(r, 0) ==
          doctest::Approx(b.samples(r, 0) / std::sqrt(0.75)).epsilon(1e-15));
}

TEST_CASE("streaming stats agree with the materialized batch") {
  const RegularTree t = RegularTree::build({3, 3});
  const Eigen::MatrixXd gn = finite_covariance(t);
  const CholeskyFactor f = cholesky_with_jitter(gn);
  std::vector<double> scale(t.vertex_count());
  for (std::int32_t j = 0; j < t.vertex_count(); ++j) scale[j] = std::sqrt(gn(j, j));
  const std::vector<double> thresholds = {0.5, 1.5};
  const MaxExceedStats stats = sample_max_stats(f, scale, 3000, 21, thresholds);

  const FieldSampleBatch batch = sample_fields(gn, FieldLaw::finite_volume, 3, 3, 3000, 21);
  const FieldSampleBatch psi = normalize_field(batch, gn);
  for (Eigen::Index r = 0; r < 3000; ++r) {
    CHECK(stats.maxima[r] == doctest::Approx(psi.samples.row(r).maxCoeff()).epsilon(1e-12));
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      const int count = static_cast<int>((psi.samples.row(r).array() > thresholds[ti]).count());
      CHECK(stats.exceed_counts[ti][r] == count);
    }
  }
}
