#include "membrane/walk.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <thread>

#include "membrane/operators.hpp"
#include "membrane/rng.hpp"

namespace membrane {

DistanceChainSeries pk_series(int m, int d, int horizon) {
  if (m < 3) throw std::invalid_argument("pk_series: m must be >= 3");
  if (d < 0 || horizon < 0) throw std::invalid_argument("pk_series: d, horizon must be >= 0");
  DistanceChainSeries s;
  s.m = m;
  s.d = d;
  s.horizon = horizon;
  s.p.assign(horizon + 1, 0.0);
  const int states = d + horizon + 2;  // the chain never leaves [0, d+horizon]
  std::vector<double> mass(states, 0.0), next(states, 0.0);
  mass[d] = 1.0;
  s.p[0] = mass[0];
  const double up = (m - 1.0) / m;
  const double down = 1.0 / m;
  for (int k = 1; k <= horizon; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    next[1] += mass[0];
    for (int j = 1; j < states; ++j) {
      if (mass[j] == 0.0) continue;
      next[j - 1] += mass[j] * down;
      if (j + 1 < states) next[j + 1] += mass[j] * up;
    }
    mass.swap(next);
    s.p[k] = mass[0];
  }
  return s;
}

double walk_spectral_ratio(int m) {
  if (m < 3) throw std::invalid_argument("walk_spectral_ratio: m must be >= 3");
  return 2.0 * std::sqrt(m - 1.0) / m;
}

int series_horizon(int m, int weight_power, double tol, int step_cap) {
  const double rho = walk_spectral_ratio(m);
  for (int k = 4; k <= step_cap; k += 4) {
    const double rstar = rho * std::pow((k + 2.0) / (k + 1.0), weight_power);
    if (rstar >= 1.0) continue;
    const double bound =
        std::pow(k + 2.0, weight_power) * std::pow(rho, k + 1.0) / (1.0 - rstar);
    if (bound < tol) return k;
  }
  throw TruncationError("series_horizon: tolerance unattainable within step cap");
}

ExitTimeMoments exit_time_moments(const RegularTree& tree) {
  const auto n = tree.vertex_count();
  const Eigen::MatrixXd lap = assemble_operator(tree, OperatorKind::dirichlet_laplacian);
  Eigen::LLT<Eigen::MatrixXd> llt(lap);
  if (llt.info() != Eigen::Success)
    throw SolverError("exit_time_moments: factorization of I-Q failed");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd u = llt.solve(ones);
  // Q u = u - (I-Q) u = u - 1
  Eigen::VectorXd rhs2 = ones + 2.0 * (u - ones);
  Eigen::VectorXd v = llt.solve(rhs2);
  const double r1 = (lap * u - ones).norm() / ones.norm();
  const double r2 = (lap * v - rhs2).norm() / rhs2.norm();
  if (r1 > 1e-10 || r2 > 1e-10)
    throw SolverError("exit_time_moments: residual above 1e-10");
  ExitTimeMoments out;
  out.first_moment.assign(u.data(), u.data() + n);
  out.second_moment.assign(v.data(), v.data() + n);
  return out;
}

RadialExitMoments radial_exit_time_moments(int m, int n) {
  if (m < 3 || n < 0) throw std::invalid_argument("radial_exit_time_moments: bad params");
  const int s = n + 1;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(s, s);
  for (int t = 1; t <= n; ++t) {
    q(t, t - 1) = 1.0 / m;
    if (t + 1 <= n) q(t, t + 1) = (m - 1.0) / m;
  }
  if (n >= 1) q(0, 1) = 1.0;
  const Eigen::MatrixXd imq = Eigen::MatrixXd::Identity(s, s) - q;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(imq);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s);
  const Eigen::VectorXd u = lu.solve(ones);
  const Eigen::VectorXd v = lu.solve(ones + 2.0 * (q * u));
  RadialExitMoments out;
  out.first.assign(u.data(), u.data() + s);
  out.second.assign(v.data(), v.data() + s);
  return out;
}

namespace {

/// Walk position as the child-index path from the root, with the length of
/// the common prefix with y's path maintained incrementally so membership in
/// V_n and hits of y are O(1) per step.
struct PathWalker {
  const RegularTree& tree;
  std::vector<std::int32_t> y_path;
  std::vector<std::int32_t> path;
  std::size_t common = 0;

  PathWalker(const RegularTree& t, std::int32_t x, std::int32_t y) : tree(t) {
    y_path = root_path(y);
    path = root_path(x);
    recompute_common();
  }

  std::vector<std::int32_t> root_path(std::int32_t v) const {
    std::vector<std::int32_t> p;
    while (v != 0) {
      const std::int32_t par = tree.parent(v);
      p.push_back(v - tree.first_child(par));
      v = par;
    }
    std::reverse(p.begin(), p.end());
    return p;
  }

  void recompute_common() {
    common = 0;
    while (common < path.size() && common < y_path.size() &&
           path[common] == y_path[common])
      ++common;
  }

  int depth() const { return static_cast<int>(path.size()); }
  bool at_y() const { return common == path.size() && path.size() == y_path.size(); }

  void step(rng::SplitMix& gen) {
    const int m = tree.m();
    if (path.empty()) {
      push(gen.below(static_cast<std::uint32_t>(m)));
      return;
    }
    const std::uint32_t r = gen.below(static_cast<std::uint32_t>(m));
    if (r == 0) {
      if (common == path.size()) common = path.size() - 1;
      path.pop_back();
    } else {
      push(static_cast<std::int32_t>(r - 1));
    }
  }

  void push(std::int32_t child) {
    const bool extend =
        common == path.size() && path.size() < y_path.size() && y_path[path.size()] == child;
    path.push_back(child);
    if (extend) ++common;
  }
};

}  // namespace

ExcursionRecord mc_excursion_walk(const RegularTree& tree, std::int32_t x,
                                  std::int32_t y, int excursions, std::uint64_t seed,
                                  std::int64_t step_cap) {
  if (excursions < 1) throw std::invalid_argument("mc_excursion_walk: excursions must be >= 1");
  const int n = tree.n();
  PathWalker w(tree, x, y);
  rng::SplitMix gen(rng::mix64(seed));

  ExcursionRecord rec;
  std::int64_t prev_tau = -1;
  double m_product = 1.0;
  double occupation = 0.0;
  std::int64_t k = 0;
  if (w.at_y()) occupation += static_cast<double>(0 - prev_tau);  // k = 0 term
  while (static_cast<int>(rec.tau.size()) <= excursions) {
    if (k >= step_cap)
      throw TruncationError("mc_excursion_walk: step budget exceeded");
    w.step(gen);
    ++k;
    if (w.depth() > n) {
      // S_k is outside V_n: this k is the next visit time
      m_product *= static_cast<double>(k - prev_tau - 1);
      rec.tau.push_back(k);
      rec.m_products.push_back(m_product);
      rec.local_times.push_back(occupation);
      prev_tau = k;
      occupation = 0.0;
    } else if (w.at_y()) {
      occupation += static_cast<double>(k - prev_tau);
    }
  }
  return rec;
}

double exact_a1(const RegularTree& tree, std::int32_t x, std::int32_t y) {
  tree.distance(x, y);  // validates both indices
  const Eigen::MatrixXd gbar = gbar_matrix(tree);
  const int n = tree.n();
  const double outside_children = n == 0 ? tree.m() : tree.m() - 1.0;
  double sum = 0.0;
  for (std::int32_t w = tree.generation_begin(n); w < tree.generation_end(n); ++w)
    sum += gbar(x, w) * gbar(w, y);
  return outside_children / (static_cast<double>(tree.m()) * tree.m()) * sum;
}

AjEstimate mc_estimate_aj(const RegularTree& tree, std::int32_t x, std::int32_t y,
                          int j, std::int64_t samples, std::uint64_t seed,
                          std::int64_t step_cap, int threads) {
  if (j < 1) throw std::invalid_argument("mc_estimate_aj: j must be >= 1");
  if (samples < 1) throw std::invalid_argument("mc_estimate_aj: samples must be >= 1");

  // per-replicate terms a_1..a_j, filled independently so any thread layout
  // produces the same sequential reduction
  std::vector<double> values(static_cast<std::size_t>(samples) * j);
  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      const ExcursionRecord rec =
          mc_excursion_walk(tree, x, y, j, rng::mix64(seed ^ static_cast<std::uint64_t>(r)),
                            step_cap);
      for (int i = 1; i <= j; ++i)
        values[static_cast<std::size_t>(r) * j + (i - 1)] =
            rec.m_products[i - 1] * rec.local_times[i];
    }
  };
  if (threads <= 1) {
    run_range(0, samples);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(samples, lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  AjEstimate est;
  est.terms.resize(j);
  for (int i = 0; i < j; ++i) {
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t r = 0; r < samples; ++r) {
      const double v = values[static_cast<std::size_t>(r) * j + i];
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var =
        samples > 1 ? (sumsq - samples * mean * mean) / static_cast<double>(samples - 1) : 0.0;
    est.terms[i].estimate = mean;
    est.terms[i].std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
  }
  const Eigen::MatrixXd gbar = gbar_matrix(tree);
  est.gbar_xy = gbar(x, y);
  est.alternating_partial.resize(j);
  double partial = est.gbar_xy;
  for (int i = 0; i < j; ++i) {
    partial += (i % 2 == 0 ? -1.0 : 1.0) * est.terms[i].estimate;
    est.alternating_partial[i] = partial;
  }
  return est;
}

}  // namespace membrane
