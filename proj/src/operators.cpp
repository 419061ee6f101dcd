#include "membrane/operators.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace membrane {

Eigen::MatrixXd assemble_operator(const RegularTree& tree, OperatorKind kind) {
  const auto n = tree.vertex_count();
  const int m = tree.m();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  if (kind == OperatorKind::dirichlet_laplacian) {
    a.diagonal().setConstant(1.0);
    for (std::int32_t v = 1; v < n; ++v) {
      const std::int32_t p = tree.parent(v);
      a(v, p) = a(p, v) = -1.0 / m;
    }
    return a;
  }
  a.diagonal().setConstant(1.0 + 1.0 / m);
  const double adj = -2.0 / m;
  const double mid = 1.0 / (static_cast<double>(m) * m);
  for (std::int32_t v = 1; v < n; ++v) {
    const std::int32_t p = tree.parent(v);
    a(v, p) = a(p, v) = adj;
    // distance-2 pairs through p: grandparent and elder siblings
    if (p != 0) {
      const std::int32_t gp = tree.parent(p);
      a(v, gp) = a(gp, v) = mid;
    }
    for (std::int32_t s = tree.first_child(p); s < v; ++s) a(v, s) = a(s, v) = mid;
  }
  return a;
}

namespace {

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw SolverError(what);
  return llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

Eigen::MatrixXd finite_covariance(const RegularTree& tree) {
  const Eigen::MatrixXd bilap =
      assemble_operator(tree, OperatorKind::dirichlet_bilaplacian);
  Eigen::MatrixXd gn = spd_inverse(bilap, "finite_covariance: factorization failed");
  gn = 0.5 * (gn + gn.transpose()).eval();
  if (identity_residual(bilap, gn) > 1e-8)
    throw SolverError("finite_covariance: identity residual above 1e-8");
  return gn;
}

Eigen::MatrixXd gbar_matrix(const RegularTree& tree) {
  const Eigen::MatrixXd lap = assemble_operator(tree, OperatorKind::dirichlet_laplacian);
  Eigen::LLT<Eigen::MatrixXd> llt(lap);
  if (llt.info() != Eigen::Success)
    throw SolverError("gbar_matrix: factorization of I-Q failed");
  const Eigen::MatrixXd inv1 =
      llt.solve(Eigen::MatrixXd::Identity(lap.rows(), lap.cols()));
  Eigen::MatrixXd gbar = llt.solve(inv1);
  gbar = 0.5 * (gbar + gbar.transpose()).eval();
  return gbar;
}

Eigen::MatrixXd error_matrix(const Eigen::MatrixXd& gbar, const Eigen::MatrixXd& gn) {
  if (gbar.rows() != gn.rows() || gbar.cols() != gn.cols())
    throw std::invalid_argument("error_matrix: dimension mismatch");
  return gbar - gn;
}

BoundConstants bound_constants(int m) {
  if (m < 3) throw std::invalid_argument("bound_constants: m must be >= 3");
  BoundConstants b;
  b.m = m;
  b.c1 = std::pow(m - 1.0, 1.5) / ((m - 2.0) * (std::sqrt(m - 1.0) - 1.0)) +
         static_cast<double>(m) / (m - 2.0);
  b.c2 = 2.0 * (m - 1.0) * (m - 1.0) / std::pow(m - 2.0, 3) +
         static_cast<double>(m) * (m - 1.0) / ((m - 2.0) * (m - 2.0));
  return b;
}

double en_crude_bound_shape(int m, int dx, int dy) {
  if (dx < 1 || dy < 1) throw std::invalid_argument("en_crude_bound_shape: dx, dy >= 1");
  const double px = std::pow(m - 1.0, -dx);
  const double py = std::pow(m - 1.0, -dy);
  return static_cast<double>(dx) * dx * dy * dy * std::min(px, py);
}

double en_finer_bound(int m, int d, int dx, int dy, int j0) {
  if (d < 1 || dx < 1 || dy < 1 || j0 < 0)
    throw std::invalid_argument("en_finer_bound: need d, dx, dy >= 1 and j0 >= 0");
  const BoundConstants b = bound_constants(m);
  if (!(b.c1 / m < 1.0))
    throw RegimeError("en_finer_bound: C_1(m)/m >= 1, outside the large-m regime");
  double first = 0.0;
  if (j0 >= 1) {
    first = j0 * std::pow(2.0 * j0 + 1.0, 4 * j0 + 2) * std::pow(3.0, 4.0 * j0 * j0) *
            std::pow(4.0 * (m - 1) / (m - 2), 2 * j0 + 1) * (m - 1.0) / (m - 2.0) *
            std::pow(static_cast<double>(d), 2 * j0 + 1) * std::pow(m - 1.0, -d);
  }
  const double second = b.c1 * b.c2 / (1.0 - b.c1 / m) * dx * dy *
                        std::pow(m - 1.0, -std::max(dx, dy)) *
                        std::pow(b.c1 / m, j0);
  return first + second;
}

namespace {

double log_bk_first(int m, double t) {
  const double lt = std::log(t);
  return std::log(lt) + (4.0 * lt + 2.0) * std::log(2.0 * lt + 1.0) +
         4.0 * lt * lt * std::log(3.0) +
         (2.0 * lt + 1.0) * std::log(4.0 * (m - 1.0) / (m - 2.0)) +
         std::log((m - 1.0) / (m - 2.0)) + (2.0 * lt + 1.0) * lt -
         t * std::log(m - 1.0);
}

}  // namespace

double bk_bound(int m, double k, double c) {
  if (m < 3) throw std::invalid_argument("bk_bound: m must be >= 3");
  if (!(k >= 2.0)) throw std::invalid_argument("bk_bound: k must be >= 2");
  const BoundConstants b = bound_constants(m);
  return std::exp(log_bk_first(m, k)) +
         c * std::pow(b.c1 / m, std::log(k));
}

double bk_decreasing_onset(int m, double c) {
  const double h = 1e-4;
  double t = 2.0 + h;
  double prev = bk_bound(m, t - h, c);
  while (t < 1e4) {
    const double cur = bk_bound(m, t, c);
    if (cur < prev) {
      // require the finite-difference derivative to stay negative for a window
      bool stays = true;
      double a = cur;
      for (int i = 1; i <= 200 && stays; ++i) {
        const double b2 = bk_bound(m, t + i * 0.5, c);
        stays = b2 < a;
        a = b2;
      }
      if (stays) return t;
    }
    prev = cur;
    t += h;
  }
  throw std::runtime_error("bk_decreasing_onset: no sign change located");
}

double variance_floor(const Eigen::MatrixXd& gn) {
  return gn.diagonal().minCoeff();
}

double variance_floor_explicit(int m) {
  const BoundConstants b = bound_constants(m);
  if (!(b.c1 / m < 1.0))
    throw RegimeError("variance_floor_explicit: C_1(m)/m >= 1");
  return 1.0 - b.c1 * b.c2 / ((m - 1.0) * (1.0 - b.c1 / m));
}

double identity_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd r =
      a * b - Eigen::MatrixXd::Identity(a.rows(), b.cols());
  return r.cwiseAbs().maxCoeff();
}

}  // namespace membrane
