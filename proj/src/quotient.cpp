#include "membrane/quotient.hpp"

#include <Eigen/Dense>
#include <stdexcept>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

// State layout: path vertices P_a for a = 0..q, then branch states B_{a,t}
// for a = 0..q, t = a+1..n (vertices of depth t meeting the root-y path at
// depth a).
struct Layout {
  int n, q;
  int index_path(int a) const { return a; }
  int index_branch(int a, int t) const {
    // offset of block a: q+1 + sum_{a'<a} (n - a')
    const int block = (q + 1) + a * n - (a * (a - 1)) / 2;
    return block + (t - a - 1);
  }
  int size() const { return (q + 1) + (q + 1) * n - (q * (q + 1)) / 2; }
};

}  // namespace

std::vector<PairClass> quotient_covariance_column(int m, int n, int y_depth) {
  if (m < 3) throw std::invalid_argument("quotient_covariance_column: m must be >= 3");
  if (n < 0 || y_depth < 0 || y_depth > n)
    throw std::invalid_argument("quotient_covariance_column: need 0 <= y_depth <= n");
  const int q = y_depth;
  const Layout lay{n, q};
  const int s = lay.size();
  Eigen::MatrixXd qmat = Eigen::MatrixXd::Zero(s, s);

  // off-path branch multiplicity at path vertex of depth a
  auto branches = [&](int a) -> int {
    if (q == 0) return m;               // y is the root: every child is off-path
    if (a == 0) return m - 1;           // root: one child continues the path
    if (a < q) return m - 2;            // interior path vertex
    return m - 1;                       // y itself
  };

  const double inv_m = 1.0 / m;
  for (int a = 0; a <= q; ++a) {
    const int i = lay.index_path(a);
    if (a > 0) qmat(i, lay.index_path(a - 1)) += inv_m;
    if (a < q) qmat(i, lay.index_path(a + 1)) += inv_m;
    const int k = branches(a);
    if (a + 1 <= n && k > 0) qmat(i, lay.index_branch(a, a + 1)) += k * inv_m;
  }
  for (int a = 0; a <= q; ++a)
    for (int t = a + 1; t <= n; ++t) {
      const int i = lay.index_branch(a, t);
      if (t - 1 == a)
        qmat(i, lay.index_path(a)) += inv_m;
      else
        qmat(i, lay.index_branch(a, t - 1)) += inv_m;
      if (t + 1 <= n) qmat(i, lay.index_branch(a, t + 1)) += (m - 1.0) * inv_m;
    }

  // boundary deficiency: depth-n vertices lose m-1 moves (the root loses all
  // m when n = 0); the squared operator gains deficiency/m^2 on the diagonal
  Eigen::VectorXd deficiency = Eigen::VectorXd::Zero(s);
  auto depth_of = [&](int i, int& a, int& t) {
    if (i <= q) {
      a = t = i;
      return;
    }
    for (int aa = 0; aa <= q; ++aa) {
      const int lo = lay.index_branch(aa, aa + 1);
      const int hi = lay.index_branch(aa, n);
      if (aa + 1 <= n && i >= lo && i <= hi) {
        a = aa;
        t = aa + 1 + (i - lo);
        return;
      }
    }
    throw std::logic_error("quotient: bad state index");
  };
  for (int i = 0; i < s; ++i) {
    int a, t;
    depth_of(i, a, t);
    if (n == 0)
      deficiency(i) = m;
    else if (t == n)
      deficiency(i) = m - 1;
  }

  const Eigen::MatrixXd imq = Eigen::MatrixXd::Identity(s, s) - qmat;
  const Eigen::MatrixXd imq2 = imq * imq;
  Eigen::MatrixXd bilap = imq2;
  bilap.diagonal() += deficiency / (static_cast<double>(m) * m);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs(lay.index_path(q)) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_g(bilap);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_b(imq2);
  const Eigen::VectorXd gn = lu_g.solve(rhs);
  const Eigen::VectorXd gbar = lu_b.solve(rhs);
  if ((bilap * gn - rhs).cwiseAbs().maxCoeff() > 1e-9 ||
      (imq2 * gbar - rhs).cwiseAbs().maxCoeff() > 1e-9)
    throw SolverError("quotient_covariance_column: solve residual too large");

  std::vector<PairClass> out;
  out.reserve(s);
  auto class_size = [&](int a, int t) -> std::int64_t {
    if (t == a) return 1;
    std::int64_t sz = branches(a);
    for (int i = 0; i < t - a - 1; ++i) sz *= (m - 1);
    return sz;
  };
  for (int i = 0; i < s; ++i) {
    int a, t;
    depth_of(i, a, t);
    PairClass c;
    c.meet_depth = a;
    c.x_depth = t;
    c.size = class_size(a, t);
    c.pair_distance = (t - a) + (q - a);
    c.dx = n + 1 - t;
    c.dy = n + 1 - q;
    c.g_n = gn(i);
    c.gbar_n = gbar(i);
    c.e_n = gbar(i) - gn(i);
    out.push_back(c);
  }
  return out;
}

double quotient_diag(int m, int n, int depth) {
  const auto col = quotient_covariance_column(m, n, depth);
  for (const PairClass& c : col)
    if (c.meet_depth == depth && c.x_depth == depth) return c.g_n;
  throw std::logic_error("quotient_diag: diagonal class missing");
}

}  // namespace membrane
