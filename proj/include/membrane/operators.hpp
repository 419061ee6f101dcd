#pragma once

#include <Eigen/Dense>

#include "membrane/errors.hpp"
#include "membrane/tree.hpp"

namespace membrane {

enum class OperatorKind { dirichlet_laplacian, dirichlet_bilaplacian };

/// Dirichlet restrictions to V_n of the walk operators, assembled from their
/// stencils:
///   I - Q:   1 on the diagonal, -1/m between adjacent pairs;
///   square:  1 + 1/m on the diagonal, -2/m at distance 1, 1/m^2 at distance 2.
/// The square is the restriction of (P - I)^2 on the full tree (trees have no
/// triangles and a unique midpoint for each distance-2 pair), which a test
/// confirms by multiplying the full operator two generations out.
Eigen::MatrixXd assemble_operator(const RegularTree& tree, OperatorKind kind);

/// G_n: inverse of the restricted square operator via its SPD factorization.
/// Residual of the identity chain is checked to 1e-8 max-norm.
Eigen::MatrixXd finite_covariance(const RegularTree& tree);

/// Gbar_n = (I-Q)^{-2}, computed as two successive SPD solves; equals the
/// weighted occupation sum_{k>=0} (k+1) Q^k.
Eigen::MatrixXd gbar_matrix(const RegularTree& tree);

/// E_n = Gbar_n - G_n.
Eigen::MatrixXd error_matrix(const Eigen::MatrixXd& gbar, const Eigen::MatrixXd& gn);

struct BoundConstants {
  int m = 0;
  double c1 = 0.0;  // (m-1)^{3/2} / ((m-2)(sqrt(m-1)-1)) + m/(m-2)
  double c2 = 0.0;  // 2(m-1)^2/(m-2)^3 + m(m-1)/(m-2)^2
};

BoundConstants bound_constants(int m);

/// dx^2 dy^2 min((m-1)^{-dx}, (m-1)^{-dy}): the crude bound's shape with the
/// generic constant stripped; callers fit and report the constant.
double en_crude_bound_shape(int m, int dx, int dy);

/// Two-term finer bound on |E_n(x,y)| at truncation level j0 (j0 = 0 drops
/// the first term). Throws RegimeError unless C_1(m)/m < 1, which first holds
/// at m = 5.
double en_finer_bound(int m, int d, int dx, int dy, int j0);

/// B_k = log k (2 log k + 1)^{4 log k + 2} 3^{4 (log k)^2}
///       (4(m-1)/(m-2))^{2 log k + 1} (m-1)/(m-2) k^{2 log k + 1} (m-1)^{-k}
///       + c (C_1(m)/m)^{log k},
/// evaluated in log space. Requires k >= 2.
double bk_bound(int m, double k, double c);

/// First t from which the continuous extension of B is decreasing, located by
/// the sign change of a finite-difference derivative.
double bk_decreasing_onset(int m, double c);

/// min over the diagonal of G_n.
double variance_floor(const Eigen::MatrixXd& gn);

/// 1 - C_1 C_2 / ((m-1)(1 - C_1/m)): the explicit floor valid once it is
/// positive (large m). Throws RegimeError when C_1(m)/m >= 1.
double variance_floor_explicit(int m);

/// max_ij |A B - I| without forming the product twice.
double identity_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace membrane
