#pragma once

#include <cstdint>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

/// Generating function of the return probabilities at distance d, evaluated
/// on the real interval [0,1]:
///   Gamma(z) = 2(m-1) / (m-2 + rho(z)) * ((m - rho(z)) / (2(m-1)z))^d,
/// with rho(z) = sqrt(m^2 - 4(m-1)z^2). The z=0 value is the series limit
/// (1 for d=0, 0 otherwise).
double gamma_z(int m, int d, double z);

/// g(1) = (m-1)/(m-2) * (m-1)^{-d}: total occupation of a vertex at distance d.
double greens_g1(int m, int d);

/// g'(1)/g(1) = (2(m-1) + d m (m-2)) / (m-2)^2.
double greens_gprime_over_g(int m, int d);

/// Weighted occupation kernel of the infinite tree,
///   G(d) = ((d+1) m (m-2) + 2) / ((m-2)^3 (m-1)^{d-1})
///        = g'(1) + g(1).
/// This is the formula the independent series oracle confirms.
double greens_infinite(int m, int d);

/// Variant with numerator (d+1) m (m-1)(m-2) - 2(m-1) over (m-2)^3 (m-1)^d.
/// It disagrees with greens_infinite (8 vs 4 at m=3, d=1) and with the series;
/// kept so reports can carry the discrepancy column.
double greens_statement_variant(int m, int d);

/// k-th derivative of the generating function at 1, as the factorial-moment
/// series sum_j j(j-1)...(j-k+1) p_j, truncated by the geometric tail rule to
/// relative error <= tol.
double g_derivative_series(int m, int d, int k, double tol = 1e-10);

/// 3^{(k-1)^2} (k-1)^{k-1} (4(m-1)/(m-2))^k (m-1)/(m-2) d^k (m-1)^{-d},
/// with 0^0 = 1 so the k = 1 case is well defined.
double g_derivative_bound(int m, int d, int k);

/// Coefficients writing k^ell as sum_i alpha_i * k(k-1)...(k-i), i.e. in the
/// falling-factorial basis. alpha_0 = alpha_{ell-1} = 1 and
/// alpha^{(ell)}_i = (i+1) alpha^{(ell-1)}_i + alpha^{(ell-1)}_{i-1}.
struct AlphaTable {
  int power = 0;
  std::vector<std::uint64_t> coeff;  // coeff[i] = alpha^{(power)}_i, i = 0..power-1
};

AlphaTable alpha_coeffs(int power);

}  // namespace membrane
