#pragma once

#include <cstdint>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/tree.hpp"

namespace membrane {

/// k-step probabilities p_k = P_x(S_k = y) for d(x,y) = d, computed by the
/// exact dynamic program on the distance-to-y chain: from j >= 1 the distance
/// moves to j-1 with probability 1/m and to j+1 with probability (m-1)/m;
/// from 0 it moves to 1 with probability 1. The projection is exactly Markov
/// on a tree, so these are the true transition probabilities, not an
/// approximation.
struct DistanceChainSeries {
  int m = 0;
  int d = 0;
  int horizon = 0;
  std::vector<double> p;  // p[k], k = 0..horizon
};

DistanceChainSeries pk_series(int m, int d, int horizon);

/// Spectral radius of the tree walk, 2 sqrt(m-1)/m; p_k <= ratio^k, which is
/// what the truncation rule leans on.
double walk_spectral_ratio(int m);

/// Smallest K whose analytic tail bound for sum_{k>K} (k+1)^p ratio^k drops
/// below tol. Throws TruncationError past the step cap.
int series_horizon(int m, int weight_power, double tol, int step_cap = 2'000'000);

/// Per-vertex first and second moments of the exit time from V_n, solved from
/// (I-Q) u = 1 and (I-Q) v = 1 + 2 Q u with Q the killed one-step matrix.
struct ExitTimeMoments {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

ExitTimeMoments exit_time_moments(const RegularTree& tree);

/// Same moments as a function of depth only (the solution is radial); exact
/// for any m, n via an (n+1)-state chain, so it scales to trees that are far
/// beyond dense-matrix reach.
struct RadialExitMoments {
  std::vector<double> first;   // index = depth
  std::vector<double> second;
};

RadialExitMoments radial_exit_time_moments(int m, int n);

/// One simulated walk from x recording the successive visit times tau_0 < ...
/// <= tau_J to the complement of V_n, the products
/// M_j = prod_{i<=j} (tau_i - tau_{i-1} - 1) with tau_{-1} = -1, and the
/// weighted occupation of y per excursion,
/// sum_{k=tau_{j-1}}^{tau_j - 1} (k - tau_{j-1}) 1{S_k = y}.
struct ExcursionRecord {
  std::vector<std::int64_t> tau;
  std::vector<double> m_products;   // M_0..M_J
  std::vector<double> local_times;  // j = 0..J
};

ExcursionRecord mc_excursion_walk(const RegularTree& tree, std::int32_t x,
                                  std::int32_t y, int excursions,
                                  std::uint64_t seed,
                                  std::int64_t step_cap = 10'000'000);

struct McMoment {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of a_j = E_x[M_{j-1} * (occupation of excursion j)],
/// together with the lower-order terms and the alternating partial sums
/// gbar - a_1 + a_2 - ... that diagnose the series for E_n(x,y).
struct AjEstimate {
  std::vector<McMoment> terms;  // a_1 .. a_j
  double gbar_xy = 0.0;
  std::vector<double> alternating_partial;  // length j
};

AjEstimate mc_estimate_aj(const RegularTree& tree, std::int32_t x, std::int32_t y,
                          int j, std::int64_t samples, std::uint64_t seed,
                          std::int64_t step_cap = 10'000'000, int threads = 1);

/// Deterministic a_1: summing the exit-time mass through each boundary vertex
/// against the first-excursion occupation gives
///   a_1 = (c/m^2) sum_{w: depth n} gbar(x,w) gbar(w,y),
/// where c = m-1 outside-children per depth-n vertex (c = m when n = 0).
double exact_a1(const RegularTree& tree, std::int32_t x, std::int32_t y);

}  // namespace membrane
