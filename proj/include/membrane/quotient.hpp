#pragma once

#include <cstdint>
#include <vector>

namespace membrane {

/// One orbit of vertex pairs (x, y) under the automorphisms fixing the root
/// and a target vertex y of depth y_depth: the orbit is determined by the
/// depth a of the meet of x and y and the depth t of x. All covariance
/// quantities are constant on the orbit.
struct PairClass {
  int meet_depth = 0;       // a; a == x_depth means x lies on the root-y path
  int x_depth = 0;          // t
  std::int64_t size = 0;    // number of x in the class
  int pair_distance = 0;    // d(x, y) = (t - a) + (y_depth - a)
  int dx = 0;               // d(x, boundary)
  int dy = 0;               // d(y, boundary)
  double g_n = 0.0;
  double gbar_n = 0.0;
  double e_n = 0.0;         // gbar_n - g_n
};

/// Exact G_n(. , y) and Gbar_n(. , y) for a target at depth y_depth, computed
/// on the orbit quotient instead of over vertices. The killed walk lumps over
/// the classes (each vertex of a class sees the same distribution of target
/// classes), so the column solves an O(n^2)-dimensional system; results are
/// independent of the tree size and match the dense inverses entry for entry.
std::vector<PairClass> quotient_covariance_column(int m, int n, int y_depth);

/// G_n(x, x) for a vertex at the given depth, via the quotient column.
double quotient_diag(int m, int n, int depth);

}  // namespace membrane
