#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace membrane {

struct TreeParams {
  int m = 3;  // branching degree: every vertex of the infinite tree has m neighbors
  int n = 0;  // number of generations kept around the root
};

/// Finite ball V_n of the m-regular tree, indexed in BFS (generation) order.
///
/// Vertex 0 is the root; generation g occupies a contiguous index range and
/// children of consecutive vertices are themselves consecutive, so the layout
/// is a pure function of (m, n) and results built on top of it are
/// reproducible byte for byte.
class RegularTree {
 public:
  static RegularTree build(const TreeParams& params);

  int m() const { return m_; }
  int n() const { return n_; }
  std::int64_t vertex_count() const { return static_cast<std::int64_t>(depth_.size()); }

  int depth(std::int32_t v) const { return depth_[check(v)]; }
  std::int32_t parent(std::int32_t v) const { return parent_[check(v)]; }
  std::int32_t first_child(std::int32_t v) const { return first_child_[check(v)]; }
  int child_count(std::int32_t v) const;

  /// First vertex index of generation g (g <= n).
  std::int32_t generation_begin(int g) const { return gen_begin_.at(g); }
  std::int32_t generation_end(int g) const { return gen_begin_.at(g + 1); }

  /// Graph distance d(x, y), computed by climbing parent pointers to the
  /// lowest common ancestor (O(n) per query), or read from the cached table
  /// when one has been materialized.
  int distance(std::int32_t x, std::int32_t y) const;

  /// Depth of the lowest common ancestor of x and y.
  int meet_depth(std::int32_t x, std::int32_t y) const;

  /// d(x, boundary layer outside V_n) = n + 1 - depth(x).
  int boundary_distance(std::int32_t x) const { return n_ + 1 - depth(x); }

  /// Cache all pairwise distances. No-op if vertex_count() exceeds cap.
  void materialize_distance_table(std::int64_t cap = 5000);
  bool has_distance_table() const { return !dist_table_.empty(); }

  /// Exact vertex count from the closed form (m(m-1)^n - 2)/(m-2); throws on
  /// overflow of the addressable range.
  static std::int64_t closed_form_count(int m, int n);

 private:
  std::int32_t check(std::int32_t v) const {
    if (v < 0 || v >= static_cast<std::int32_t>(depth_.size()))
      throw std::out_of_range("RegularTree: vertex index out of range");
    return v;
  }

  int m_ = 0;
  int n_ = 0;
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> first_child_;
  std::vector<std::int16_t> depth_;
  std::vector<std::int32_t> gen_begin_;
  std::vector<std::uint8_t> dist_table_;  // row-major, only when materialized
};

/// Ordered-pair counts C_k = |{(x,y) in V_n x V_n : d(x,y) = k}|.
struct DistanceClassTable {
  /// counts[k] for k = 0..2n.
  std::vector<std::uint64_t> counts;
  /// Boundary-layer summation for k = 1..n (index k; entries 0 elsewhere):
  /// sum over leaf shells of shell size times per-vertex sphere size, plus the
  /// root sphere. Agrees with counts[k] on that range and is kept as an
  /// independent cross-check.
  std::vector<std::uint64_t> proof_counts;
  /// max over k >= 1 of counts[k] / (m-1)^(n + floor(k/2)).
  double shape_ratio = 0.0;
};

DistanceClassTable distance_class_counts(const RegularTree& tree);

/// Number of vertices of V_n at distance exactly k from a vertex at depth e
/// (exact count of non-backtracking paths that stay inside the ball).
std::uint64_t sphere_size_in_ball(int m, int n, int e, int k);

/// Explicit constant c with C_k <= c * (m-1)^(n + floor(k/2)), assembled from
/// the geometric sums bounding the three summation blocks.
double ck_shape_constant(int m);

/// The separated leaf family U_n: one descendant of depth n - floor(log n)
/// per vertex of depth n - 2*floor(log n), reached by repeatedly taking the
/// first child. Natural logarithm; requires floor(log n) >= 1 and
/// n - 2*floor(log n) >= 1.
std::vector<std::int32_t> separated_leaf_set(const RegularTree& tree);

}  // namespace membrane
