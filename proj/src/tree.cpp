#include "membrane/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace membrane {

std::int64_t RegularTree::closed_form_count(int m, int n) {
  if (m < 3) throw std::invalid_argument("RegularTree: m must be >= 3");
  if (n < 0) throw std::invalid_argument("RegularTree: n must be >= 0");
  // N = 1 + sum_{g=1..n} m (m-1)^{g-1}
  std::int64_t total = 1;
  std::int64_t shell = m;
  constexpr std::int64_t kMaxVertices = std::numeric_limits<std::int32_t>::max();
  for (int g = 1; g <= n; ++g) {
    if (total > kMaxVertices - shell)
      throw std::overflow_error("RegularTree: vertex count exceeds addressable range");
    total += shell;
    if (g < n && shell > kMaxVertices / (m - 1))
      throw std::overflow_error("RegularTree: vertex count exceeds addressable range");
    shell *= (m - 1);
  }
  return total;
}

RegularTree RegularTree::build(const TreeParams& params) {
  const int m = params.m;
  const int n = params.n;
  const std::int64_t total = closed_form_count(m, n);
  if (n > 120) throw std::invalid_argument("RegularTree: n too large");

  RegularTree t;
  t.m_ = m;
  t.n_ = n;
  t.parent_.reserve(total);
  t.first_child_.assign(total, -1);
  t.depth_.reserve(total);
  t.gen_begin_.assign(n + 2, 0);

  t.parent_.push_back(-1);
  t.depth_.push_back(0);
  std::int32_t gen_start = 0, gen_end = 1;
  t.gen_begin_[0] = 0;
  for (int g = 1; g <= n; ++g) {
    t.gen_begin_[g] = gen_end;
    for (std::int32_t v = gen_start; v < gen_end; ++v) {
      const int nchildren = (v == 0) ? m : m - 1;
      t.first_child_[v] = static_cast<std::int32_t>(t.parent_.size());
      for (int c = 0; c < nchildren; ++c) {
        t.parent_.push_back(v);
        t.depth_.push_back(static_cast<std::int16_t>(g));
      }
    }
    gen_start = gen_end;
    gen_end = static_cast<std::int32_t>(t.parent_.size());
  }
  t.gen_begin_[n + 1] = gen_end;
  if (static_cast<std::int64_t>(t.parent_.size()) != total)
    throw std::logic_error("RegularTree: BFS count disagrees with closed form");
  return t;
}

int RegularTree::child_count(std::int32_t v) const {
  check(v);
  if (depth_[v] == n_) return 0;
  return v == 0 ? m_ : m_ - 1;
}

int RegularTree::meet_depth(std::int32_t x, std::int32_t y) const {
  check(x);
  check(y);
  while (depth_[x] > depth_[y]) x = parent_[x];
  while (depth_[y] > depth_[x]) y = parent_[y];
  while (x != y) {
    x = parent_[x];
    y = parent_[y];
  }
  return depth_[x];
}

int RegularTree::distance(std::int32_t x, std::int32_t y) const {
  check(x);
  check(y);
  if (!dist_table_.empty()) {
    const std::size_t n = depth_.size();
    return dist_table_[static_cast<std::size_t>(x) * n + y];
  }
  return depth_[x] + depth_[y] - 2 * meet_depth(x, y);
}

void RegularTree::materialize_distance_table(std::int64_t cap) {
  const std::int64_t n = vertex_count();
  if (n > cap || !dist_table_.empty()) return;
  dist_table_.assign(static_cast<std::size_t>(n) * n, 0);
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j) {
      const int d = depth_[i] + depth_[j] - 2 * meet_depth(i, j);
      dist_table_[static_cast<std::size_t>(i) * n + j] = static_cast<std::uint8_t>(d);
      dist_table_[static_cast<std::size_t>(j) * n + i] = static_cast<std::uint8_t>(d);
    }
}

namespace {

std::uint64_t upow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

std::uint64_t sphere_size_in_ball(int m, int n, int e, int k) {
  if (k == 0) return 1;
  const std::uint64_t b = static_cast<std::uint64_t>(m - 1);
  if (e == 0) return k <= n ? static_cast<std::uint64_t>(m) * upow(b, k - 1) : 0;
  // A vertex at distance k corresponds to one non-backtracking path: j steps
  // toward the root, then k-j away; the endpoint stays in the ball iff
  // e - j + (k - j) <= n.
  std::uint64_t total = 0;
  for (int j = 0; j <= std::min(e, k); ++j) {
    const int down = k - j;
    if (e - j + down > n) continue;
    if (j == 0)
      total += upow(b, down);
    else if (j == k)
      total += 1;
    else if (j < e)
      total += static_cast<std::uint64_t>(m - 2) * upow(b, down - 1);
    else  // turning at the root: m-1 departures remain
      total += upow(b, down);
  }
  return total;
}

DistanceClassTable distance_class_counts(const RegularTree& tree) {
  const int m = tree.m();
  const int n = tree.n();
  DistanceClassTable table;
  table.counts.assign(2 * n + 1, 0);
  const std::uint64_t b = static_cast<std::uint64_t>(m - 1);
  for (int e = 0; e <= n; ++e) {
    const std::uint64_t shell = e == 0 ? 1 : static_cast<std::uint64_t>(m) * upow(b, e - 1);
    for (int k = 0; k <= 2 * n; ++k)
      table.counts[k] += shell * sphere_size_in_ball(m, n, e, k);
  }

  // Independent summation over leaf shells, valid for 1 <= k <= n.
  table.proof_counts.assign(2 * n + 1, 0);
  for (int k = 1; k <= n; ++k) {
    std::uint64_t s = 0;
    for (int l = 0; l < k; ++l)
      s += static_cast<std::uint64_t>(m) * upow(b, n - l - 1) * upow(b, (k - l) / 2 + l);
    for (int l = k; l < n; ++l)
      s += static_cast<std::uint64_t>(m) * upow(b, n - l - 1) * static_cast<std::uint64_t>(m) * upow(b, k - 1);
    s += static_cast<std::uint64_t>(m) * upow(b, k - 1);
    table.proof_counts[k] = s;
  }

  double ratio = 0.0;
  for (int k = 1; k <= 2 * n; ++k)
    ratio = std::max(ratio, static_cast<double>(table.counts[k]) /
                                std::pow(static_cast<double>(m - 1), n + k / 2));
  table.shape_ratio = ratio;
  return table;
}

double ck_shape_constant(int m) {
  return 2.0 * m / (m - 2) + static_cast<double>(m) * m / ((m - 1.0) * (m - 2)) + m;
}

std::vector<std::int32_t> separated_leaf_set(const RegularTree& tree) {
  const int n = tree.n();
  if (n < 1) throw std::invalid_argument("separated_leaf_set: n too small");
  const int logn = static_cast<int>(std::floor(std::log(static_cast<double>(n))));
  if (logn < 1 || n - 2 * logn < 1)
    throw std::invalid_argument("separated_leaf_set: n too small for a separated family");
  std::vector<std::int32_t> out;
  const std::int32_t begin = tree.generation_begin(n - 2 * logn);
  const std::int32_t end = tree.generation_end(n - 2 * logn);
  out.reserve(end - begin);
  for (std::int32_t z = begin; z < end; ++z) {
    std::int32_t v = z;
    for (int step = 0; step < logn; ++step) v = tree.first_child(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace membrane
