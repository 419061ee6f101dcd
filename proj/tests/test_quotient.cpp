#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "membrane/greens.hpp"
#include "membrane/operators.hpp"
#include "membrane/quotient.hpp"

using namespace membrane;

TEST_CASE("single-vertex ball") {
  const auto col = quotient_covariance_column(3, 0, 0);
  REQUIRE(col.size() == 1);
  CHECK(col[0].g_n == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(col[0].gbar_n == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(quotient_diag(5, 0, 0) == doctest::Approx(5.0 / 6).epsilon(1e-14));
}

TEST_CASE("class sizes partition the ball") {
  for (const auto& [m, n] : std::vector<std::pair<int, int>>{{3, 4}, {4, 3}, {25, 4}}) {
    for (int q = 0; q <= n; ++q) {
      std::int64_t total = 0;
      for (const PairClass& c : quotient_covariance_column(m, n, q)) total += c.size;
      CHECK(total == RegularTree::closed_form_count(m, n));
    }
  }
}

TEST_CASE("class metadata is consistent") {
  const auto col = quotient_covariance_column(3, 5, 3);
  for (const PairClass& c : col) {
    CHECK(c.meet_depth <= 3);
    CHECK(c.x_depth >= c.meet_depth);
    CHECK(c.pair_distance == (c.x_depth - c.meet_depth) + (3 - c.meet_depth));
    CHECK(c.dx == 6 - c.x_depth);
    CHECK(c.dy == 3);
    CHECK(c.e_n == doctest::Approx(c.gbar_n - c.g_n).epsilon(1e-15));
  }
}

TEST_CASE("quotient values equal the dense inverses on every pair") {
  for (const auto& [m, n] : std::vector<std::pair<int, int>>{{3, 4}, {4, 3}, {5, 2}}) {
    const RegularTree tree = RegularTree::build({m, n});
    const Eigen::MatrixXd gn = finite_covariance(tree);
    const Eigen::MatrixXd gbar = gbar_matrix(tree);
    for (int q = 0; q <= n; ++q) {
      const auto col = quotient_covariance_column(m, n, q);
      // one representative y per depth; every x maps into some class
      const std::int32_t y = tree.generation_begin(q);
      std::int64_t matched = 0;
      for (std::int32_t x = 0; x < tree.vertex_count(); ++x) {
        const int a = tree.meet_depth(x, y);
        const int t = tree.depth(x);
        for (const PairClass& c : col)
          if (c.meet_depth == a && c.x_depth == t) {
            CHECK(std::abs(c.g_n - gn(x, y)) <= 1e-11);
            CHECK(std::abs(c.gbar_n - gbar(x, y)) <= 1e-11);
            ++matched;
            break;
          }
      }
      CHECK(matched == tree.vertex_count());
    }
  }
}

TEST_CASE("rejects bad arguments") {
  CHECK_THROWS_AS(quotient_covariance_column(2, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(quotient_covariance_column(3, 3, 4), std::invalid_argument);
  CHECK_THROWS_AS(quotient_covariance_column(3, -1, 0), std::invalid_argument);
}

TEST_CASE("large-m diagnostics come out of the quotient") {
  // values the dense route cannot reach: m = 25, n = 4 has 360626 vertices
  const double g00 = greens_infinite(25, 0);
  double max_diag = 0.0, min_diag = 1e300;
  for (int q = 0; q <= 4; ++q) {
    const double d = quotient_diag(25, 4, q);
    max_diag = std::max(max_diag, d);
    min_diag = std::min(min_diag, d);
  }
  CHECK(max_diag <= g00 + 1e-10);
  CHECK(min_diag >= variance_floor_explicit(25));
}
