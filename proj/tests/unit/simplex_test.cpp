#include "doctest.h"
#include "pkrect/simplex.hpp"

using namespace pkrect::lp;
using doctest::Approx;

TEST_CASE("textbook maximization") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
  LinearProgram lp(2);
  lp.set_objective({3, 5});
  lp.add_le({1, 0}, 4);
  lp.add_le({0, 2}, 12);
  lp.add_le({3, 2}, 18);
  const auto r = lp.maximize();
  REQUIRE(r.status == Status::optimal);
  CHECK(r.value == Approx(36.0));
  CHECK(r.x[0] == Approx(2.0));
  CHECK(r.x[1] == Approx(6.0));
}

TEST_CASE("equality and lower-bound rows need phase one") {
  // max -x - y, x + y = 3, x >= 1 -> value -3
  LinearProgram lp(2);
  lp.set_objective({-1, -1});
  lp.add_eq({1, 1}, 3);
  lp.add_ge({1, 0}, 1);
  const auto r = lp.maximize();
  REQUIRE(r.status == Status::optimal);
  CHECK(r.value == Approx(-3.0));
  CHECK(r.x[0] >= 1.0 - 1e-9);
}

TEST_CASE("negative right-hand sides") {
  // max x, -x >= -5 (x <= 5)
  LinearProgram lp(1);
  lp.set_objective({1});
  lp.add_ge({-1}, -5);
  const auto r = lp.maximize();
  REQUIRE(r.status == Status::optimal);
  CHECK(r.value == Approx(5.0));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram bad(1);
  bad.set_objective({1});
  bad.add_le({1}, 1);
  bad.add_ge({1}, 2);
  CHECK(bad.maximize().status == Status::infeasible);

  LinearProgram open(2);
  open.set_objective({1, 1});
  open.add_le({1, -1}, 1);
  CHECK(open.maximize().status == Status::unbounded);
}

TEST_CASE("degenerate program terminates") {
  // Several redundant constraints through the optimum vertex.
  LinearProgram lp(3);
  lp.set_objective({1, 1, 1});
  lp.add_le({1, 0, 0}, 1);
  lp.add_le({0, 1, 0}, 1);
  lp.add_le({0, 0, 1}, 1);
  lp.add_le({1, 1, 0}, 2);
  lp.add_le({0, 1, 1}, 2);
  lp.add_le({1, 0, 1}, 2);
  lp.add_le({1, 1, 1}, 3);
  const auto r = lp.maximize();
  REQUIRE(r.status == Status::optimal);
  CHECK(r.value == Approx(3.0));
}
