#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evcoord/conic/solve.hpp"

using namespace evcoord::conic;

TEST_SUITE("conic") {

TEST_CASE("active bound: min x^2 s.t. x >= 3") {
  ConicProgram p;
  auto x = p.add_variable("x", 3.0, kInf);
  p.add_quadratic_cost(1.0, LinExpr(x));
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-7));
}

TEST_CASE("empty feasible set: x <= 1 and x >= 2") {
  ConicProgram p;
  auto x = p.add_variable("x");
  p.add_inequality(LinExpr(x), LinExpr(1.0));
  p.add_inequality(-LinExpr(x), LinExpr(-2.0));
  const Solution sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("cone boundary: min t s.t. t*1 >= ||(0.3,0.4)||^2") {
  ConicProgram p;
  auto t = p.add_variable("t");
  p.add_linear_cost(LinExpr(t));
  p.add_rotated_cone(LinExpr(t), LinExpr(1.0), {LinExpr(0.3), LinExpr(0.4)});
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(t) == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(sol.max_violation <= 1e-8);
}

TEST_CASE("extract") {
  ConicProgram p;
  auto x = p.add_variable("x", 1.0, 1.0);
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  const VariableRef refs[] = {x};
  CHECK(extract(sol, refs) == std::vector<double>{1.0});
  CHECK(extract(sol, {}).empty());
  const VariableRef bogus[] = {VariableRef{42}};
  CHECK_THROWS_AS(extract(sol, bogus), std::out_of_range);
}

TEST_CASE("LP with analytic optimum and shadow price") {
  // min 2x + 3y  s.t.  x + y = 10, 0 <= x <= 6, y >= 0  ->  x=6, y=4, obj 24.
  // Raising the rhs by one adds a unit of y: shadow price 3.
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, 6.0);
  auto y = p.add_variable("y", 0.0, kInf);
  p.add_linear_cost(2.0 * LinExpr(x) + 3.0 * LinExpr(y));
  EqRef balance = p.add_equality(LinExpr(x) + LinExpr(y), LinExpr(10.0));
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(sol.value(y) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(24.0).epsilon(1e-8));
  CHECK(sol.eq_dual(balance) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("negative quadratic weight rejected at build time") {
  ConicProgram p;
  auto x = p.add_variable("x");
  CHECK_THROWS_AS(p.add_quadratic_cost(-1.0, LinExpr(x)), std::invalid_argument);
}

TEST_CASE("repeat solve is deterministic") {
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, kInf);
  auto y = p.add_variable("y", 0.0, kInf);
  p.add_linear_cost(LinExpr(x) - 2.0 * LinExpr(y));
  p.add_inequality(LinExpr(x) + 2.0 * LinExpr(y), LinExpr(7.0));
  p.add_quadratic_cost(0.3, LinExpr(x) - LinExpr(y));
  const Solution a = solve(p);
  const Solution b = solve(p);
  REQUIRE(a.status == SolveStatus::optimal);
  CHECK(a.status == b.status);
  CHECK(a.objective == b.objective);  // bit-identical path
  CHECK(std::abs(a.objective - b.objective) <= 1e-9);
}

TEST_CASE("unbounded direction detected") {
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, kInf);
  p.add_linear_cost(-LinExpr(x));
  const Solution sol = solve(p);
  CHECK(sol.status == SolveStatus::unbounded);
}

TEST_CASE("infeasibility certified beyond presolve") {
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, kInf);
  auto y = p.add_variable("y", 0.0, kInf);
  p.add_inequality(LinExpr(x) + LinExpr(y), LinExpr(-1.0));
  const Solution sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("quadratic projection onto a halfspace") {
  // min (x-1)^2 + (y-2)^2 s.t. x + y <= 1  ->  (0, 1), objective 2.
  ConicProgram p;
  auto x = p.add_variable("x");
  auto y = p.add_variable("y");
  p.add_quadratic_cost(1.0, LinExpr(x) - LinExpr(1.0));
  p.add_quadratic_cost(1.0, LinExpr(y) - LinExpr(2.0));
  p.add_inequality(LinExpr(x) + LinExpr(y), LinExpr(1.0));
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.value(y) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("rotated cone with two affine sides") {
  // min t + u s.t. t*u >= 1  ->  t = u = 1 by AM-GM.
  ConicProgram p;
  auto t = p.add_variable("t");
  auto u = p.add_variable("u");
  p.add_linear_cost(LinExpr(t) + LinExpr(u));
  p.add_rotated_cone(LinExpr(t), LinExpr(u), {LinExpr(1.0)});
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(t) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.value(u) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("fully presolved programs") {
  SUBCASE("empty program") {
    ConicProgram p;
    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == 0.0);
  }
  SUBCASE("equality pins the only variable") {
    ConicProgram p;
    auto x = p.add_variable("x");
    p.add_quadratic_cost(1.0, LinExpr(x));
    p.add_equality(LinExpr(x), LinExpr(3.0));
    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.value(x) == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(9.0));
  }
  SUBCASE("pinned variable conflicts with a constant row") {
    ConicProgram p;
    auto x = p.add_variable("x", 5.0, 5.0);
    p.add_inequality(LinExpr(x), LinExpr(4.0));
    CHECK(solve(p).status == SolveStatus::infeasible);
  }
}

TEST_CASE("program dump is printable") {
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, 2.0);
  p.add_linear_cost(LinExpr(x));
  p.add_quadratic_cost(0.5, LinExpr(x) - LinExpr(1.0));
  p.add_equality(LinExpr(x), LinExpr(1.0));
  p.add_rotated_cone(LinExpr(x), LinExpr(1.0), {LinExpr(x)});
  std::ostringstream os;
  p.dump(os);
  CHECK(os.str().find("minimize") != std::string::npos);
  CHECK(os.str().find("==") != std::string::npos);
}

TEST_CASE("mixed scales still resolve tightly") {
  // Badly scaled LP: costs and rows spanning six orders of magnitude.
  ConicProgram p;
  auto x = p.add_variable("x", 0.0, kInf);
  auto y = p.add_variable("y", 0.0, kInf);
  p.add_linear_cost(1e-3 * LinExpr(x) + 1e3 * LinExpr(y));
  p.add_equality(1e3 * LinExpr(x) + 1e-2 * LinExpr(y), LinExpr(2e3));
  const Solution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.value(y) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.max_violation <= 1e-8);
}

}  // TEST_SUITE
