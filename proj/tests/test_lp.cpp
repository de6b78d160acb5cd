#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "support.hpp"
#include "tfqkd/lp.hpp"

using namespace tfqkd;

namespace {

lp::LinearProgram single_var() {
  lp::LinearProgram p;
  p.sense = lp::LinearProgram::Sense::maximize;
  p.num_vars = 1;
  p.objective = {1.0};
  p.var_lo = {0.0};
  p.var_hi = {1.0};
  return p;
}

}  // namespace

TEST_CASE("bound-only maximization saturates the upper bound") {
  const auto sol = lp::solve(single_var());
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-row polytope has the expected corner optimum") {
  lp::LinearProgram p;
  p.sense = lp::LinearProgram::Sense::maximize;
  p.num_vars = 2;
  p.objective = {1.0, 1.0};
  p.var_lo = {0.0, 0.0};
  p.var_hi = {10.0, 10.0};
  p.rows.push_back({{1.0, 2.0}, 0.0, 1.0});
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(0.0).epsilon(1e-9));

  p.sense = lp::LinearProgram::Sense::minimize;
  const auto min_sol = lp::solve(p);
  REQUIRE(min_sol.status == lp::Status::optimal);
  CHECK(min_sol.objective == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fixed variables and equality rows are honored") {
  lp::LinearProgram p;
  p.sense = lp::LinearProgram::Sense::maximize;
  p.num_vars = 2;
  p.objective = {2.0, 1.0};
  p.var_lo = {0.5, 0.0};
  p.var_hi = {0.5, 1.0};
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));

  lp::LinearProgram q;
  q.sense = lp::LinearProgram::Sense::maximize;
  q.num_vars = 2;
  q.objective = {1.0, 0.0};
  q.var_lo = {0.0, 0.0};
  q.var_hi = {1.0, 1.0};
  q.rows.push_back({{1.0, 1.0}, 0.3, 0.3});
  const auto eq = lp::solve(q);
  REQUIRE(eq.status == lp::Status::optimal);
  CHECK(eq.objective == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("empty feasible region is reported infeasible") {
  lp::LinearProgram p = single_var();
  p.rows.push_back({{1.0}, 2.0, 3.0});
  CHECK(lp::solve(p).status == lp::Status::infeasible);
}

TEST_CASE("solve is bit-for-bit deterministic") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 20; ++k) {
    const auto p = testsupport::random_lp(rng);
    const auto a = lp::solve(p);
    const auto b = lp::solve(p);
    CHECK(a.status == b.status);
    CHECK(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
    REQUIRE(a.x.size() == b.x.size());
    if (!a.x.empty())
      CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("simplex matches vertex enumeration on a thousand seeded instances") {
  int optimal_count = 0, infeasible_count = 0;
  for (int k = 0; k < 1000; ++k) {
    std::mt19937_64 rng(0xC0FFEE + k);
    const auto p = testsupport::random_lp(rng);
    const auto oracle = testsupport::brute_force_lp(p);
    const auto sol = lp::solve(p);
    CAPTURE(k);
    if (oracle.feasible) {
      ++optimal_count;
      REQUIRE(sol.status == lp::Status::optimal);
      const double tol = 1e-8 * std::max(1.0, std::fabs(oracle.objective));
      CHECK(std::fabs(sol.objective - oracle.objective) <= tol);
      CHECK(sol.max_violation <= 1e-6);
      for (int j = 0; j < p.num_vars; ++j) {
        CHECK(sol.x[j] >= p.var_lo[j] - 1e-7);
        CHECK(sol.x[j] <= p.var_hi[j] + 1e-7);
      }
    } else {
      ++infeasible_count;
      REQUIRE(sol.status == lp::Status::infeasible);
    }
  }
  // The generator must exercise both outcomes.
  CHECK(optimal_count > 500);
  CHECK(infeasible_count > 50);
}

TEST_CASE("sense flip negates the optimum of a symmetric program") {
  lp::LinearProgram p;
  p.sense = lp::LinearProgram::Sense::maximize;
  p.num_vars = 3;
  p.objective = {1.0, -2.0, 0.5};
  p.var_lo = {-1.0, -1.0, -1.0};
  p.var_hi = {1.0, 1.0, 1.0};
  p.rows.push_back({{1.0, 1.0, 1.0}, -2.0, 2.0});
  const auto max_sol = lp::solve(p);

  lp::LinearProgram neg = p;
  neg.sense = lp::LinearProgram::Sense::minimize;
  for (auto& c : neg.objective) c = -c;
  const auto min_sol = lp::solve(neg);

  REQUIRE(max_sol.status == lp::Status::optimal);
  REQUIRE(min_sol.status == lp::Status::optimal);
  CHECK(max_sol.objective == doctest::Approx(-min_sol.objective).epsilon(1e-10));
}
