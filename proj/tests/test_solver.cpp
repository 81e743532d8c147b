#include <doctest.h>

#include <cmath>

#include "bicatch/al_solver.hpp"
#include "bicatch/errors.hpp"

using namespace bicatch;
using namespace bicatch::mmto;

namespace {

TranscribedNLP quadratic_nlp(int n) {
  TranscribedNLP nlp;
  nlp.num_vars = n;
  nlp.lower = VecX::Constant(n, -1e19);
  nlp.upper = VecX::Constant(n, 1e19);
  nlp.objective = [](const VecX& x) { return 0.5 * x.squaredNorm(); };
  nlp.objective_grad = [](const VecX& x) { return VecX(x); };
  return nlp;
}

}  // namespace

TEST_CASE("unconstrained quadratic minimizes to zero") {
  auto nlp = quadratic_nlp(5);
  const auto res = solve_augmented_lagrangian(nlp, VecX::Constant(5, 3.0));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.x.cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("equality-constrained quadratic hits the analytic optimum") {
  // min 1/2 ||x||^2  s.t. x0 + x1 = 1  ->  x = (1/2, 1/2).
  auto nlp = quadratic_nlp(2);
  ConstraintBlock eq;
  eq.name = "sum";
  eq.kind = ConstraintKind::Equality;
  eq.rows = 1;
  eq.vars = {0, 1};
  eq.eval = [](const VecX& v) {
    VecX r(1);
    r(0) = v(0) + v(1) - 1.0;
    return r;
  };
  nlp.blocks.push_back(eq);
  const auto res = solve_augmented_lagrangian(nlp, VecX::Zero(2));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.x(0) == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(res.x(1) == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(res.max_violation <= 1e-4);
}

TEST_CASE("active inequality binds at the boundary") {
  // min (x - 2)^2  s.t. x <= 1.
  TranscribedNLP nlp;
  nlp.num_vars = 1;
  nlp.lower = VecX::Constant(1, -1e19);
  nlp.upper = VecX::Constant(1, 1e19);
  nlp.objective = [](const VecX& x) { return (x(0) - 2.0) * (x(0) - 2.0); };
  nlp.objective_grad = [](const VecX& x) {
    VecX g(1);
    g(0) = 2.0 * (x(0) - 2.0);
    return g;
  };
  ConstraintBlock ineq;
  ineq.name = "cap";
  ineq.kind = ConstraintKind::Inequality;
  ineq.rows = 1;
  ineq.vars = {0};
  ineq.eval = [](const VecX& v) {
    VecX r(1);
    r(0) = v(0) - 1.0;
    return r;
  };
  nlp.blocks.push_back(ineq);
  const auto res = solve_augmented_lagrangian(nlp, VecX::Zero(1));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("inactive inequality is ignored") {
  TranscribedNLP nlp = quadratic_nlp(2);
  ConstraintBlock ineq;
  ineq.name = "loose";
  ineq.kind = ConstraintKind::Inequality;
  ineq.rows = 1;
  ineq.vars = {0, 1};
  ineq.eval = [](const VecX& v) {
    VecX r(1);
    r(0) = v(0) + v(1) - 10.0;
    return r;
  };
  nlp.blocks.push_back(ineq);
  const auto res = solve_augmented_lagrangian(nlp, VecX::Constant(2, 2.0));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.x.cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("box bounds are honored exactly") {
  TranscribedNLP nlp;
  nlp.num_vars = 1;
  nlp.lower = VecX::Constant(1, 0.0);
  nlp.upper = VecX::Constant(1, 1.0);
  nlp.objective = [](const VecX& x) { return (x(0) - 5.0) * (x(0) - 5.0); };
  nlp.objective_grad = [](const VecX& x) {
    VecX g(1);
    g(0) = 2.0 * (x(0) - 5.0);
    return g;
  };
  const auto res = solve_augmented_lagrangian(nlp, VecX::Constant(1, 0.2));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.x(0) == 1.0);
}

TEST_CASE("rosenbrock valley with an equality constraint") {
  // min 100 (y - x^2)^2 + (1 - x)^2  s.t.  x + y = 1.
  // Solutions of y = 1 - x on the constraint: stationary points from the
  // 1-D reduction; x = 1, y = 0 is a local optimum candidate along with a
  // second one near x = -1.6; starting near (1, 0) selects the former.
  TranscribedNLP nlp;
  nlp.num_vars = 2;
  nlp.lower = VecX::Constant(2, -1e19);
  nlp.upper = VecX::Constant(2, 1e19);
  nlp.objective = [](const VecX& v) {
    const Real x = v(0), y = v(1);
    return 100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x);
  };
  nlp.objective_grad = [](const VecX& v) {
    const Real x = v(0), y = v(1);
    VecX g(2);
    g(0) = -400.0 * x * (y - x * x) - 2.0 * (1.0 - x);
    g(1) = 200.0 * (y - x * x);
    return g;
  };
  ConstraintBlock eq;
  eq.name = "line";
  eq.kind = ConstraintKind::Equality;
  eq.rows = 1;
  eq.vars = {0, 1};
  eq.eval = [](const VecX& v) {
    VecX r(1);
    r(0) = v(0) + v(1) - 1.0;
    return r;
  };
  nlp.blocks.push_back(eq);
  const auto res = solve_augmented_lagrangian(nlp, VecX::Constant(2, 0.8));
  CHECK(res.status == SolveStatus::Solved);
  CHECK(res.max_violation <= 1e-4);
  CHECK(std::abs(res.x(0) + res.x(1) - 1.0) <= 1e-4);
}

TEST_CASE("dimension mismatch throws") {
  auto nlp = quadratic_nlp(3);
  CHECK_THROWS_AS(solve_augmented_lagrangian(nlp, VecX::Zero(2)), DimensionMismatch);
}

TEST_CASE("finite-difference block jacobian matches a hand jacobian") {
  TranscribedNLP nlp = quadratic_nlp(3);
  ConstraintBlock block;
  block.kind = ConstraintKind::Equality;
  block.rows = 2;
  block.vars = {0, 2};
  block.eval = [](const VecX& v) {
    VecX r(2);
    r(0) = v(0) * v(0) - v(1);
    r(1) = std::sin(v(0)) + 2.0 * v(1);
    return r;
  };
  VecX x(3);
  x << 0.7, -0.3, 0.4;  // block sees locals (0.7, 0.4)
  const MatX jac = nlp.jac_block(block, x);
  CHECK(jac(0, 0) == doctest::Approx(1.4).epsilon(1e-7));
  CHECK(jac(0, 1) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(jac(1, 0) == doctest::Approx(std::cos(0.7)).epsilon(1e-7));
  CHECK(jac(1, 1) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("audit reports per-block and bound violations") {
  TranscribedNLP nlp = quadratic_nlp(2);
  nlp.upper(1) = 0.5;
  ConstraintBlock eq;
  eq.name = "probe";
  eq.kind = ConstraintKind::Equality;
  eq.rows = 1;
  eq.vars = {0};
  eq.eval = [](const VecX& v) {
    VecX r(1);
    r(0) = v(0) - 1.0;
    return r;
  };
  nlp.blocks.push_back(eq);
  VecX x(2);
  x << 0.25, 0.9;
  const auto audit = audit_constraints(nlp, x);
  CHECK(audit.max_equality_violation == doctest::Approx(0.75));
  CHECK(audit.max_bound_violation == doctest::Approx(0.4));
  REQUIRE(audit.per_block.size() == 1);
  CHECK(audit.per_block[0].first == "probe");
}
