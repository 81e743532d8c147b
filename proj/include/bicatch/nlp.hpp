#pragma once

// Block-structured NLP container: the objective plus a list of constraint
// blocks, each touching a small set of variables. Blocks carry an optional
// analytic Jacobian; the default is central finite differences on the local
// variables. Variable bounds are handled by projection in the solver.

#include <functional>
#include <string>
#include <vector>

#include "bicatch/types.hpp"

namespace bicatch::mmto {

enum class ConstraintKind { Equality, Inequality };  // inequality: c(x) <= 0

struct ConstraintBlock {
  std::string name;
  ConstraintKind kind = ConstraintKind::Equality;
  int rows = 0;
  std::vector<int> vars;  // global variable indices (unique)
  std::function<VecX(const VecX&)> eval;          // local vars -> residuals
  std::function<MatX(const VecX&)> jac_analytic;  // optional
  bool has_analytic_jac() const { return static_cast<bool>(jac_analytic); }
};

struct TranscribedNLP {
  int num_vars = 0;
  VecX lower;  // variable lower bounds (-inf allowed)
  VecX upper;
  std::function<Real(const VecX&)> objective;
  std::function<VecX(const VecX&)> objective_grad;
  // Diagonal of the objective Hessian (exact for the quadratic costs used
  // here); optional, improves the inner Newton model.
  std::function<VecX(const VecX&)> objective_hess_diag;
  std::vector<ConstraintBlock> blocks;

  int total_constraint_rows() const;
  int total_equality_rows() const;

  VecX gather(const ConstraintBlock& block, const VecX& x) const;
  VecX eval_block(const ConstraintBlock& block, const VecX& x) const;
  // Analytic when provided, otherwise central finite differences.
  MatX jac_block(const ConstraintBlock& block, const VecX& x) const;
  MatX jac_block_fd(const ConstraintBlock& block, const VecX& x) const;
};

struct ConstraintAudit {
  Real max_equality_violation = 0.0;
  Real max_inequality_violation = 0.0;
  Real max_bound_violation = 0.0;
  std::vector<std::pair<std::string, Real>> per_block;  // name, violation

  Real max_violation() const {
    return std::max({max_equality_violation, max_inequality_violation,
                     max_bound_violation});
  }
};

// Re-evaluates every block and every bound at x; independent of any solver
// state.
ConstraintAudit audit_constraints(const TranscribedNLP& nlp, const VecX& x);

}  // namespace bicatch::mmto
