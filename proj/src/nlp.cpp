#include "bicatch/nlp.hpp"

#include <cmath>

namespace bicatch::mmto {

int TranscribedNLP::total_constraint_rows() const {
  int rows = 0;
  for (const auto& b : blocks) rows += b.rows;
  return rows;
}

int TranscribedNLP::total_equality_rows() const {
  int rows = 0;
  for (const auto& b : blocks) {
    if (b.kind == ConstraintKind::Equality) rows += b.rows;
  }
  return rows;
}

VecX TranscribedNLP::gather(const ConstraintBlock& block, const VecX& x) const {
  VecX local(block.vars.size());
  for (size_t i = 0; i < block.vars.size(); ++i) local(i) = x(block.vars[i]);
  return local;
}

VecX TranscribedNLP::eval_block(const ConstraintBlock& block, const VecX& x) const {
  return block.eval(gather(block, x));
}

MatX TranscribedNLP::jac_block(const ConstraintBlock& block, const VecX& x) const {
  const VecX local = gather(block, x);
  if (block.has_analytic_jac()) return block.jac_analytic(local);
  MatX jac(block.rows, local.size());
  VecX probe = local;
  for (int j = 0; j < local.size(); ++j) {
    const Real h = 1e-6 * std::max(1.0, std::abs(local(j)));
    probe(j) = local(j) + h;
    const VecX plus = block.eval(probe);
    probe(j) = local(j) - h;
    const VecX minus = block.eval(probe);
    probe(j) = local(j);
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

MatX TranscribedNLP::jac_block_fd(const ConstraintBlock& block, const VecX& x) const {
  ConstraintBlock fd = block;
  fd.jac_analytic = nullptr;
  return jac_block(fd, x);
}

ConstraintAudit audit_constraints(const TranscribedNLP& nlp, const VecX& x) {
  ConstraintAudit audit;
  for (const auto& block : nlp.blocks) {
    const VecX c = nlp.eval_block(block, x);
    Real violation = 0.0;
    if (block.kind == ConstraintKind::Equality) {
      violation = c.cwiseAbs().maxCoeff();
      audit.max_equality_violation = std::max(audit.max_equality_violation, violation);
    } else {
      violation = std::max(0.0, c.maxCoeff());
      audit.max_inequality_violation =
          std::max(audit.max_inequality_violation, violation);
    }
    audit.per_block.emplace_back(block.name, violation);
  }
  for (int i = 0; i < nlp.num_vars; ++i) {
    const Real below = nlp.lower(i) - x(i);
    const Real above = x(i) - nlp.upper(i);
    audit.max_bound_violation =
        std::max({audit.max_bound_violation, below, above});
  }
  return audit;
}

}  // namespace bicatch::mmto
