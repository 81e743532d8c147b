#include "bicatch/al_solver.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Cholesky>

#include "bicatch/errors.hpp"

namespace bicatch::mmto {

namespace {

struct Multipliers {
  std::vector<VecX> lambda;  // per equality block
  std::vector<VecX> mu;      // per inequality block, kept >= 0
};

VecX project_box(const TranscribedNLP& nlp, const VecX& x) {
  return x.cwiseMax(nlp.lower).cwiseMin(nlp.upper);
}

Real al_value(const TranscribedNLP& nlp, const VecX& x, const Multipliers& m,
              Real rho) {
  Real val = nlp.objective(x);
  for (size_t i = 0; i < nlp.blocks.size(); ++i) {
    const auto& block = nlp.blocks[i];
    const VecX c = nlp.eval_block(block, x);
    if (block.kind == ConstraintKind::Equality) {
      val += m.lambda[i].dot(c) + 0.5 * rho * c.squaredNorm();
    } else {
      for (int r = 0; r < c.size(); ++r) {
        const Real shifted = m.mu[i](r) + rho * c(r);
        if (shifted > 0.0) {
          val += (shifted * shifted - m.mu[i](r) * m.mu[i](r)) / (2.0 * rho);
        } else {
          val -= m.mu[i](r) * m.mu[i](r) / (2.0 * rho);
        }
      }
    }
  }
  return val;
}

// Gradient of the augmented Lagrangian and its Gauss-Newton Hessian model
// (objective diagonal plus rho J^T J over the active rows).
void al_gradient_and_model(const TranscribedNLP& nlp, const VecX& x,
                           const Multipliers& m, Real rho, VecX& grad,
                           MatX* hess) {
  grad = nlp.objective_grad(x);
  if (hess) {
    hess->setZero(nlp.num_vars, nlp.num_vars);
    if (nlp.objective_hess_diag) {
      hess->diagonal() = nlp.objective_hess_diag(x);
    }
  }
  for (size_t i = 0; i < nlp.blocks.size(); ++i) {
    const auto& block = nlp.blocks[i];
    const VecX c = nlp.eval_block(block, x);
    VecX w(c.size());
    std::vector<bool> active(c.size(), true);
    if (block.kind == ConstraintKind::Equality) {
      w = m.lambda[i] + rho * c;
    } else {
      for (int r = 0; r < c.size(); ++r) {
        const Real shifted = m.mu[i](r) + rho * c(r);
        w(r) = std::max(0.0, shifted);
        active[r] = shifted > 0.0;
      }
    }
    const MatX jac = nlp.jac_block(block, x);
    const VecX contribution = jac.transpose() * w;
    for (size_t j = 0; j < block.vars.size(); ++j) {
      grad(block.vars[j]) += contribution(j);
    }
    if (hess) {
      MatX jtj = MatX::Zero(block.vars.size(), block.vars.size());
      for (int r = 0; r < block.rows; ++r) {
        if (!active[r]) continue;
        jtj.noalias() += rho * jac.row(r).transpose() * jac.row(r);
      }
      for (size_t a = 0; a < block.vars.size(); ++a) {
        for (size_t b = 0; b < block.vars.size(); ++b) {
          (*hess)(block.vars[a], block.vars[b]) += jtj(a, b);
        }
      }
    }
  }
}

Real projected_gradient_norm(const TranscribedNLP& nlp, const VecX& x,
                             const VecX& g) {
  return (project_box(nlp, x - g) - x).cwiseAbs().maxCoeff();
}

// Projected Levenberg-Marquardt descent on the augmented Lagrangian.
// Variables pinned by equal bounds or pressed against an active bound are
// frozen out of each Newton solve; trial points are projected back onto the
// box during the line search.
int minimize_inner(const TranscribedNLP& nlp, VecX& x, const Multipliers& m,
                   Real rho, Real grad_tol, const SolveOptions& opts) {
  x = project_box(nlp, x);
  Real val = al_value(nlp, x, m, rho);
  Real nu = 1e-4;
  int iters = 0;

  VecX grad;
  MatX hess;
  for (; iters < opts.max_inner; ++iters) {
    al_gradient_and_model(nlp, x, m, rho, grad, &hess);
    if (projected_gradient_norm(nlp, x, grad) <= grad_tol) break;

    // Free set: variables that can move in the descent direction.
    std::vector<int> free_idx;
    free_idx.reserve(nlp.num_vars);
    for (int i = 0; i < nlp.num_vars; ++i) {
      if (nlp.lower(i) >= nlp.upper(i)) continue;  // pinned
      const bool at_lower = x(i) <= nlp.lower(i) + 1e-14 && grad(i) > 0.0;
      const bool at_upper = x(i) >= nlp.upper(i) - 1e-14 && grad(i) < 0.0;
      if (!at_lower && !at_upper) free_idx.push_back(i);
    }
    if (free_idx.empty()) break;

    const int nf = static_cast<int>(free_idx.size());
    MatX h_free(nf, nf);
    VecX g_free(nf);
    for (int a = 0; a < nf; ++a) {
      g_free(a) = grad(free_idx[a]);
      for (int b = 0; b < nf; ++b) h_free(a, b) = hess(free_idx[a], free_idx[b]);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
      MatX h_damped = h_free;
      const Real damping = nu * (1.0 + h_free.diagonal().cwiseAbs().maxCoeff());
      h_damped.diagonal().array() += damping;
      Eigen::LDLT<MatX> ldlt(h_damped);
      if (ldlt.info() != Eigen::Success) {
        nu *= 10.0;
        continue;
      }
      const VecX d_free = ldlt.solve(-g_free);
      VecX d = VecX::Zero(nlp.num_vars);
      for (int a = 0; a < nf; ++a) d(free_idx[a]) = d_free(a);

      Real step = 1.0;
      for (int ls = 0; ls < 30; ++ls) {
        const VecX x_new = project_box(nlp, x + step * d);
        const VecX dx = x_new - x;
        if (dx.cwiseAbs().maxCoeff() < 1e-16) break;
        const Real val_new = al_value(nlp, x_new, m, rho);
        if (val_new <= val + 1e-4 * grad.dot(dx)) {
          x = x_new;
          val = val_new;
          accepted = true;
          nu = std::max(nu * 0.35, 1e-10);
          break;
        }
        step *= 0.5;
      }
      if (!accepted) nu *= 10.0;
    }
    if (!accepted) break;
  }
  return iters;
}

Real max_violation_of(const TranscribedNLP& nlp, const VecX& x) {
  Real viol = 0.0;
  for (const auto& block : nlp.blocks) {
    const VecX c = nlp.eval_block(block, x);
    if (block.kind == ConstraintKind::Equality) {
      viol = std::max(viol, c.cwiseAbs().maxCoeff());
    } else {
      viol = std::max(viol, std::max(0.0, c.maxCoeff()));
    }
  }
  return viol;
}

}  // namespace

SolveResult solve_augmented_lagrangian(const TranscribedNLP& nlp, const VecX& x0,
                                       const SolveOptions& opts) {
  if (x0.size() != nlp.num_vars) {
    throw DimensionMismatch("initial guess has " + std::to_string(x0.size()) +
                            " entries, problem has " +
                            std::to_string(nlp.num_vars));
  }

  Multipliers m;
  m.lambda.resize(nlp.blocks.size());
  m.mu.resize(nlp.blocks.size());
  for (size_t i = 0; i < nlp.blocks.size(); ++i) {
    m.lambda[i] = VecX::Zero(nlp.blocks[i].rows);
    m.mu[i] = VecX::Zero(nlp.blocks[i].rows);
  }

  SolveResult result;
  result.x = project_box(nlp, x0);
  Real rho = opts.rho_init;
  Real best_viol = std::numeric_limits<Real>::infinity();
  int stalled_outers = 0;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    result.outer_iterations = outer + 1;
    const Real scale = 1.0 + std::abs(nlp.objective(result.x));
    const Real inner_tol =
        std::max(0.25 * opts.opt_tol, 1e-1 * std::pow(0.2, outer)) * scale;
    result.inner_iterations +=
        minimize_inner(nlp, result.x, m, rho, inner_tol, opts);

    const Real viol = max_violation_of(nlp, result.x);
    if (opts.verbose) {
      std::printf("  [al] outer %2d rho %.1e viol %.3e obj %.6f\n", outer + 1,
                  rho, viol, nlp.objective(result.x));
    }

    const bool progressed = viol <= 0.25 * best_viol || viol <= opts.feas_tol;
    if (progressed) {
      for (size_t i = 0; i < nlp.blocks.size(); ++i) {
        const VecX c = nlp.eval_block(nlp.blocks[i], result.x);
        if (nlp.blocks[i].kind == ConstraintKind::Equality) {
          m.lambda[i] = (m.lambda[i] + rho * c).cwiseMax(-1e8).cwiseMin(1e8);
        } else {
          m.mu[i] = (m.mu[i] + rho * c).cwiseMax(0.0).cwiseMin(1e8);
        }
      }
    } else {
      rho = std::min(rho * opts.rho_growth, opts.rho_max);
    }

    if (viol < best_viol - 1e-12) {
      best_viol = viol;
      stalled_outers = 0;
    } else {
      ++stalled_outers;
    }

    if (viol <= opts.feas_tol) {
      // Stationarity of the Lagrangian (multipliers just updated).
      VecX g;
      al_gradient_and_model(nlp, result.x, m, rho, g, nullptr);
      const Real stat = projected_gradient_norm(nlp, result.x, g) / scale;
      result.stationarity = stat;
      if (stat <= opts.opt_tol) {
        result.status = SolveStatus::Solved;
        break;
      }
    }
    if (rho >= opts.rho_max && stalled_outers >= 4) {
      result.status = SolveStatus::Stalled;
      break;
    }
  }

  result.objective = nlp.objective(result.x);
  result.max_violation = max_violation_of(nlp, result.x);
  if (result.status != SolveStatus::Solved && result.max_violation <= opts.feas_tol) {
    VecX g;
    al_gradient_and_model(nlp, result.x, m, rho, g, nullptr);
    result.stationarity = projected_gradient_norm(nlp, result.x, g) /
                          (1.0 + std::abs(result.objective));
    if (result.stationarity <= opts.opt_tol) result.status = SolveStatus::Solved;
  }
  return result;
}

}  // namespace bicatch::mmto
