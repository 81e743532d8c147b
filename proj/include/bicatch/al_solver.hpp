#pragma once

// Augmented-Lagrangian NLP solver: outer multiplier/penalty loop around a
// projected Levenberg-Marquardt inner minimizer (Gauss-Newton model of the
// penalty terms, dense normal equations). Deterministic for fixed inputs.
// Sits behind the solver interface so an external NLP solver can be swapped
// in.

#include "bicatch/nlp.hpp"

namespace bicatch::mmto {

enum class SolveStatus { Solved, MaxIter, Stalled };

struct SolveOptions {
  Real feas_tol = 1e-4;
  Real opt_tol = 1e-3;         // scaled first-order stationarity
  int max_outer = 40;
  int max_inner = 80;          // Newton iterations per outer pass
  Real rho_init = 10.0;
  Real rho_growth = 5.0;
  Real rho_max = 1e9;
  bool verbose = false;
};

struct SolveResult {
  VecX x;
  SolveStatus status = SolveStatus::MaxIter;
  Real objective = 0.0;
  Real max_violation = 0.0;
  Real stationarity = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;  // cumulative
};

// Throws DimensionMismatch when x0.size() != nlp.num_vars.
SolveResult solve_augmented_lagrangian(const TranscribedNLP& nlp, const VecX& x0,
                                       const SolveOptions& opts = {});

}  // namespace bicatch::mmto
