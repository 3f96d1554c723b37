#pragma once

#include <cstdint>
#include <vector>

#include "bsdelab/ensemble.hpp"
#include "bsdelab/generator.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {

struct SolveOptions {
  int basis_degree = 4;
  double fixed_point_tol = 1e-12;
  int max_fixed_point_iter = 100;
  // Driver weighting of the implicit step:
  //   y = E_k[Y_{k+1} + (1-theta) dt f(t_{k+1}, Y_{k+1}, Z_{k+1})] + theta dt f(t_k, y, Z_k).
  // theta = 1 is backward Euler; the trapezoidal default halves the time bias,
  // which the pinned solver tolerances rely on.
  double theta = 0.5;
  double ridge = StepRegression::kDefaultRidge;
  // Discrete fixed points of non-Lipschitz drivers may pick a non-minimal
  // solution branch; require an explicit opt-in for those.
  bool allow_non_lipschitz = false;
};

struct SolverDiagnostics {
  long long total_fixed_point_iters = 0;
  int max_fixed_point_iters = 0;
  double max_fixed_point_residual = 0.0;
  double min_regression_pivot = 0.0;
  // Monte Carlo standard error of y0, taken from the per-path scatter of the
  // primal payoff xi + int f(t, Y, Z) dt whose mean y0 estimates (basis bias
  // excluded).
  double y0_std_error = 0.0;
};

// Discrete solution (Y, Z) on the ensemble's grid. Y has n_steps + 1 columns,
// Z has n_steps (Z[., k, .] is the control on [t_k, t_{k+1})).
struct SolutionField {
  TimeGrid grid;
  int d = 1;
  std::size_t M = 0;
  std::vector<double> Y;  // M x (n_steps + 1)
  std::vector<double> Z;  // M x n_steps x d
  SolverDiagnostics diagnostics;

  double y(std::size_t m, int k) const {
    return Y[m * static_cast<std::size_t>(grid.n_steps + 1) + k];
  }
  double z(std::size_t m, int k, int j) const {
    return Z[(m * static_cast<std::size_t>(grid.n_steps) + k) * d + j];
  }
  // Monte Carlo estimate of Y at time 0 (ensemble average of the t=0 column).
  double y0() const;
};

// Least-squares Monte Carlo backward induction for
//   Y_t = xi(W_T) + int_t^T f(s, Y_s, Z_s) ds - int_t^T Z_s dW_s.
// Z is regressed from centered martingale increments, Y from a theta-weighted
// implicit step solved by fixed-point iteration (contraction enforced).
SolutionField solve(const GeneratorSpec& gen, const TerminalSpec& terminal,
                    const PathEnsemble& paths, const SolveOptions& options = {});

SolutionField solve_truncated(const GeneratorSpec& gen, const TerminalSpec& terminal,
                              TruncationIndex idx, const PathEnsemble& paths,
                              const SolveOptions& options = {});

// Solves the dominating equation: driver |f0^{n,p}| + beta y + gamma |z| with
// terminal |xi^{n,p}|. Its Y should dominate |Y^{n,p}| pathwise in expectation.
SolutionField solve_comparison(const GeneratorSpec& gen, const TerminalSpec& terminal,
                               TruncationIndex idx, const PathEnsemble& paths,
                               const SolveOptions& options = {});

// q_t = gamma * sgn(Z_t) (componentwise sgn with sgn(0) = 0), the Girsanov
// drift that absorbs the gamma|z| part of a dominating driver. Scalar noise
// only: for d > 1 the absorbing drift is z-direction dependent and this
// extraction is not well defined.
AdaptedDrift extract_sign_drift(const SolutionField& sol, double gamma);

}  // namespace bsdelab
