#pragma once

#include <string>
#include <vector>

#include "bsdelab/psi.hpp"
#include "bsdelab/solver.hpp"

namespace bsdelab {

// Pure floating-point slack for an inequality that holds with structural
// margin whenever mu exceeds the critical weight.
inline constexpr double kBoundViolationTol = 1e-8;

struct StepMargin {
  int step = 0;
  double time = 0.0;
  double mean_margin = 0.0;
  double min_margin = 0.0;
  long long violations = 0;
};

struct BoundReport {
  std::vector<StepMargin> per_step;
  long long total_violations = 0;
  double tolerance = kBoundViolationTol;
  std::string estimator;
};

// Pathwise check of the a-priori growth bound
//   |Y_t| <= e^{beta (T-t)} / sqrt(1 - gamma^2 (T-t)/mu^2)
//          + e^{2 mu^2 + beta (T-t)} E[ psi_mu(|xi| + int_t^T |f0|) | F_t ],
// with the conditional expectation replaced by a least-squares projection on
// the same polynomial basis the solver uses (clamped at 0). Requires
// mu > gamma sqrt(T). margin = rhs - |Y|; entries below -tolerance count as
// violations.
BoundReport apriori_bound_check(const SolutionField& sol, const GeneratorSpec& gen,
                                const TerminalSpec& terminal, PsiWeight mu,
                                const PathEnsemble& paths,
                                double violation_tol = kBoundViolationTol,
                                int basis_degree = 4,
                                double ridge = StepRegression::kDefaultRidge);

// A finite family of stopping times given by their stopping step per path.
struct StoppingFamily {
  int n_steps = 0;
  std::size_t M = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> stop_steps;  // [rule][path]

  std::size_t size() const { return labels.size(); }
  void append(const StoppingFamily& other);

  // One deterministic rule per grid node: tau = t_k.
  static StoppingFamily deterministic(const TimeGrid& grid, std::size_t M);
  // First grid node where `process` (M x (n_steps+1), row-major) reaches each
  // level; n_steps when a path never does.
  static StoppingFamily hitting(std::span<const double> levels,
                                std::span<const double> process, std::size_t M, int n_steps,
                                const std::string& label_prefix);
};

// |Y| sampled as an M x (n_steps + 1) level process (input to hitting rules).
std::vector<double> abs_y_process(const SolutionField& sol);
// |Y1| + |Y2| for pairs of solutions on the same ensemble.
std::vector<double> abs_sum_process(const SolutionField& a, const SolutionField& b);

struct ClassDEntry {
  std::string rule;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct ClassDReport {
  double a = 0.0;  // gauge weight
  std::vector<ClassDEntry> entries;
  double sup_estimate = 0.0;
  int argmax = -1;
  double sup_std_error = 0.0;
};

// sup over the family of E[ psi_a(|Y_tau|) ]: the uniform-integrability
// surrogate that keeps the truncation limit honest.
ClassDReport class_D_diagnostic(const SolutionField& sol, double a,
                                const StoppingFamily& family);

struct ProofConstant {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo error of the psi-moment factor
};

// The constant the class-(D) estimate is checked against:
//   psi_a(e^{beta T}) * ( 1/sqrt(1 - gamma^2 T / b^2)
//                         + e^{2 b^2 + a b^2 / c} E psi_{a+b+c}(|xi| + int_0^T |f0|) ).
// Requires b > gamma sqrt(T).
ProofConstant class_d_proof_constant(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                     const PathEnsemble& paths, const PsiSplit& split);

}  // namespace bsdelab
