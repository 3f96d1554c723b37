#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdelab/estimates.hpp"
#include "bsdelab/solver.hpp"

namespace bsdelab {

// Numerical delta-Y pairs carry O(basis/regression) noise; the negative
// control violates the representation by O(1). Frozen between those scales.
inline constexpr double kRepresentationTol = 0.05;
// Allowance for shared discretization bias when comparing two solver runs.
inline constexpr double kAgreementAllowance = 0.01;

// Exact pathwise linearization of the driver difference between two solution
// fields: f(t,Y1,Z1) - f(t,Y2,Z2) = u dY + <v, dZ>, built from telescoping
// difference quotients (y first, then z components in index order, quotients
// of vanishing denominators set to 0). |u| <= beta and |v| <= gamma (Euclidean)
// are enforced; both hold automatically for scalar noise.
struct LinearizationField {
  std::size_t M = 0;
  int n_steps = 0;
  int d = 1;
  double beta_bound = 0.0;
  double gamma_bound = 0.0;
  std::vector<double> u;  // M x n_steps
  std::vector<double> v;  // M x n_steps x d
  double max_residual = 0.0;  // worst |identity lhs - rhs|, relative

  double u_at(std::size_t m, int k) const { return u[m * static_cast<std::size_t>(n_steps) + k]; }
  double v_at(std::size_t m, int k, int j) const {
    return v[(m * static_cast<std::size_t>(n_steps) + k) * d + j];
  }
};

LinearizationField linearize(const GeneratorSpec& gen, const SolutionField& s1,
                             const SolutionField& s2);

AdaptedDrift linearization_drift(const LinearizationField& lin);

// Backward decomposition of [0, T] into windows of length a^2 / (4 gamma^2),
// the span on which the exp(int v dW) family stays uniformly integrable for
// gauge weight a. windows[0] ends at T; the earliest window may be shorter.
struct Window {
  double begin = 0.0, end = 0.0;
};
struct WindowSchedule {
  double window_length = 0.0;
  std::vector<Window> windows;
};
WindowSchedule window_schedule(double a, double gamma, double T);

struct LevelMargin {
  std::string rule;
  double mean_margin = 0.0;
  double min_margin = 0.0;
  double std_error = 0.0;
  // Paths whose margin dips below -tolerance. Informational: fitted fields
  // spike on tail paths where the polynomial conditional expectation
  // extrapolates, so isolated excursions are expected even for genuine pairs.
  long long pathwise_below_tol = 0;
  // The gate: mean margin below -(tolerance + 3 std errors). A corrupted pair
  // misses the representation identity by O(1) in the mean; a genuine pair by
  // regression noise only.
  bool violation = false;
};

struct DeltaRepReport {
  int t_step = 0;
  double t = 0.0;
  double tolerance = kRepresentationTol;
  std::vector<LevelMargin> per_rule;
  long long total_violations = 0;  // rules whose mean-level gate fails
};

// Margin of |dY_{t and tau}| <= e^{beta T} E[ exp(int_t^tau v dW) |dY_tau| | F_t ]
// for every stopping rule in the family, the conditional expectation projected
// on the polynomial basis at time t. Genuine solution pairs sit within
// `tolerance` of 0 on both sides; pairs that are NOT two solutions of the same
// equation (the negative control) break it by an O(1) amount.
DeltaRepReport delta_representation_margin(const SolutionField& s1, const SolutionField& s2,
                                           const LinearizationField& lin,
                                           const StoppingFamily& family,
                                           const PathEnsemble& paths, int t_step,
                                           double tolerance = kRepresentationTol,
                                           int basis_degree = 4,
                                           double ridge = StepRegression::kDefaultRidge);

struct UiRuleReport {
  std::string rule;
  long long young_violations = 0;       // pathwise splits of exp(I)|dY|
  double second_moment = 0.0;           // E exp(I^2 / a^2)
  double second_moment_se = 0.0;
  double second_moment_bound = 0.0;     // 1/sqrt(1 - 2 gamma^2 (T-t)/a^2) <= sqrt(2)
  bool second_moment_violation = false;
  double psi_delta_mean = 0.0;          // E psi_a(|dY_tau|)
  double psi_delta_se = 0.0;
  double psi_pair_mean = 0.0;           // E (1/2) psi_a(2)(psi_a(|Y1_tau|)+psi_a(|Y2_tau|))
  double psi_pair_se = 0.0;
  long long psi_split_violations = 0;   // pathwise psi-split failures
  bool psi_mean_violation = false;
};

struct UiReport {
  double a = 0.0;
  int t_step = 0;
  double t = 0.0;
  double window_begin = 0.0;
  std::vector<UiRuleReport> per_rule;
  bool any_violation() const;
};

// Uniform-integrability margins of the driving family exp(int_t^tau v dW) and
// the psi-split of |dY| over the pair, inside the window [T - a^2/(4gamma^2), T].
UiReport uniform_integrability_margin(const SolutionField& s1, const SolutionField& s2,
                                      const LinearizationField& lin,
                                      const StoppingFamily& family,
                                      const PathEnsemble& paths, double a, int t_step);

struct AgreementReport {
  double y0_a = 0.0, y0_b = 0.0;
  double se_a = 0.0, se_b = 0.0;
  double delta = 0.0;
  double combined_se = 0.0;
  double allowance = kAgreementAllowance;
  bool pass = false;
  double max_step_mean_diff = 0.0;  // max_k |mean Y_a(t_k) - mean Y_b(t_k)|
  double psi_moment = 0.0;          // E psi_mu(|xi| + int |f0|) on ensemble a
  double psi_moment_se = 0.0;
  bool integrability_warning = false;
};

// Solves the same instance on two independent ensembles (different seeds,
// possibly different solver options) and checks that Y0 agrees within
// 3 combined standard errors plus a small shared-bias allowance. When the
// psi-moment of the data diverges the agreement is still reported, flagged.
AgreementReport two_solver_agreement(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                     const TimeGrid& grid, int d, std::size_t M,
                                     std::uint64_t seed_a, std::uint64_t seed_b,
                                     const SolveOptions& opt_a, const SolveOptions& opt_b,
                                     PsiWeight mu, double allowance = kAgreementAllowance);

}  // namespace bsdelab
