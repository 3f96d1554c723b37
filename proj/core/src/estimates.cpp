#include "bsdelab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/stats.hpp"

namespace bsdelab {

namespace {
constexpr double kLogMax = 709.782712893384;

void require_matching(const SolutionField& sol, const PathEnsemble& paths) {
  if (sol.M != paths.M || sol.d != paths.d || !(sol.grid == paths.grid))
    throw DomainError("solution and ensemble do not describe the same run");
}

std::string format_level(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level);
  return buf;
}
}  // namespace

BoundReport apriori_bound_check(const SolutionField& sol, const GeneratorSpec& gen,
                                const TerminalSpec& terminal, PsiWeight mu,
                                const PathEnsemble& paths, double violation_tol,
                                int basis_degree, double ridge) {
  require_matching(sol, paths);
  if (!terminal.xi) throw DomainError("apriori_bound_check: empty terminal");
  const int n = sol.grid.n_steps, d = sol.d;
  const std::size_t M = sol.M;
  const double T = sol.grid.T;
  const double mu2 = mu.mu * mu.mu;
  if (!(1.0 - gen.gamma * gen.gamma * T / mu2 > 0.0))
    throw HypothesisError("apriori_bound_check: need mu > gamma*sqrt(T)");

  const std::vector<double> pos = brownian_positions(paths);
  const std::size_t pos_stride = static_cast<std::size_t>(n + 1) * d;
  const std::size_t ys = static_cast<std::size_t>(n + 1);

  std::vector<double> xi(M);
  for (std::size_t m = 0; m < M; ++m) {
    xi[m] = terminal.xi(std::span<const double>(
        pos.data() + m * pos_stride + static_cast<std::size_t>(n) * d, d));
    if (!std::isfinite(xi[m]))
      throw DomainError("apriori_bound_check: terminal value not finite on some path");
  }

  // Remaining |f0| mass from t_k to T, left-endpoint rule (c[n] = 0).
  const double dt = sol.grid.dt();
  std::vector<double> f0_tail(n + 1, 0.0);
  for (int k = n - 1; k >= 0; --k)
    f0_tail[k] = f0_tail[k + 1] + std::abs(gen.f0(sol.grid.time(k))) * dt;

  const PolynomialBasis basis(d, basis_degree);

  BoundReport report;
  report.tolerance = violation_tol;
  report.estimator = "polynomial projection, degree " + std::to_string(basis_degree);
  report.per_step.reserve(n + 1);

  std::vector<double> gauge(M), cond(M), states(M * static_cast<std::size_t>(d));
  for (int k = 0; k <= n; ++k) {
    const double t = sol.grid.time(k);
    parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m)
        gauge[m] = psi(std::abs(xi[m]) + f0_tail[k], mu);
    });
    if (!std::isfinite(mean_var(gauge).mean))
      throw DomainError("apriori_bound_check: psi moment of the terminal diverged");

    if (k == n) {
      cond = gauge;  // F_T-conditional expectation is the value itself
    } else {
      for (std::size_t m = 0; m < M; ++m)
        for (int j = 0; j < d; ++j)
          states[m * d + j] = pos[m * pos_stride + static_cast<std::size_t>(k) * d + j];
      const StepRegression reg(basis, states, M, ridge);
      reg.fit(gauge, cond);
      for (std::size_t m = 0; m < M; ++m) cond[m] = std::max(cond[m], 0.0);
    }

    const double tau = T - t;
    const double first = std::exp(gen.beta * tau) /
                         std::sqrt(1.0 - gen.gamma * gen.gamma * tau / mu2);
    const double log_factor = 2.0 * mu2 + gen.beta * tau;
    const double factor = std::exp(log_factor);

    StepMargin sm;
    sm.step = k;
    sm.time = t;
    sm.min_margin = kInf;
    double sum = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      double second;
      if (std::isfinite(factor)) {
        second = factor * cond[m];
      } else {
        const double l2 = cond[m] > 0.0 ? log_factor + std::log(cond[m]) : -kInf;
        second = l2 < kLogMax ? std::exp(l2) : kInf;
      }
      const double margin = first + second - std::abs(sol.Y[m * ys + k]);
      sum += margin;
      sm.min_margin = std::min(sm.min_margin, margin);
      if (margin < -violation_tol) ++sm.violations;
    }
    sm.mean_margin = sum / static_cast<double>(M);
    report.total_violations += sm.violations;
    report.per_step.push_back(sm);
  }
  return report;
}

void StoppingFamily::append(const StoppingFamily& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  if (other.n_steps != n_steps || other.M != M)
    throw DomainError("StoppingFamily::append: incompatible families");
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  stop_steps.insert(stop_steps.end(), other.stop_steps.begin(), other.stop_steps.end());
}

StoppingFamily StoppingFamily::deterministic(const TimeGrid& grid, std::size_t M) {
  if (M == 0) throw DomainError("StoppingFamily: empty ensemble");
  StoppingFamily f;
  f.n_steps = grid.n_steps;
  f.M = M;
  for (int k = 0; k <= grid.n_steps; ++k) {
    f.labels.push_back("det_step_" + std::to_string(k));
    f.stop_steps.emplace_back(M, k);
  }
  return f;
}

StoppingFamily StoppingFamily::hitting(std::span<const double> levels,
                                       std::span<const double> process, std::size_t M,
                                       int n_steps, const std::string& label_prefix) {
  if (M == 0) throw DomainError("StoppingFamily: empty ensemble");
  if (process.size() != M * static_cast<std::size_t>(n_steps + 1))
    throw DomainError("StoppingFamily::hitting: process shape mismatch");
  StoppingFamily f;
  f.n_steps = n_steps;
  f.M = M;
  for (double level : levels) {
    if (!(std::isfinite(level) && level > 0.0))
      throw DomainError("StoppingFamily::hitting: levels must be finite and > 0");
    f.labels.push_back(label_prefix + "_hit_" + format_level(level));
    std::vector<int>& stops = f.stop_steps.emplace_back(M, n_steps);
    for (std::size_t m = 0; m < M; ++m) {
      const double* row = process.data() + m * static_cast<std::size_t>(n_steps + 1);
      for (int k = 0; k <= n_steps; ++k) {
        if (row[k] >= level) {
          stops[m] = k;
          break;
        }
      }
    }
  }
  return f;
}

std::vector<double> abs_y_process(const SolutionField& sol) {
  const std::size_t ys = static_cast<std::size_t>(sol.grid.n_steps + 1);
  std::vector<double> out(sol.M * ys);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(sol.Y[i]);
  return out;
}

std::vector<double> abs_sum_process(const SolutionField& a, const SolutionField& b) {
  if (a.M != b.M || !(a.grid == b.grid))
    throw DomainError("abs_sum_process: mismatched solutions");
  std::vector<double> out(a.Y.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(a.Y[i]) + std::abs(b.Y[i]);
  return out;
}

ClassDReport class_D_diagnostic(const SolutionField& sol, double a,
                                const StoppingFamily& family) {
  if (family.n_steps != sol.grid.n_steps || family.M != sol.M)
    throw DomainError("class_D_diagnostic: family does not match the solution");
  const PsiWeight wa(a);
  const std::size_t ys = static_cast<std::size_t>(sol.grid.n_steps + 1);

  ClassDReport report;
  report.a = a;
  report.sup_estimate = -kInf;
  std::vector<double> vals(sol.M);
  for (std::size_t r = 0; r < family.size(); ++r) {
    const std::vector<int>& stops = family.stop_steps[r];
    for (std::size_t m = 0; m < sol.M; ++m)
      vals[m] = psi(std::abs(sol.Y[m * ys + stops[m]]), wa);
    const MeanVar mv = mean_var(vals);
    report.entries.push_back({family.labels[r], mv.mean, mv.std_error()});
    if (mv.mean > report.sup_estimate) {
      report.sup_estimate = mv.mean;
      report.argmax = static_cast<int>(r);
      report.sup_std_error = mv.std_error();
    }
  }
  return report;
}

ProofConstant class_d_proof_constant(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                     const PathEnsemble& paths, const PsiSplit& split) {
  const double T = paths.grid.T;
  const double m0 = critical_mu(gen.gamma, T);
  if (!(split.b > m0))
    throw HypothesisError("class_d_proof_constant: need b > gamma*sqrt(T)");
  const PsiWeight wa(split.a), wsum(split.sum());

  const int n = paths.grid.n_steps, d = paths.d;
  const double dt = paths.grid.dt();
  double f0_mass = 0.0;
  for (int k = 0; k < n; ++k) f0_mass += std::abs(gen.f0(paths.grid.time(k))) * dt;

  const std::vector<double> pos = brownian_positions(paths);
  const std::size_t pos_stride = static_cast<std::size_t>(n + 1) * d;
  std::vector<double> vals(paths.M);
  for (std::size_t m = 0; m < paths.M; ++m) {
    const double xi = terminal.xi(std::span<const double>(
        pos.data() + m * pos_stride + static_cast<std::size_t>(n) * d, d));
    vals[m] = psi(std::abs(xi) + f0_mass, wsum);
  }
  const MeanVar mv = mean_var(vals);

  const double k1 = psi(std::exp(gen.beta * T), wa);
  const double inv = 1.0 / std::sqrt(1.0 - gen.gamma * gen.gamma * T / (split.b * split.b));
  const double factor = std::exp(2.0 * split.b * split.b + split.a * split.b * split.b / split.c);

  ProofConstant out;
  out.value = k1 * (inv + factor * mv.mean);
  out.std_error = k1 * factor * mv.std_error();
  return out;
}

}  // namespace bsdelab
