#include "bsdelab/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/stats.hpp"

namespace bsdelab {

double SolutionField::y0() const {
  const std::size_t stride = static_cast<std::size_t>(grid.n_steps + 1);
  std::vector<double> col(M);
  for (std::size_t m = 0; m < M; ++m) col[m] = Y[m * stride];
  return mean_var(col).mean;
}

SolutionField solve(const GeneratorSpec& gen, const TerminalSpec& terminal,
                    const PathEnsemble& paths, const SolveOptions& opt) {
  if (!gen.driver || !gen.f0) throw DomainError("solve: empty generator");
  if (!terminal.xi) throw DomainError("solve: empty terminal");
  if (gen.z_dim != paths.d)
    throw DomainError("solve: generator z dimension differs from the noise dimension");
  if (!(opt.theta >= 0.0 && opt.theta <= 1.0))
    throw DomainError("solve: theta must lie in [0, 1]");
  if (!gen.lipschitz && !opt.allow_non_lipschitz)
    throw DomainError(
        "solve: non-Lipschitz driver; the discrete fixed point may select a "
        "non-minimal branch. Set allow_non_lipschitz to proceed anyway.");

  const int n = paths.grid.n_steps, d = paths.d;
  const std::size_t M = paths.M;
  const double dt = paths.grid.dt();
  if (opt.theta * gen.beta * dt >= 1.0)
    throw StepSizeError("solve: theta*beta*dt >= 1, implicit step is not a contraction");

  const PolynomialBasis basis(d, opt.basis_degree);
  const std::size_t nb = static_cast<std::size_t>(basis.size());
  if (M < 10 * nb)
    throw DomainError("solve: need at least 10 paths per basis function (M >= " +
                      std::to_string(10 * nb) + ")");

  const std::vector<double> pos = brownian_positions(paths);
  const std::size_t pos_stride = static_cast<std::size_t>(n + 1) * d;

  SolutionField sol{paths.grid, d, M, {}, {}, {}};
  sol.Y.resize(M * static_cast<std::size_t>(n + 1));
  sol.Z.resize(M * static_cast<std::size_t>(n) * d);
  const std::size_t ys = static_cast<std::size_t>(n + 1);

  // Terminal column: exactly xi of the terminal state, path by path.
  {
    std::atomic<bool> bad{false};
    parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        const double v = terminal.xi(
            std::span<const double>(pos.data() + m * pos_stride + static_cast<std::size_t>(n) * d, d));
        if (!std::isfinite(v)) bad.store(true, std::memory_order_relaxed);
        sol.Y[m * ys + n] = v;
      }
    });
    if (bad.load()) throw DomainError("solve: terminal value not finite on some path");
  }

  sol.diagnostics.min_regression_pivot = kInf;

  std::vector<double> states(M * static_cast<std::size_t>(d));
  std::vector<double> ynext(M), scratch(M), rhs(M);
  std::vector<double> driver_next(M);

  for (int k = n - 1; k >= 0; --k) {
    for (std::size_t m = 0; m < M; ++m) {
      ynext[m] = sol.Y[m * ys + k + 1];
      for (int j = 0; j < d; ++j)
        states[m * d + j] = pos[m * pos_stride + static_cast<std::size_t>(k) * d + j];
    }

    const StepRegression reg(basis, states, M, opt.ridge);
    sol.diagnostics.min_regression_pivot =
        std::min(sol.diagnostics.min_regression_pivot, reg.diagnostics().min_pivot);

    // Conditional mean of Y_{k+1}, then the centered martingale increments for Z:
    // E[(Y_{k+1} - E_k Y_{k+1}) dW_j / dt | X_k]. Centering keeps Z exactly 0
    // for deterministic Y_{k+1}.
    std::vector<double> mhat = reg.fit(ynext);
    for (int j = 0; j < d; ++j) {
      for (std::size_t m = 0; m < M; ++m)
        scratch[m] = (ynext[m] - mhat[m]) * paths.dW(m, k, j) / dt;
      std::vector<double> zfit = reg.fit(scratch);
      for (std::size_t m = 0; m < M; ++m)
        sol.Z[(m * static_cast<std::size_t>(n) + k) * d + j] = zfit[m];
    }

    // Explicit part of the theta step.
    const double t_next = paths.grid.time(k + 1);
    const double w_explicit = (1.0 - opt.theta) * dt;
    if (w_explicit != 0.0) {
      const int kup = (k == n - 1) ? k : k + 1;  // Z proxy at t_{k+1}
      parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t m = lo; m < hi; ++m) {
          const std::span<const double> zup(
              sol.Z.data() + (m * static_cast<std::size_t>(n) + kup) * d, static_cast<std::size_t>(d));
          driver_next[m] = gen.driver(t_next, ynext[m], zup);
        }
      });
      for (std::size_t m = 0; m < M; ++m) scratch[m] = ynext[m] + w_explicit * driver_next[m];
    } else {
      for (std::size_t m = 0; m < M; ++m) scratch[m] = ynext[m];
    }

    reg.fit(scratch, rhs);

    // Implicit part: y = rhs + theta dt f(t_k, y, Z_k), plain fixed point
    // (contraction factor theta*beta*dt < 1 enforced above).
    const double t_k = paths.grid.time(k);
    const double w_implicit = opt.theta * dt;
    if (w_implicit == 0.0) {
      for (std::size_t m = 0; m < M; ++m) sol.Y[m * ys + k] = rhs[m];
    } else {
      std::atomic<long long> iters_total{0};
      std::atomic<int> iters_max{0};
      std::atomic<bool> failed{false};
      std::vector<double> fail_residual(1, 0.0);
      parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
        long long local_total = 0;
        int local_max = 0;
        for (std::size_t m = lo; m < hi; ++m) {
          const std::span<const double> zrow(
              sol.Z.data() + (m * static_cast<std::size_t>(n) + k) * d, static_cast<std::size_t>(d));
          double y = ynext[m];
          double residual = kInf;
          int it = 0;
          while (it < opt.max_fixed_point_iter) {
            const double y_new = rhs[m] + w_implicit * gen.driver(t_k, y, zrow);
            residual = std::abs(y_new - y);
            y = y_new;
            ++it;
            if (residual <= opt.fixed_point_tol) break;
          }
          if (residual > opt.fixed_point_tol) {
            failed.store(true, std::memory_order_relaxed);
            fail_residual[0] = residual;
          }
          local_total += it;
          local_max = std::max(local_max, it);
          sol.Y[m * ys + k] = y;
        }
        iters_total.fetch_add(local_total, std::memory_order_relaxed);
        int prev = iters_max.load(std::memory_order_relaxed);
        while (prev < local_max &&
               !iters_max.compare_exchange_weak(prev, local_max, std::memory_order_relaxed)) {
        }
      });
      if (failed.load())
        throw ConvergenceError("solve: fixed point did not reach tolerance at step " +
                                   std::to_string(k),
                               fail_residual[0]);
      sol.diagnostics.total_fixed_point_iters += iters_total.load();
      sol.diagnostics.max_fixed_point_iters =
          std::max(sol.diagnostics.max_fixed_point_iters, iters_max.load());
    }
  }

  // Sampling error of y0. The cross-sectional spread of the step-0 regressand
  // is blind to coefficient noise shared across paths, so measure the spread
  // of the primal payoff xi + int f(t, Y, Z) dt instead -- y0 estimates its
  // mean (the dW integral is centered), and its per-path scatter carries the
  // terminal sampling noise that actually drives the uncertainty.
  {
    std::vector<double> payoff(M);
    parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        double acc = sol.Y[m * ys + n];
        for (int k = 0; k < n; ++k) {
          const std::span<const double> zrow(
              sol.Z.data() + (m * static_cast<std::size_t>(n) + k) * d,
              static_cast<std::size_t>(d));
          acc += dt * gen.driver(paths.grid.time(k), sol.Y[m * ys + k], zrow);
        }
        payoff[m] = acc;
      }
    });
    sol.diagnostics.y0_std_error = mean_var(payoff).std_error();
  }

  return sol;
}

SolutionField solve_truncated(const GeneratorSpec& gen, const TerminalSpec& terminal,
                              TruncationIndex idx, const PathEnsemble& paths,
                              const SolveOptions& options) {
  return solve(truncated_generator(gen, idx), truncate_terminal(terminal, idx), paths, options);
}

SolutionField solve_comparison(const GeneratorSpec& gen, const TerminalSpec& terminal,
                               TruncationIndex idx, const PathEnsemble& paths,
                               const SolveOptions& options) {
  const GeneratorSpec dom = comparison_generator(gen, idx);
  TerminalSpec truncated = truncate_terminal(terminal, idx);
  TerminalFn base = truncated.xi;
  TerminalSpec absolute;
  absolute.description = "|" + truncated.description + "|";
  absolute.xi = [base](std::span<const double> x) { return std::abs(base(x)); };
  return solve(dom, absolute, paths, options);
}

AdaptedDrift extract_sign_drift(const SolutionField& sol, double gamma) {
  if (sol.d != 1)
    throw DomainError("extract_sign_drift: defined for scalar noise only (d == 1)");
  if (!(std::isfinite(gamma) && gamma >= 0.0))
    throw DomainError("extract_sign_drift: gamma must be finite and >= 0");
  AdaptedDrift q;
  q.d = 1;
  q.n_steps = sol.grid.n_steps;
  q.M = sol.M;
  q.bound = gamma;
  q.values.resize(sol.Z.size());
  for (std::size_t i = 0; i < sol.Z.size(); ++i) {
    const double z = sol.Z[i];
    q.values[i] = z > 0.0 ? gamma : (z < 0.0 ? -gamma : 0.0);
  }
  return q;
}

}  // namespace bsdelab
