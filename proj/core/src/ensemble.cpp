#include "bsdelab/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/stats.hpp"

namespace bsdelab {

PathEnsemble generate_paths(const TimeGrid& grid, int d, std::size_t M, std::uint64_t seed,
                            std::size_t capacity) {
  if (d < 1) throw DomainError("generate_paths: dimension must be >= 1");
  if (M == 0) throw DomainError("generate_paths: need at least one path");
  const std::size_t per_path = static_cast<std::size_t>(grid.n_steps) * d;
  if (M > capacity / per_path)
    throw CapacityError("generate_paths: " + std::to_string(M) + " paths x " +
                        std::to_string(per_path) + " increments exceeds capacity " +
                        std::to_string(capacity));

  PathEnsemble out{grid, d, M, seed, {}};
  out.increments.resize(M * per_path);
  const double sdt = std::sqrt(grid.dt());
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      SplitMix64 g = path_stream(seed, m);
      double* row = out.increments.data() + m * per_path;
      for (std::size_t i = 0; i < per_path; ++i) row[i] = sdt * g.next_normal();
    }
  });
  return out;
}

std::vector<double> brownian_positions(const PathEnsemble& paths) {
  const int n = paths.grid.n_steps, d = paths.d;
  const std::size_t M = paths.M;
  std::vector<double> pos(M * static_cast<std::size_t>(n + 1) * d);
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      double* p = pos.data() + m * static_cast<std::size_t>(n + 1) * d;
      const double* inc = paths.increments.data() + m * static_cast<std::size_t>(n) * d;
      for (int j = 0; j < d; ++j) p[j] = 0.0;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < d; ++j)
          p[(k + 1) * d + j] = p[k * d + j] + inc[k * static_cast<std::size_t>(d) + j];
    }
  });
  return pos;
}

namespace {
AdaptedDrift make_shell(const PathEnsemble& paths, double bound) {
  AdaptedDrift q;
  q.d = paths.d;
  q.n_steps = paths.grid.n_steps;
  q.M = paths.M;
  q.bound = bound;
  q.values.resize(paths.increments.size());
  return q;
}

void check_ranges(const PathEnsemble& paths, const AdaptedDrift& q, int from_step,
                  int to_step) {
  if (q.M != paths.M || q.d != paths.d || q.n_steps != paths.grid.n_steps)
    throw DomainError("drift and ensemble shapes disagree");
  if (from_step < 0 || to_step > paths.grid.n_steps || from_step > to_step)
    throw DomainError("step range out of bounds");
}
}  // namespace

AdaptedDrift AdaptedDrift::zero(const PathEnsemble& paths) { return make_shell(paths, 0.0); }

AdaptedDrift AdaptedDrift::constant(const PathEnsemble& paths, std::span<const double> v) {
  if (static_cast<int>(v.size()) != paths.d)
    throw DomainError("AdaptedDrift::constant: vector dimension mismatch");
  double norm2 = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("AdaptedDrift::constant: non-finite entry");
    norm2 += x * x;
  }
  AdaptedDrift q = make_shell(paths, std::sqrt(norm2));
  const std::size_t cells = q.values.size() / paths.d;
  for (std::size_t c = 0; c < cells; ++c)
    for (int j = 0; j < paths.d; ++j) q.values[c * paths.d + j] = v[j];
  return q;
}

AdaptedDrift AdaptedDrift::adapted(
    const PathEnsemble& paths, double bound,
    const std::function<void(std::size_t, int, std::span<const double>, std::span<double>)>&
        fn) {
  if (!(std::isfinite(bound) && bound >= 0.0))
    throw DomainError("AdaptedDrift: bound must be finite and >= 0");
  AdaptedDrift q = make_shell(paths, bound);
  const int n = q.n_steps, d = q.d;
  const double cap2 = bound * bound * (1.0 + 1e-9);
  std::atomic<bool> bad{false};
  parallel_for_blocks(paths.M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      const std::span<const double> inc = paths.path(m);
      double* row = q.values.data() + m * static_cast<std::size_t>(n) * d;
      for (int k = 0; k < n; ++k) {
        fn(m, k, inc.subspan(0, static_cast<std::size_t>(k) * d),
           std::span<double>(row + static_cast<std::size_t>(k) * d, d));
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
          const double x = row[static_cast<std::size_t>(k) * d + j];
          s += x * x;
        }
        if (!(s <= cap2)) bad.store(true, std::memory_order_relaxed);
      }
    }
  });
  if (bad.load()) throw DomainError("AdaptedDrift: values exceed the declared bound");
  return q;
}

std::vector<double> stochastic_integral(const PathEnsemble& paths, const AdaptedDrift& q,
                                        int from_step, int to_step) {
  check_ranges(paths, q, from_step, to_step);
  std::vector<double> out(paths.M, 0.0);
  const int d = paths.d, n = paths.grid.n_steps;
  parallel_for_blocks(paths.M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      double s = 0.0;
      const double* inc = paths.increments.data() + m * static_cast<std::size_t>(n) * d;
      const double* qv = q.values.data() + m * static_cast<std::size_t>(n) * d;
      for (int k = from_step; k < to_step; ++k)
        for (int j = 0; j < d; ++j)
          s += qv[static_cast<std::size_t>(k) * d + j] * inc[static_cast<std::size_t>(k) * d + j];
      out[m] = s;
    }
  });
  return out;
}

std::vector<double> stochastic_integral(const PathEnsemble& paths, const AdaptedDrift& q,
                                        std::span<const int> from_steps,
                                        std::span<const int> to_steps) {
  if (from_steps.size() != paths.M || to_steps.size() != paths.M)
    throw DomainError("stochastic_integral: one step range per path required");
  for (std::size_t m = 0; m < paths.M; ++m) check_ranges(paths, q, from_steps[m], to_steps[m]);
  std::vector<double> out(paths.M, 0.0);
  const int d = paths.d, n = paths.grid.n_steps;
  parallel_for_blocks(paths.M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      double s = 0.0;
      const double* inc = paths.increments.data() + m * static_cast<std::size_t>(n) * d;
      const double* qv = q.values.data() + m * static_cast<std::size_t>(n) * d;
      for (int k = from_steps[m]; k < to_steps[m]; ++k)
        for (int j = 0; j < d; ++j)
          s += qv[static_cast<std::size_t>(k) * d + j] * inc[static_cast<std::size_t>(k) * d + j];
      out[m] = s;
    }
  });
  return out;
}

std::vector<double> girsanov_weight(const PathEnsemble& paths, const AdaptedDrift& q,
                                    int from_step, int to_step) {
  check_ranges(paths, q, from_step, to_step);
  std::vector<double> out(paths.M, 1.0);
  const int d = paths.d, n = paths.grid.n_steps;
  const double dt = paths.grid.dt();
  parallel_for_blocks(paths.M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      double mart = 0.0, quad = 0.0;
      const double* inc = paths.increments.data() + m * static_cast<std::size_t>(n) * d;
      const double* qv = q.values.data() + m * static_cast<std::size_t>(n) * d;
      for (int k = from_step; k < to_step; ++k)
        for (int j = 0; j < d; ++j) {
          const double qi = qv[static_cast<std::size_t>(k) * d + j];
          mart += qi * inc[static_cast<std::size_t>(k) * d + j];
          quad += qi * qi;
        }
      out[m] = std::exp(mart - 0.5 * quad * dt);
    }
  });
  return out;
}

GaussMomentReport gauss_moment_check(const PathEnsemble& paths, const AdaptedDrift& q,
                                     PsiWeight mu, int from_step) {
  check_ranges(paths, q, from_step, paths.grid.n_steps);
  const double t = paths.grid.time(from_step);
  const double tau = paths.grid.T - t;
  const double mu2 = mu.mu * mu.mu;
  const double radicand = 1.0 - q.bound * q.bound * tau / mu2;
  if (!(radicand > 0.0))
    throw HypothesisError("gauss_moment_check: need mu > bound(q) * sqrt(T - t)");

  const std::vector<double> I = stochastic_integral(paths, q, from_step, paths.grid.n_steps);
  std::vector<double> e(paths.M);
  parallel_for_blocks(paths.M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) e[m] = std::exp(I[m] * I[m] / (2.0 * mu2));
  });
  const MeanVar mv = mean_var(e);

  GaussMomentReport r;
  r.t = t;
  r.mu = mu.mu;
  r.drift_bound = q.bound;
  r.estimate = mv.mean;
  r.std_error = mv.std_error();
  r.bound = 1.0 / std::sqrt(radicand);
  r.violation = r.estimate > r.bound + 3.0 * r.std_error;
  return r;
}

}  // namespace bsdelab
