#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/grid.hpp"
#include "bsdelab/psi.hpp"

namespace bsdelab {

// Brownian increments for M paths of a d-dimensional motion on a TimeGrid.
// Layout: increments[(m * n_steps + k) * d + j] = component j of dW over
// [t_k, t_{k+1}] for path m. Each path is generated from its own RNG stream,
// a pure function of (seed, m), so ensembles are reproducible independent of
// chunking and thread count.
struct PathEnsemble {
  TimeGrid grid;
  int d = 1;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::vector<double> increments;

  double dW(std::size_t m, int k, int j) const {
    return increments[(m * static_cast<std::size_t>(grid.n_steps) + k) * d + j];
  }
  // All increments of path m, steps [0, n_steps) x components.
  std::span<const double> path(std::size_t m) const {
    const std::size_t row = static_cast<std::size_t>(grid.n_steps) * d;
    return {increments.data() + m * row, row};
  }
};

// Default cap on stored doubles (increments array), ~2.1e9 entries = 16 GiB is
// far beyond this box; 2^28 entries = 2 GiB keeps runaway configs out.
inline constexpr std::size_t kDefaultEnsembleCapacity = std::size_t{1} << 28;

PathEnsemble generate_paths(const TimeGrid& grid, int d, std::size_t M, std::uint64_t seed,
                            std::size_t capacity = kDefaultEnsembleCapacity);

// W itself at every grid node: positions[(m * (n_steps + 1) + k) * d + j],
// with position 0 at k = 0. Prefix sums of the increments.
std::vector<double> brownian_positions(const PathEnsemble& paths);

// A process q adapted to the Brownian filtration, bounded by `bound` in
// Euclidean norm, stored per (path, step, component) with the same layout as
// the increments. values[m, k, :] may depend only on increments before step k.
struct AdaptedDrift {
  int d = 1;
  int n_steps = 0;
  std::size_t M = 0;
  double bound = 0.0;
  std::vector<double> values;

  double at(std::size_t m, int k, int j) const {
    return values[(m * static_cast<std::size_t>(n_steps) + k) * d + j];
  }

  static AdaptedDrift zero(const PathEnsemble& paths);
  // Same vector q at every (path, step); bound = |q|.
  static AdaptedDrift constant(const PathEnsemble& paths, std::span<const double> q);
  // fn(m, k, prefix, out) writes q_k for path m given the increments of steps
  // [0, k) (prefix has k*d entries). Values are checked against `bound`.
  static AdaptedDrift adapted(
      const PathEnsemble& paths, double bound,
      const std::function<void(std::size_t, int, std::span<const double>, std::span<double>)>&
          fn);
};

// sum_{k=from}^{to-1} <q_k, dW_k> per path.
std::vector<double> stochastic_integral(const PathEnsemble& paths, const AdaptedDrift& q,
                                        int from_step, int to_step);
// Per-path step ranges (used with stopping times).
std::vector<double> stochastic_integral(const PathEnsemble& paths, const AdaptedDrift& q,
                                        std::span<const int> from_steps,
                                        std::span<const int> to_steps);

// exp( sum <q, dW> - 1/2 sum |q|^2 dt ) per path over [from_step, to_step).
std::vector<double> girsanov_weight(const PathEnsemble& paths, const AdaptedDrift& q,
                                    int from_step, int to_step);

// Monte Carlo check of the Gaussian exponential-moment bound
//   E exp( |I|^2 / (2 mu^2) ) <= 1 / sqrt(1 - bound(q)^2 (T - t) / mu^2),
// I = integral of q dW over [t, T], valid whenever mu > bound(q) sqrt(T - t).
struct GaussMomentReport {
  double t = 0.0;
  double mu = 0.0;
  double drift_bound = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool violation = false;  // estimate > bound + 3 std errors
};

GaussMomentReport gauss_moment_check(const PathEnsemble& paths, const AdaptedDrift& q,
                                     PsiWeight mu, int from_step);

}  // namespace bsdelab
