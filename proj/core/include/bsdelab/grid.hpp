#pragma once

#include <cmath>

#include "bsdelab/errors.hpp"

namespace bsdelab {

// Uniform partition 0 = t_0 < ... < t_n = T. Times are computed, not stored,
// so time(0) == 0 and time(n_steps) == T hold exactly.
struct TimeGrid {
  double T = 1.0;
  int n_steps = 1;

  TimeGrid(double T_, int n_steps_) : T(T_), n_steps(n_steps_) {
    if (!(std::isfinite(T) && T > 0.0))
      throw DomainError("TimeGrid: horizon must be finite and > 0");
    if (n_steps < 1) throw DomainError("TimeGrid: need at least one step");
  }

  double dt() const { return T / n_steps; }

  double time(int k) const {
    if (k < 0 || k > n_steps) throw DomainError("TimeGrid: step index out of range");
    return k == n_steps ? T : k * dt();
  }

  // Smallest k with time(k) >= t (clamped to [0, n_steps]).
  int step_at_or_after(double t) const {
    if (t <= 0.0) return 0;
    if (t >= T) return n_steps;
    const int k = static_cast<int>(std::ceil(t / dt() - 1e-12));
    return k < 0 ? 0 : (k > n_steps ? n_steps : k);
  }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace bsdelab
