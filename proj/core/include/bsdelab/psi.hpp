#pragma once

#include <limits>

namespace bsdelab {

// Exponent weight of the growth gauge x -> x * exp(mu * sqrt(2 * log(1 + x))).
// A validated strong type so a bare double can't silently land in the wrong
// slot of the multi-parameter inequalities below.
struct PsiWeight {
  double mu;
  explicit PsiWeight(double mu_);
};

// Additive decomposition mu = a + b + c used by the composition inequality and
// by the windowed uniqueness experiments.
struct PsiSplit {
  double a, b, c;
  PsiSplit(double a_, double b_, double c_);
  double sum() const { return a + b + c; }
};

// Growth gauges with weight below this threshold of gamma * sqrt(T) carry no
// information; everything in estimates/uniqueness requires mu strictly above.
double critical_mu(double gamma, double T);

// log(psi(x, mu)); -inf at x = 0. Never overflows: this is the form used for
// comparisons once psi itself saturates the double range.
double log_psi(double x, PsiWeight w);

// psi(x, mu) = x * exp(mu * sqrt(2 * log1p(x))), x >= 0. Convex, increasing,
// psi(0) = 0. Returns +inf once the value exceeds the double range.
double psi(double x, PsiWeight w);

// exp(x)*y <= exp(x^2 / (2 mu^2)) + exp(2 mu^2) * psi(y, mu) for all real x,
// y >= 0. Returns rhs - lhs. When either side saturates, the sign is decided
// at log level and +-inf is returned accordingly.
double young_gap(double x, double y, PsiWeight w);

// psi(c, mu) * psi(x, mu) - psi(c x, mu), c > 1, x >= 0; nonnegative.
double submultiplicativity_margin(double c, double x, PsiWeight w);

// exp(a b^2 / c) * psi(x, a + b + c) - psi(psi(x, a), b); nonnegative.
double composition_margin(double x, const PsiSplit& split);

// Canonical split of a weight mu > gamma*sqrt(T):
//   a = c = (mu - gamma sqrt(T)) / 4,  b = (mu + gamma sqrt(T)) / 2,
// so a + b + c = mu and b stays strictly above the critical weight.
PsiSplit default_split(PsiWeight w, double gamma, double T);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace bsdelab
