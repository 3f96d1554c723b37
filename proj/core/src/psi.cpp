#include "bsdelab/psi.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {
// log(DBL_MAX); exponentials past this saturate and comparisons move to log level.
constexpr double kLogMax = 709.782712893384;
// Slack for log-level sign decisions once values are unrepresentable.
constexpr double kLogSlack = 1e-9;

void require_nonneg(double x, const char* who) {
  if (std::isnan(x) || x < 0.0)
    throw DomainError(std::string(who) + ": argument must be >= 0");
}
}  // namespace

PsiWeight::PsiWeight(double mu_) : mu(mu_) {
  if (!(std::isfinite(mu) && mu > 0.0))
    throw DomainError("PsiWeight: weight must be finite and > 0");
}

PsiSplit::PsiSplit(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  if (!(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0 &&
        std::isfinite(c) && c > 0.0))
    throw DomainError("PsiSplit: all three parts must be finite and > 0");
}

double critical_mu(double gamma, double T) {
  if (std::isnan(gamma) || gamma < 0.0) throw DomainError("critical_mu: gamma must be >= 0");
  if (std::isnan(T) || T < 0.0) throw DomainError("critical_mu: T must be >= 0");
  return gamma * std::sqrt(T);
}

double log_psi(double x, PsiWeight w) {
  require_nonneg(x, "log_psi");
  if (x == 0.0) return -kInf;
  if (std::isinf(x)) return kInf;
  return std::log(x) + w.mu * std::sqrt(2.0 * std::log1p(x));
}

double psi(double x, PsiWeight w) {
  require_nonneg(x, "psi");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return kInf;
  const double s = w.mu * std::sqrt(2.0 * std::log1p(x));
  if (std::log(x) + s >= kLogMax) return kInf;
  return x * std::exp(s);
}

double young_gap(double x, double y, PsiWeight w) {
  if (!std::isfinite(x)) throw DomainError("young_gap: x must be finite");
  require_nonneg(y, "young_gap");
  const double mu2 = w.mu * w.mu;
  const double t1 = x * x / (2.0 * mu2);        // log of exp(x^2 / 2mu^2)
  const double t2 = 2.0 * mu2 + log_psi(y, w);  // log of exp(2mu^2) psi(y)
  const double t3 = y == 0.0 ? -kInf : x + std::log(y);  // log of exp(x) y

  const double top = std::max({t1, t2, t3});
  if (top < kLogMax - 1.0) {
    const double term1 = std::exp(t1);
    // exp(2mu^2) can overflow on its own while the product is representable,
    // so fall back to the combined exponent in that case.
    double term2 = 0.0;
    if (y != 0.0) {
      const double factor = std::exp(2.0 * mu2);
      const double p = psi(y, w);
      term2 = std::isfinite(factor) ? factor * p : std::exp(t2);
    }
    const double lhs = x < kLogMax ? std::exp(x) * y : std::exp(t3);
    return term1 + term2 - lhs;
  }
  // Saturated: decide the sign where the numbers still exist.
  const double big = t1 >= t2 ? t1 + std::log1p(std::exp(t2 - t1))
                              : t2 + std::log1p(std::exp(t1 - t2));
  return big >= t3 - kLogSlack ? kInf : -kInf;
}

double submultiplicativity_margin(double c, double x, PsiWeight w) {
  if (!(std::isfinite(c) && c > 1.0))
    throw DomainError("submultiplicativity_margin: c must be finite and > 1");
  require_nonneg(x, "submultiplicativity_margin");
  if (x == 0.0) return 0.0;

  const double lp = log_psi(c, w) + log_psi(x, w);
  const double cx = c * x;
  double lq;
  if (std::isfinite(cx)) {
    lq = log_psi(cx, w);
  } else {
    const double lcx = std::log(c) + std::log(x);  // log1p(cx) == lcx to 1e-308 here
    lq = lcx + w.mu * std::sqrt(2.0 * lcx);
  }

  double prod = kInf;
  const double p1 = psi(c, w), p2 = psi(x, w);
  if (std::isfinite(p1) && std::isfinite(p2) && std::isfinite(p1 * p2))
    prod = p1 * p2;
  else if (lp < kLogMax)
    prod = std::exp(lp);

  double q = kInf;
  if (std::isfinite(cx)) {
    const double pq = psi(cx, w);
    if (std::isfinite(pq)) q = pq;
  }
  if (!std::isfinite(q) && lq < kLogMax) q = std::exp(lq);

  if (std::isfinite(prod) && std::isfinite(q)) return prod - q;
  return lp >= lq - kLogSlack ? kInf : -kInf;
}

double composition_margin(double x, const PsiSplit& split) {
  require_nonneg(x, "composition_margin");
  if (x == 0.0) return 0.0;
  const PsiWeight wa(split.a), wb(split.b), wsum(split.sum());

  const double l_inner = log_psi(x, wa);
  const double inner = psi(x, wa);
  const double log1p_inner = std::isfinite(inner) ? std::log1p(inner) : l_inner;
  const double l_lhs = l_inner + split.b * std::sqrt(2.0 * log1p_inner);
  const double exponent = split.a * split.b * split.b / split.c;
  const double l_rhs = exponent + log_psi(x, wsum);

  double lhs = kInf;
  if (std::isfinite(inner)) lhs = psi(inner, wb);

  double rhs = kInf;
  const double factor = std::exp(exponent);
  const double ps = psi(x, wsum);
  if (std::isfinite(factor) && std::isfinite(ps) && std::isfinite(factor * ps))
    rhs = factor * ps;
  else if (l_rhs < kLogMax)
    rhs = std::exp(l_rhs);

  if (std::isfinite(lhs) && std::isfinite(rhs)) return rhs - lhs;
  return l_rhs >= l_lhs - kLogSlack ? kInf : -kInf;
}

PsiSplit default_split(PsiWeight w, double gamma, double T) {
  if (!(std::isfinite(gamma) && gamma > 0.0))
    throw DomainError("default_split: gamma must be finite and > 0");
  if (!(std::isfinite(T) && T > 0.0))
    throw DomainError("default_split: T must be finite and > 0");
  const double m0 = critical_mu(gamma, T);
  if (!(w.mu > m0))
    throw HypothesisError("default_split: weight must exceed gamma*sqrt(T)");
  const double a = (w.mu - m0) / 4.0;
  return PsiSplit(a, (w.mu + m0) / 2.0, a);
}

}  // namespace bsdelab
