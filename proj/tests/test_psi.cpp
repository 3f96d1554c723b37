#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bsdelab/errors.hpp"
#include "bsdelab/psi.hpp"
#include "bsdelab/rng.hpp"

using namespace bsdelab;

namespace {

// log-uniform on [lo, hi]
double log_uniform(SplitMix64& rng, double lo, double hi) {
  return lo * std::exp(rng.next_uniform() * std::log(hi / lo));
}

constexpr int kSweep = 20000;

}  // namespace

TEST_CASE("psi closed-form values") {
  // Reference values carried at 40 digits and rounded to nearest double.
  CHECK(psi(0.0, PsiWeight(1.0)) == 0.0);
  CHECK(psi(0.0, PsiWeight(3.7)) == 0.0);
  CHECK(psi(1.0, PsiWeight(1.0)) == doctest::Approx(3.245956352704756).epsilon(1e-14));
  const double em1 = std::exp(1.0) - 1.0;  // log1p collapses to exactly 1
  CHECK(psi(em1, PsiWeight(1.0)) == doctest::Approx(7.067723381764989).epsilon(1e-14));
  CHECK(psi(em1, PsiWeight(1.0)) == doctest::Approx(em1 * std::exp(std::sqrt(2.0))));
  CHECK(psi(2.0, PsiWeight(1.0)) == doctest::Approx(8.806155696686234).epsilon(1e-14));
  CHECK(psi(3.0, PsiWeight(1.0)) == doctest::Approx(15.858751784281293).epsilon(1e-14));
}

TEST_CASE("psi monotone, convex, saturating") {
  SplitMix64 rng{101};
  for (int i = 0; i < kSweep; ++i) {
    const double mu = log_uniform(rng, 1e-3, 5.0);
    const double x = log_uniform(rng, 1e-8, 1e6);
    const double h = x * 1e-3;
    const PsiWeight w(mu);
    CHECK(psi(x, w) > 0.0);
    CHECK(psi(x + h, w) >= psi(x, w));                      // increasing in x
    CHECK(psi(x, PsiWeight(mu * 1.01)) >= psi(x, w));       // increasing in mu
    // midpoint convexity
    const double mid = psi(0.5 * (x + h + x), w);
    CHECK(0.5 * (psi(x, w) + psi(x + h, w)) >= mid * (1.0 - 1e-12));
  }
  // saturation: +inf value, finite log
  CHECK(psi(1e300, PsiWeight(5.0)) == kInf);
  CHECK(std::isfinite(log_psi(1e300, PsiWeight(5.0))));
  CHECK(log_psi(0.0, PsiWeight(1.0)) == -kInf);
}

TEST_CASE("log_psi agrees with psi in the representable range") {
  SplitMix64 rng{102};
  for (int i = 0; i < kSweep; ++i) {
    const double mu = log_uniform(rng, 1e-3, 5.0);
    const double x = log_uniform(rng, 1e-8, 1e6);
    const double p = psi(x, PsiWeight(mu));
    REQUIRE(std::isfinite(p));
    CHECK(std::log(p) == doctest::Approx(log_psi(x, PsiWeight(mu))).epsilon(1e-12));
  }
}

TEST_CASE("young gap closed forms") {
  CHECK(young_gap(2.0, 3.0, PsiWeight(1.0)) ==
        doctest::Approx(102.40309439520972).epsilon(1e-14));
  // y = 0: gap collapses to exp(x^2/2)
  CHECK(young_gap(1.0, 0.0, PsiWeight(1.0)) ==
        doctest::Approx(1.6487212707001281).epsilon(1e-14));
  CHECK(young_gap(-1.0, 0.0, PsiWeight(1.0)) ==
        doctest::Approx(1.6487212707001281).epsilon(1e-14));
}

TEST_CASE("young gap nonnegative over a sign-symmetric sweep") {
  SplitMix64 rng{103};
  long long bad = 0;
  for (int i = 0; i < kSweep; ++i) {
    const double mu = log_uniform(rng, 1e-3, 5.0);
    double x = log_uniform(rng, 1e-3, 20.0);
    if (rng.next_uniform() < 0.5) x = -x;
    const double y = (i % 7 == 0) ? 0.0 : log_uniform(rng, 1e-8, 1e6);
    if (!(young_gap(x, y, PsiWeight(mu)) >= 0.0)) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("young gap saturating regimes keep the right sign") {
  // exp(2 mu^2) overflows alone (mu = 30), inequality still reports >= 0
  CHECK(young_gap(3.0, 5.0, PsiWeight(30.0)) >= 0.0);
  // huge x: lhs and first rhs term both overflow, log-level decision
  CHECK(young_gap(700.0, 1.0, PsiWeight(2.0)) >= 0.0);
  CHECK(young_gap(-700.0, 1e6, PsiWeight(2.0)) >= 0.0);
  // huge y with tiny mu: rhs psi term dominates at +inf
  CHECK(young_gap(1.0, 1e308, PsiWeight(0.5)) >= 0.0);
}

TEST_CASE("submultiplicativity closed forms and sweep") {
  CHECK(submultiplicativity_margin(2.0, 1.0, PsiWeight(1.0)) ==
        doctest::Approx(19.778241329879625).epsilon(1e-14));
  CHECK(submultiplicativity_margin(1.5, 10.0, PsiWeight(0.7)) ==
        doctest::Approx(101.24161287665711).epsilon(1e-14));

  SplitMix64 rng{104};
  long long bad = 0;
  for (int i = 0; i < kSweep; ++i) {
    const double mu = log_uniform(rng, 1e-3, 5.0);
    const double c = 1.0 + log_uniform(rng, 1e-6, 4.0);
    const double x = (i % 11 == 0) ? 0.0 : log_uniform(rng, 1e-8, 1e6);
    if (!(submultiplicativity_margin(c, x, PsiWeight(mu)) >= 0.0)) ++bad;
  }
  CHECK(bad == 0);
  // saturating product: both factors overflow, decided at log level
  CHECK(submultiplicativity_margin(1e4, 1e300, PsiWeight(5.0)) >= 0.0);
  CHECK_THROWS_AS(submultiplicativity_margin(1.0, 2.0, PsiWeight(1.0)), DomainError);
  CHECK_THROWS_AS(submultiplicativity_margin(0.5, 2.0, PsiWeight(1.0)), DomainError);
}

TEST_CASE("composition closed forms and sweep") {
  CHECK(composition_margin(1.0, PsiSplit(1.0, 1.0, 1.0)) ==
        doctest::Approx(75.187346428555876).epsilon(1e-14));
  CHECK(composition_margin(100.0, PsiSplit(0.5, 1.2, 0.3)) ==
        doctest::Approx(449470.88100831223).epsilon(1e-13));

  SplitMix64 rng{105};
  long long bad = 0;
  for (int i = 0; i < kSweep; ++i) {
    const PsiSplit s(log_uniform(rng, 1e-3, 5.0), log_uniform(rng, 1e-3, 5.0),
                     log_uniform(rng, 1e-3, 5.0));
    const double x = (i % 13 == 0) ? 0.0 : log_uniform(rng, 1e-8, 1e6);
    if (!(composition_margin(x, s) >= 0.0)) ++bad;
  }
  CHECK(bad == 0);
  // inner psi saturates: comparison survives at log level
  CHECK(composition_margin(1e305, PsiSplit(2.0, 1.0, 1.0)) >= 0.0);
}

TEST_CASE("critical weight and default split") {
  CHECK(critical_mu(2.0, 0.25) == doctest::Approx(1.0));
  CHECK(critical_mu(0.0, 7.0) == 0.0);

  const PsiSplit s = default_split(PsiWeight(2.0), 1.0, 1.0);
  CHECK(s.a == doctest::Approx(0.25));
  CHECK(s.c == doctest::Approx(0.25));
  CHECK(s.b == doctest::Approx(1.5));
  CHECK(s.sum() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.b > critical_mu(1.0, 1.0));

  CHECK_THROWS_AS(default_split(PsiWeight(1.0), 1.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(default_split(PsiWeight(0.5), 1.0, 1.0), HypothesisError);
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(PsiWeight(0.0), DomainError);
  CHECK_THROWS_AS(PsiWeight(-1.0), DomainError);
  CHECK_THROWS_AS(PsiWeight(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(PsiSplit(1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(PsiSplit(-1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(psi(-1.0, PsiWeight(1.0)), DomainError);
  CHECK_THROWS_AS(log_psi(-2.0, PsiWeight(1.0)), DomainError);
  CHECK_THROWS_AS(young_gap(1.0, -1.0, PsiWeight(1.0)), DomainError);
}
