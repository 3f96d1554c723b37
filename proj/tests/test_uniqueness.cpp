#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bsdelab/catalog.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/uniqueness.hpp"

using namespace bsdelab;

namespace {

struct Pair {
  GeneratorSpec gen;
  TerminalSpec xi;
  PathEnsemble paths;
  SolutionField s1, s2;
};

// Same instance, same ensemble, two basis degrees: delta Y is pure
// regression-bias noise, which is what the margin checks expect to absorb.
Pair solved_pair(const std::string& driver, double beta, double gamma,
                 const std::string& terminal, double c, int n, std::size_t M,
                 std::uint64_t seed, int deg1 = 4, int deg2 = 3) {
  GeneratorSpec gen = make_catalog_generator(driver, beta, gamma, "zero", 0.0);
  TerminalSpec xi = make_catalog_terminal(terminal, c, 1.0);
  PathEnsemble paths = generate_paths(TimeGrid(1.0, n), 1, M, seed);
  SolveOptions o1, o2;
  o1.basis_degree = deg1;
  o2.basis_degree = deg2;
  SolutionField s1 = solve(gen, xi, paths, o1);
  SolutionField s2 = solve(gen, xi, paths, o2);
  return Pair{std::move(gen), std::move(xi), std::move(paths), std::move(s1),
              std::move(s2)};
}

}  // namespace

TEST_CASE("linearizing an affine driver recovers its slopes") {
  const Pair p = solved_pair("affine", 0.5, 0.25, "abs_w_t", 1.0, 8, 3000, 101);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s2);
  CHECK(lin.max_residual < 1e-12);
  CHECK(lin.beta_bound == 0.5);
  CHECK(lin.gamma_bound == 0.25);
  for (std::size_t m = 0; m < p.s1.M; ++m)
    for (int k = 0; k < 8; ++k) {
      const double dy = p.s1.y(m, k) - p.s2.y(m, k);
      const double dz = p.s1.z(m, k, 0) - p.s2.z(m, k, 0);
      if (dy != 0.0) REQUIRE(lin.u_at(m, k) == doctest::Approx(0.5).epsilon(1e-9));
      if (dz != 0.0) REQUIRE(lin.v_at(m, k, 0) == doctest::Approx(0.25).epsilon(1e-9));
    }
}

TEST_CASE("linearizing the kinked driver stays inside the gamma ball") {
  const Pair p = solved_pair("gamma_abs_z", 0.0, 0.5, "w_t", 1.0, 8, 3000, 103);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s2);
  CHECK(lin.max_residual < 1e-12);
  for (std::size_t m = 0; m < p.s1.M; ++m)
    for (int k = 0; k < 8; ++k) {
      REQUIRE(lin.u_at(m, k) == 0.0);  // driver ignores y
      REQUIRE(std::abs(lin.v_at(m, k, 0)) <= 0.5 * (1.0 + 1e-9));
    }
}

TEST_CASE("a pair with itself linearizes to zero") {
  const Pair p = solved_pair("mixed", 0.5, 0.25, "abs_w_t", 1.0, 6, 1000, 107);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s1);
  CHECK(lin.max_residual == 0.0);
  for (double u : lin.u) REQUIRE(u == 0.0);
  for (double v : lin.v) REQUIRE(v == 0.0);

  const AdaptedDrift q = linearization_drift(lin);
  CHECK(q.bound == 0.25);
  CHECK(q.n_steps == 6);
}

TEST_CASE("linearize validates its inputs") {
  const Pair p = solved_pair("mixed", 0.5, 0.25, "abs_w_t", 1.0, 6, 1000, 109);
  const Pair q = solved_pair("mixed", 0.5, 0.25, "abs_w_t", 1.0, 12, 1000, 109);
  CHECK_THROWS_AS(linearize(p.gen, p.s1, q.s1), DomainError);  // grid mismatch

  const GeneratorSpec loose = GeneratorSpec::make(
      0.5, 0.25, [](double) { return 0.0; },
      [](double, double y, std::span<const double> z) { return 0.5 * y + 0.25 * z[0]; },
      /*lipschitz=*/false);
  CHECK_THROWS_AS(linearize(loose, p.s1, p.s2), DomainError);
}

TEST_CASE("window schedule walks backward from the horizon") {
  const WindowSchedule w1 = window_schedule(1.0, 1.0, 1.0);
  CHECK(w1.window_length == doctest::Approx(0.25));
  REQUIRE(w1.windows.size() == 4);
  CHECK(w1.windows[0].begin == doctest::Approx(0.75));
  CHECK(w1.windows[0].end == 1.0);
  CHECK(w1.windows[3].begin == 0.0);
  for (std::size_t i = 0; i + 1 < w1.windows.size(); ++i)
    CHECK(w1.windows[i].begin == doctest::Approx(w1.windows[i + 1].end));

  const WindowSchedule w2 = window_schedule(2.0, 1.0, 0.5);
  REQUIRE(w2.windows.size() == 1);
  CHECK(w2.windows[0].begin == 0.0);
  CHECK(w2.windows[0].end == 0.5);

  const WindowSchedule w3 = window_schedule(1.0, 2.0, 1.0);
  CHECK(w3.windows.size() == 16);
  CHECK(w3.window_length == doctest::Approx(1.0 / 16.0));

  CHECK_THROWS_AS(window_schedule(-1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(window_schedule(1.0, 0.0, 1.0), DomainError);  // needs gamma > 0
  CHECK_THROWS_AS(window_schedule(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("representation margin vanishes for identical solutions") {
  const Pair p = solved_pair("affine", 0.5, 0.25, "abs_w_t", 1.0, 8, 2000, 113);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s1);
  const StoppingFamily fam = StoppingFamily::deterministic(p.paths.grid, p.paths.M);
  const DeltaRepReport rep =
      delta_representation_margin(p.s1, p.s1, lin, fam, p.paths, 0);
  CHECK(rep.total_violations == 0);
  for (const LevelMargin& lm : rep.per_rule) {
    CHECK(lm.mean_margin == 0.0);
    CHECK(lm.min_margin == 0.0);
  }
}

TEST_CASE("representation margin absorbs regression noise on a genuine pair") {
  const Pair p = solved_pair("affine", 0.5, 0.25, "abs_w_t", 1.0, 8, 8000, 127);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s2);
  const StoppingFamily fam = StoppingFamily::deterministic(p.paths.grid, p.paths.M);
  for (int t_step : {0, 4}) {
    const DeltaRepReport rep =
        delta_representation_margin(p.s1, p.s2, lin, fam, p.paths, t_step);
    CHECK(rep.total_violations == 0);
    CHECK(rep.t == doctest::Approx(t_step / 8.0));
  }
}

TEST_CASE("representation margin flags a corrupted pair") {
  Pair p = solved_pair("affine", 0.5, 0.25, "abs_w_t", 1.0, 8, 4000, 131);
  // Shift Y2 by 1 - t/T: vanishes at the horizon, O(1) at t = 0. The pair
  // still linearizes exactly, but Y2 no longer solves the equation.
  for (std::size_t m = 0; m < p.s2.M; ++m)
    for (int k = 0; k <= 8; ++k)
      p.s2.Y[m * 9 + k] += 1.0 - p.paths.grid.time(k) / p.paths.grid.T;
  const LinearizationField lin = linearize(p.gen, p.s1, p.s2);
  const StoppingFamily fam = StoppingFamily::deterministic(p.paths.grid, p.paths.M);
  const DeltaRepReport rep = delta_representation_margin(p.s1, p.s2, lin, fam, p.paths, 0);
  CHECK(rep.total_violations > 0);
}

TEST_CASE("uniform integrability margins inside the last window") {
  // gamma = 0.25, a = 0.0625: window length = a^2/(4 gamma^2) = 1/64
  const Pair p = solved_pair("affine", 0.5, 0.25, "abs_w_t", 1.0, 64, 4000, 137, 3, 2);
  const LinearizationField lin = linearize(p.gen, p.s1, p.s2);
  StoppingFamily fam = StoppingFamily::deterministic(p.paths.grid, p.paths.M);

  const UiReport rep =
      uniform_integrability_margin(p.s1, p.s2, lin, fam, p.paths, 0.0625, 63);
  CHECK(rep.window_begin == doctest::Approx(63.0 / 64.0));
  CHECK(!rep.any_violation());
  for (const UiRuleReport& r : rep.per_rule) {
    CHECK(r.young_violations == 0);
    CHECK(r.psi_split_violations == 0);
    CHECK(r.second_moment_bound <= std::numbers::sqrt2 * (1.0 + 1e-12));
    CHECK(r.second_moment <= r.second_moment_bound + 3.0 * r.second_moment_se + 1e-12);
  }

  // earlier than the admissible window: hypothesis fails
  CHECK_THROWS_AS(uniform_integrability_margin(p.s1, p.s2, lin, fam, p.paths, 0.0625, 60),
                  HypothesisError);
}

TEST_CASE("two runs of the same instance agree") {
  const TimeGrid grid(1.0, 25);
  SolveOptions a, b;
  a.basis_degree = 3;
  b.basis_degree = 4;

  // f = 0, xi = c: both runs give c exactly
  const GeneratorSpec zero = make_catalog_generator("zero", 0.0, 0.0, "zero", 0.0);
  const TerminalSpec c2 = make_catalog_terminal("constant", 2.0, 1.0);
  const AgreementReport r0 =
      two_solver_agreement(zero, c2, grid, 1, 5000, 51, 52, a, b, PsiWeight(1.0));
  CHECK(r0.pass);
  CHECK(r0.delta == 0.0);
  CHECK(r0.y0_a == 2.0);
  CHECK(r0.max_step_mean_diff == 0.0);
  CHECK(!r0.integrability_warning);

  // f = gamma |z|, xi = W_T: closed-form oracle 0.5
  const GeneratorSpec kink = make_catalog_generator("gamma_abs_z", 0.0, 0.5, "zero", 0.0);
  const TerminalSpec wt = make_catalog_terminal("w_t", 1.0, 1.0);
  const AgreementReport r1 =
      two_solver_agreement(kink, wt, grid, 1, 20000, 53, 54, a, b, PsiWeight(1.0));
  CHECK(r1.pass);
  CHECK(std::abs(r1.y0_a - 0.5) < 2e-2);
  CHECK(std::abs(r1.y0_b - 0.5) < 2e-2);
  CHECK(r1.combined_se > 0.0);
  CHECK(r1.psi_moment > 0.0);
}
