#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bsdelab/catalog.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/solver.hpp"

using namespace bsdelab;

namespace {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E[ xi^{n,p} ] for xi = W_T ~ N(0, T)
double truncated_gaussian_mean(int n, int p, double T) {
  const double s = std::sqrt(T);
  const double nn = n / s, pp = p / s;
  return s * (normal_pdf(pp) - normal_pdf(nn)) + n * (1.0 - normal_cdf(nn)) -
         p * (1.0 - normal_cdf(pp));
}

}  // namespace

TEST_CASE("zero driver with constant terminal solves exactly") {
  const GeneratorSpec gen = make_catalog_generator("zero", 0.0, 0.0, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("constant", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 12), 1, 2000, 42);
  const SolutionField sol = solve(gen, xi, paths);

  for (std::size_t m = 0; m < sol.M; ++m) {
    for (int k = 0; k <= 12; ++k) REQUIRE(sol.y(m, k) == 1.0);
    for (int k = 0; k < 12; ++k) REQUIRE(sol.z(m, k, 0) == 0.0);
  }
  CHECK(sol.y0() == 1.0);
  CHECK(sol.diagnostics.max_fixed_point_residual == 0.0);
}

TEST_CASE("deterministic linear driver matches the theta recursion") {
  const double beta = 0.5, T = 1.0;
  const int n = 20;
  const GeneratorSpec gen = make_catalog_generator("linear_y", beta, 0.0, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("constant", 1.0, T);
  const PathEnsemble paths = generate_paths(TimeGrid(T, n), 1, 2000, 7);

  for (double theta : {0.5, 1.0}) {
    SolveOptions opt;
    opt.theta = theta;
    const SolutionField sol = solve(gen, xi, paths, opt);
    const double dt = T / n;
    double y = 1.0;
    for (int k = 0; k < n; ++k) y *= (1.0 + (1.0 - theta) * beta * dt) / (1.0 - theta * beta * dt);
    CHECK(sol.y0() == doctest::Approx(y).epsilon(1e-9));
    // the solution is spatially constant: every path carries the same value
    for (std::size_t m = 0; m < sol.M; ++m) REQUIRE(sol.y(m, 3) == sol.y(0, 3));
    for (std::size_t m = 0; m < sol.M; ++m) REQUIRE(sol.z(m, 5, 0) == 0.0);
  }
}

TEST_CASE("gamma |z| driver with constant terminal stays put") {
  const GeneratorSpec gen = make_catalog_generator("gamma_abs_z", 0.0, 0.5, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("constant", 2.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 8), 1, 1500, 3);
  const SolutionField sol = solve(gen, xi, paths);
  for (std::size_t m = 0; m < sol.M; ++m) {
    REQUIRE(sol.y(m, 0) == 2.0);
    REQUIRE(sol.z(m, 4, 0) == 0.0);
  }
}

TEST_CASE("kinked driver with linear terminal: closed-form value and control") {
  // f = gamma |z|, xi = W_T: Y_0 = gamma T, Z = 1
  const double gamma = 0.5;
  const GeneratorSpec gen = make_catalog_generator("gamma_abs_z", 0.0, gamma, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 50), 1, 20000, 11);
  SolveOptions opt;
  opt.basis_degree = 2;
  const SolutionField sol = solve(gen, xi, paths, opt);
  CHECK(std::abs(sol.y0() - gamma) < 3e-2);

  double z_rms_err = 0.0;
  for (std::size_t m = 0; m < sol.M; ++m) {
    const double d = sol.z(m, 25, 0) - 1.0;
    z_rms_err += d * d;
  }
  CHECK(std::sqrt(z_rms_err / static_cast<double>(sol.M)) < 5e-2);
}

TEST_CASE("martingale instance is centered") {
  const GeneratorSpec gen = make_catalog_generator("linear_y", 0.5, 0.0, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 25), 1, 20000, 13);
  const SolutionField sol = solve(gen, xi, paths);
  CHECK(std::abs(sol.y0()) < 3.0 * sol.diagnostics.y0_std_error + 0.01);
}

TEST_CASE("solver runs are reproducible and thread invariant") {
  const GeneratorSpec gen = make_catalog_generator("mixed", 0.5, 0.25, "constant", 0.5);
  const TerminalSpec xi = make_catalog_terminal("abs_w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 10), 1, 5000, 17);

  const int saved = max_threads();
  set_max_threads(1);
  const SolutionField a = solve(gen, xi, paths);
  set_max_threads(4);
  const SolutionField b = solve(gen, xi, paths);
  set_max_threads(saved);
  CHECK(a.Y == b.Y);
  CHECK(a.Z == b.Z);
}

TEST_CASE("inactive truncation reproduces the plain solve bit-for-bit") {
  const GeneratorSpec gen = make_catalog_generator("mixed", 0.5, 0.25, "constant", 0.5);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 10), 1, 5000, 19);

  const SolutionField plain = solve(gen, xi, paths);
  const SolutionField trunc = solve_truncated(gen, xi, TruncationIndex(8, 8), paths);
  REQUIRE(plain.Y.size() == trunc.Y.size());
  for (std::size_t i = 0; i < plain.Y.size(); ++i) REQUIRE(plain.Y[i] == trunc.Y[i]);
  for (std::size_t i = 0; i < plain.Z.size(); ++i) REQUIRE(plain.Z[i] == trunc.Z[i]);
}

TEST_CASE("symmetric truncation flips sign with the instance") {
  // odd driver + odd terminal + n = p: negating the terminal negates (Y, Z)
  const GeneratorSpec gen = make_catalog_generator("affine", 0.5, 0.25, "zero", 0.0);
  const TerminalSpec xi_pos = make_catalog_terminal("w_t", 1.0, 1.0);
  const TerminalSpec xi_neg = make_catalog_terminal("w_t", -1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 8), 1, 4000, 23);

  const SolutionField pos = solve_truncated(gen, xi_pos, TruncationIndex(2, 2), paths);
  const SolutionField neg = solve_truncated(gen, xi_neg, TruncationIndex(2, 2), paths);
  for (std::size_t i = 0; i < pos.Y.size(); ++i) REQUIRE(pos.Y[i] == -neg.Y[i]);
  for (std::size_t i = 0; i < pos.Z.size(); ++i) REQUIRE(pos.Z[i] == -neg.Z[i]);
}

TEST_CASE("truncated terminal mean matches the clipped-gaussian formula") {
  const GeneratorSpec gen = make_catalog_generator("zero", 0.0, 0.0, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 20), 1, 20000, 29);
  const SolutionField sol = solve_truncated(gen, xi, TruncationIndex(1, 2), paths);
  const double target = truncated_gaussian_mean(1, 2, 1.0);
  CHECK(std::abs(sol.y0() - target) < 3.0 * sol.diagnostics.y0_std_error + 5e-3);
}

TEST_CASE("comparison solve dominates the truncated solution at t = 0") {
  const GeneratorSpec gen = make_catalog_generator("gamma_abs_z", 0.0, 0.5, "constant", 0.25);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 20), 1, 20000, 31);
  const TruncationIndex idx(1, 1);
  const SolutionField trunc = solve_truncated(gen, xi, idx, paths);
  const SolutionField cmp = solve_comparison(gen, xi, idx, paths);
  CHECK(std::abs(trunc.y0()) <= cmp.y0() + 1e-3);
}

TEST_CASE("sign drift extraction") {
  const GeneratorSpec gen = make_catalog_generator("gamma_abs_z", 0.0, 0.5, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 6), 1, 1000, 37);
  const SolutionField sol = solve(gen, xi, paths);
  const AdaptedDrift q = extract_sign_drift(sol, 0.5);
  CHECK(q.bound == 0.5);
  for (std::size_t m = 0; m < sol.M; ++m)
    for (int k = 0; k < 6; ++k) {
      const double z = sol.z(m, k, 0);
      const double expected = z > 0.0 ? 0.5 : (z < 0.0 ? -0.5 : 0.0);
      REQUIRE(q.at(m, k, 0) == expected);
    }

  SolutionField two{TimeGrid(1.0, 6), 2, 4, {}, {}, {}};
  two.Y.assign(4 * 7, 0.0);
  two.Z.assign(4 * 6 * 2, 0.0);
  CHECK_THROWS_AS(extract_sign_drift(two, 0.5), DomainError);
}

TEST_CASE("solver input validation") {
  const GeneratorSpec gen = make_catalog_generator("linear_y", 4.0, 0.0, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("constant", 1.0, 1.0);
  const PathEnsemble coarse = generate_paths(TimeGrid(1.0, 2), 1, 1000, 41);

  SolveOptions implicit_opt;
  implicit_opt.theta = 1.0;  // theta*beta*dt = 2
  CHECK_THROWS_AS(solve(gen, xi, coarse, implicit_opt), StepSizeError);

  SolveOptions bad_theta;
  bad_theta.theta = 1.5;
  CHECK_THROWS_AS(solve(gen, xi, coarse, bad_theta), DomainError);

  // not enough paths for the basis (10 per basis function required)
  const GeneratorSpec gentle = make_catalog_generator("linear_y", 0.5, 0.0, "zero", 0.0);
  const PathEnsemble tiny = generate_paths(TimeGrid(1.0, 2), 1, 20, 43);
  CHECK_THROWS_AS(solve(gentle, xi, tiny), DomainError);

  // unflagged non-Lipschitz drivers need the explicit opt-in
  const GeneratorSpec loose = GeneratorSpec::make(
      0.5, 0.0, [](double) { return 0.0; },
      [](double, double y, std::span<const double>) { return 0.5 * y; }, /*lipschitz=*/false);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 4), 1, 1000, 47);
  CHECK_THROWS_AS(solve(loose, xi, paths), DomainError);
  SolveOptions optin;
  optin.allow_non_lipschitz = true;
  CHECK(solve(loose, xi, paths, optin).y0() == doctest::Approx(std::exp(0.5)).epsilon(1e-3));

  // dimension mismatch
  const GeneratorSpec gen2 =
      make_catalog_generator("linear_y", 0.5, 0.0, "zero", 0.0, /*z_dim=*/2);
  CHECK_THROWS_AS(solve(gen2, xi, paths), DomainError);

  GeneratorSpec empty;
  CHECK_THROWS_AS(solve(empty, xi, paths), DomainError);
}

TEST_CASE("two-dimensional noise solves the affine instance") {
  const GeneratorSpec gen = make_catalog_generator("affine", 0.5, 0.25, "zero", 0.0, 2);
  // terminal reads only the first coordinate => same oracle as d = 1
  const TerminalSpec xi = make_catalog_terminal("w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 20), 2, 20000, 53);
  SolveOptions opt;
  opt.basis_degree = 2;
  const SolutionField sol = solve(gen, xi, paths, opt);
  const double oracle = *oracle_y0("affine", "zero", 0, 0.5, 0.25, "w_t", 1.0, 1.0);
  CHECK(std::abs(sol.y0() - oracle) < 3.0 * sol.diagnostics.y0_std_error + 0.02);
}
