#include "bsdelab/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/stats.hpp"

namespace bsdelab {

namespace {
void require_pair(const SolutionField& s1, const SolutionField& s2) {
  if (s1.M != s2.M || s1.d != s2.d || !(s1.grid == s2.grid))
    throw DomainError("solution pair does not live on the same grid/ensemble");
}

void require_lin(const LinearizationField& lin, const SolutionField& s) {
  if (lin.M != s.M || lin.d != s.d || lin.n_steps != s.grid.n_steps)
    throw DomainError("linearization does not match the solution pair");
}

void require_family(const StoppingFamily& family, const SolutionField& s) {
  if (family.M != s.M || family.n_steps != s.grid.n_steps)
    throw DomainError("stopping family does not match the solution");
}
}  // namespace

LinearizationField linearize(const GeneratorSpec& gen, const SolutionField& s1,
                             const SolutionField& s2) {
  require_pair(s1, s2);
  if (!gen.driver) throw DomainError("linearize: empty generator");
  if (!gen.lipschitz)
    throw DomainError("linearize: difference quotients need a Lipschitz driver");
  if (gen.z_dim != s1.d) throw DomainError("linearize: dimension mismatch");

  const int n = s1.grid.n_steps, d = s1.d;
  const std::size_t M = s1.M;
  LinearizationField lin;
  lin.M = M;
  lin.n_steps = n;
  lin.d = d;
  lin.beta_bound = gen.beta;
  lin.gamma_bound = gen.gamma;
  lin.u.resize(M * static_cast<std::size_t>(n));
  lin.v.resize(M * static_cast<std::size_t>(n) * d);

  const std::size_t ys = static_cast<std::size_t>(n + 1);
  const double u_cap = gen.beta * (1.0 + 1e-9) + 1e-300;
  const double v_cap2 = gen.gamma * gen.gamma * (1.0 + 1e-9) + 1e-300;
  constexpr double kQuotientNoise = 32.0 * std::numeric_limits<double>::epsilon();

  double worst = 0.0;
  std::vector<double> zmix(d);
  for (std::size_t m = 0; m < M; ++m) {
    for (int k = 0; k < n; ++k) {
      const double t = s1.grid.time(k);
      const double y1 = s1.Y[m * ys + k], y2 = s2.Y[m * ys + k];
      const double* z1 = s1.Z.data() + (m * static_cast<std::size_t>(n) + k) * d;
      const double* z2 = s2.Z.data() + (m * static_cast<std::size_t>(n) + k) * d;
      const std::span<const double> z1s(z1, static_cast<std::size_t>(d));

      const double fy1 = gen.driver(t, y1, z1s);
      double w_prev = gen.driver(t, y2, z1s);
      const double dy = y1 - y2;
      // Difference quotients cancel catastrophically when the increment is
      // tiny: the numerator carries an absolute rounding floor of order
      // eps * (evaluation scale), so the quotient is only trustworthy to
      // floor/|increment|. Below the floor there is no measurable slope
      // (quotient := 0); above the envelope but inside the uncertainty band
      // the slope is clamped to the envelope; beyond the band the driver
      // really is steeper than declared and we refuse.
      const double dfy = fy1 - w_prev;
      const double floor_y = kQuotientNoise * (std::abs(fy1) + std::abs(w_prev));
      double u = 0.0;
      if (dy != 0.0 && std::abs(dfy) > floor_y) {
        u = dfy / dy;
        if (!(std::abs(u) <= u_cap)) {
          if (std::abs(u) <= gen.beta + floor_y / std::abs(dy))
            u = std::copysign(gen.beta, u);
          else
            throw DomainError("linearize: y-quotient exceeds beta");
        }
      }
      lin.u[m * static_cast<std::size_t>(n) + k] = u;

      for (int j = 0; j < d; ++j) zmix[j] = z1[j];
      double vnorm2 = 0.0;
      double recon = u * dy;
      for (int j = 0; j < d; ++j) {
        zmix[j] = z2[j];
        const double wj = gen.driver(t, y2, std::span<const double>(zmix.data(), d));
        const double dz = z1[j] - z2[j];
        const double dfj = w_prev - wj;
        const double floor_z = kQuotientNoise * (std::abs(w_prev) + std::abs(wj));
        double vj = 0.0;
        if (dz != 0.0 && std::abs(dfj) > floor_z) {
          vj = dfj / dz;
          if (std::abs(vj) > gen.gamma) {
            if (std::abs(vj) <= gen.gamma + floor_z / std::abs(dz))
              vj = std::copysign(gen.gamma, vj);
            else
              throw DomainError("linearize: z-quotient exceeds gamma");
          }
        }
        lin.v[(m * static_cast<std::size_t>(n) + k) * d + j] = vj;
        vnorm2 += vj * vj;
        recon += vj * dz;
        w_prev = wj;
      }
      if (!(vnorm2 <= v_cap2))
        throw DomainError(
            "linearize: Euclidean norm of the z-quotients exceeds gamma (multi-dimensional "
            "kinked drivers are outside this construction)");
      // w_prev is now f(t, y2, z2); the telescoping identity must reconstruct it.
      const double target = fy1 - w_prev;
      const double res = std::abs(target - recon) / (1.0 + std::abs(fy1) + std::abs(w_prev));
      worst = std::max(worst, res);
    }
  }
  lin.max_residual = worst;
  return lin;
}

AdaptedDrift linearization_drift(const LinearizationField& lin) {
  AdaptedDrift q;
  q.d = lin.d;
  q.n_steps = lin.n_steps;
  q.M = lin.M;
  q.bound = lin.gamma_bound;
  q.values = lin.v;
  return q;
}

WindowSchedule window_schedule(double a, double gamma, double T) {
  if (!(std::isfinite(a) && a > 0.0)) throw DomainError("window_schedule: a must be > 0");
  if (!(std::isfinite(gamma) && gamma > 0.0))
    throw DomainError("window_schedule: gamma must be > 0");
  if (!(std::isfinite(T) && T > 0.0)) throw DomainError("window_schedule: T must be > 0");

  WindowSchedule s;
  s.window_length = a * a / (4.0 * gamma * gamma);
  if (T / s.window_length > 1e7)
    throw CapacityError("window_schedule: more than 1e7 windows requested");
  double end = T;
  while (end > 0.0) {
    const double begin = end - s.window_length > 0.0 ? end - s.window_length : 0.0;
    s.windows.push_back({begin, end});
    end = begin;
  }
  return s;
}

DeltaRepReport delta_representation_margin(const SolutionField& s1, const SolutionField& s2,
                                           const LinearizationField& lin,
                                           const StoppingFamily& family,
                                           const PathEnsemble& paths, int t_step,
                                           double tolerance, int basis_degree, double ridge) {
  require_pair(s1, s2);
  require_lin(lin, s1);
  require_family(family, s1);
  if (s1.M != paths.M || s1.d != paths.d || !(s1.grid == paths.grid))
    throw DomainError("delta_representation_margin: ensemble mismatch");
  if (t_step < 0 || t_step > s1.grid.n_steps)
    throw DomainError("delta_representation_margin: t_step out of range");
  if (!(tolerance >= 0.0)) throw DomainError("delta_representation_margin: bad tolerance");

  const int n = s1.grid.n_steps, d = s1.d;
  const std::size_t M = s1.M;
  const std::size_t ys = static_cast<std::size_t>(n + 1);
  const double growth = std::exp(lin.beta_bound * s1.grid.T);

  const AdaptedDrift q = linearization_drift(lin);
  const std::vector<double> pos = brownian_positions(paths);
  const std::size_t pos_stride = static_cast<std::size_t>(n + 1) * d;
  std::vector<double> states(M * static_cast<std::size_t>(d));
  for (std::size_t m = 0; m < M; ++m)
    for (int j = 0; j < d; ++j)
      states[m * d + j] = pos[m * pos_stride + static_cast<std::size_t>(t_step) * d + j];
  const PolynomialBasis basis(d, basis_degree);
  const StepRegression reg(basis, states, M, ridge);

  DeltaRepReport report;
  report.t_step = t_step;
  report.t = s1.grid.time(t_step);
  report.tolerance = tolerance;

  std::vector<int> from(M), to(M);
  std::vector<double> weighted(M), cond(M), margin(M);
  for (std::size_t r = 0; r < family.size(); ++r) {
    const std::vector<int>& stops = family.stop_steps[r];
    for (std::size_t m = 0; m < M; ++m) {
      to[m] = stops[m];
      from[m] = std::min(stops[m], t_step);
    }
    const std::vector<double> I = stochastic_integral(paths, q, from, to);
    for (std::size_t m = 0; m < M; ++m) {
      const double dytau = s1.Y[m * ys + to[m]] - s2.Y[m * ys + to[m]];
      weighted[m] = std::exp(I[m]) * std::abs(dytau);
    }
    reg.fit(weighted, cond);

    LevelMargin lm;
    lm.rule = family.labels[r];
    lm.min_margin = kInf;
    for (std::size_t m = 0; m < M; ++m) {
      const double dyt = s1.Y[m * ys + from[m]] - s2.Y[m * ys + from[m]];
      margin[m] = growth * cond[m] - std::abs(dyt);
      lm.min_margin = std::min(lm.min_margin, margin[m]);
      if (margin[m] < -tolerance) ++lm.pathwise_below_tol;
    }
    const MeanVar mv = mean_var(margin);
    lm.mean_margin = mv.mean;
    lm.std_error = mv.std_error();
    lm.violation = lm.mean_margin < -(tolerance + 3.0 * lm.std_error);
    if (lm.violation) ++report.total_violations;
    report.per_rule.push_back(lm);
  }
  return report;
}

bool UiReport::any_violation() const {
  for (const auto& r : per_rule)
    if (r.young_violations > 0 || r.second_moment_violation || r.psi_split_violations > 0 ||
        r.psi_mean_violation)
      return true;
  return false;
}

UiReport uniform_integrability_margin(const SolutionField& s1, const SolutionField& s2,
                                      const LinearizationField& lin,
                                      const StoppingFamily& family,
                                      const PathEnsemble& paths, double a, int t_step) {
  require_pair(s1, s2);
  require_lin(lin, s1);
  require_family(family, s1);
  if (s1.M != paths.M || s1.d != paths.d || !(s1.grid == paths.grid))
    throw DomainError("uniform_integrability_margin: ensemble mismatch");
  const PsiWeight wa(a);

  const int n = s1.grid.n_steps;
  const std::size_t M = s1.M;
  const std::size_t ys = static_cast<std::size_t>(n + 1);
  const double T = s1.grid.T;
  const double gamma = lin.gamma_bound;
  const double window_len = gamma > 0.0 ? a * a / (4.0 * gamma * gamma) : kInf;
  const double window_begin = window_len >= T ? 0.0 : T - window_len;
  if (t_step < 0 || t_step > n)
    throw DomainError("uniform_integrability_margin: t_step out of range");
  const double t = s1.grid.time(t_step);
  if (t < window_begin - 1e-9 * (1.0 + T))
    throw HypothesisError(
        "uniform_integrability_margin: t is before the uniform-integrability window");

  UiReport report;
  report.a = a;
  report.t_step = t_step;
  report.t = t;
  report.window_begin = window_begin;

  const AdaptedDrift q = linearization_drift(lin);
  const double psi2 = psi(2.0, wa);
  const double tau_len = T - t;
  const double radicand = 1.0 - 2.0 * gamma * gamma * tau_len / (a * a);
  const double moment_bound = 1.0 / std::sqrt(radicand);

  std::vector<int> from(M), to(M);
  std::vector<double> second(M), lhs(M), rhs(M);
  for (std::size_t r = 0; r < family.size(); ++r) {
    const std::vector<int>& stops = family.stop_steps[r];
    for (std::size_t m = 0; m < M; ++m) {
      to[m] = stops[m];
      from[m] = std::min(stops[m], t_step);
    }
    const std::vector<double> I = stochastic_integral(paths, q, from, to);

    UiRuleReport rr;
    rr.rule = family.labels[r];
    rr.second_moment_bound = moment_bound;

    for (std::size_t m = 0; m < M; ++m) {
      const double dytau = std::abs(s1.Y[m * ys + to[m]] - s2.Y[m * ys + to[m]]);
      if (young_gap(I[m], dytau, wa) < 0.0) ++rr.young_violations;
      second[m] = std::exp(I[m] * I[m] / (a * a));

      const double y1 = std::abs(s1.Y[m * ys + to[m]]);
      const double y2 = std::abs(s2.Y[m * ys + to[m]]);
      lhs[m] = psi(dytau, wa);
      rhs[m] = 0.5 * psi2 * (psi(y1, wa) + psi(y2, wa));
      if (lhs[m] > rhs[m] + 1e-12 * (1.0 + rhs[m]) && !(rhs[m] == kInf))
        ++rr.psi_split_violations;
    }
    const MeanVar mv2 = mean_var(second);
    rr.second_moment = mv2.mean;
    rr.second_moment_se = mv2.std_error();
    rr.second_moment_violation = rr.second_moment > moment_bound + 3.0 * rr.second_moment_se;

    const MeanVar mvl = mean_var(lhs), mvr = mean_var(rhs);
    rr.psi_delta_mean = mvl.mean;
    rr.psi_delta_se = mvl.std_error();
    rr.psi_pair_mean = mvr.mean;
    rr.psi_pair_se = mvr.std_error();
    const double band = 3.0 * std::sqrt(mvl.std_error() * mvl.std_error() +
                                        mvr.std_error() * mvr.std_error());
    rr.psi_mean_violation = mvl.mean > mvr.mean + band + 1e-12 * (1.0 + mvr.mean);

    report.per_rule.push_back(rr);
  }
  return report;
}

AgreementReport two_solver_agreement(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                     const TimeGrid& grid, int d, std::size_t M,
                                     std::uint64_t seed_a, std::uint64_t seed_b,
                                     const SolveOptions& opt_a, const SolveOptions& opt_b,
                                     PsiWeight mu, double allowance) {
  if (!(allowance >= 0.0)) throw DomainError("two_solver_agreement: bad allowance");
  const PathEnsemble paths_a = generate_paths(grid, d, M, seed_a);
  const PathEnsemble paths_b = generate_paths(grid, d, M, seed_b);
  const SolutionField sol_a = solve(gen, terminal, paths_a, opt_a);
  const SolutionField sol_b = solve(gen, terminal, paths_b, opt_b);

  AgreementReport rep;
  rep.y0_a = sol_a.y0();
  rep.y0_b = sol_b.y0();
  rep.se_a = sol_a.diagnostics.y0_std_error;
  rep.se_b = sol_b.diagnostics.y0_std_error;
  rep.delta = std::abs(rep.y0_a - rep.y0_b);
  rep.combined_se = std::hypot(rep.se_a, rep.se_b);
  rep.allowance = allowance;
  rep.pass = rep.delta <= 3.0 * rep.combined_se + allowance;

  const int n = grid.n_steps;
  const std::size_t ys = static_cast<std::size_t>(n + 1);
  std::vector<double> col(M);
  for (int k = 0; k <= n; ++k) {
    for (std::size_t m = 0; m < M; ++m) col[m] = sol_a.Y[m * ys + k];
    const double ma = mean_var(col).mean;
    for (std::size_t m = 0; m < M; ++m) col[m] = sol_b.Y[m * ys + k];
    const double mb = mean_var(col).mean;
    rep.max_step_mean_diff = std::max(rep.max_step_mean_diff, std::abs(ma - mb));
  }

  // Integrability of the data for the chosen gauge, on ensemble a.
  double f0_mass = 0.0;
  for (int k = 0; k < n; ++k) f0_mass += std::abs(gen.f0(grid.time(k))) * grid.dt();
  const std::vector<double> pos = brownian_positions(paths_a);
  const std::size_t pos_stride = static_cast<std::size_t>(n + 1) * d;
  std::vector<double> vals(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double xi = terminal.xi(std::span<const double>(
        pos.data() + m * pos_stride + static_cast<std::size_t>(n) * d, d));
    vals[m] = psi(std::abs(xi) + f0_mass, mu);
  }
  const MeanVar mv = mean_var(vals);
  rep.psi_moment = mv.mean;
  rep.psi_moment_se = mv.std_error();
  rep.integrability_warning = !std::isfinite(mv.mean);
  return rep;
}

}  // namespace bsdelab
