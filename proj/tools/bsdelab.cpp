// Command-line front end: each subcommand loads one ExperimentConfig, runs one
// experiment, writes CSV reports plus a manifest that reproduces the run
// byte-for-byte when fed back through --config.
//
// Exit codes: 0 success, 1 usage/config/hypothesis errors, 2 a checked
// invariant or acceptance margin was violated.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bsdelab/catalog.hpp"
#include "bsdelab/config.hpp"
#include "bsdelab/csv.hpp"
#include "bsdelab/ensemble.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/estimates.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/psi.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/solver.hpp"
#include "bsdelab/stats.hpp"
#include "bsdelab/uniqueness.hpp"
#include "bsdelab/version.hpp"

using namespace bsdelab;

namespace {

struct Run {
  ExperimentConfig cfg;
  std::string out_dir;
};

double log_uniform(SplitMix64& g, double lo, double hi) {
  return lo * std::exp(g.next_uniform() * std::log(hi / lo));
}

GeneratorSpec config_generator(const ExperimentConfig& c) {
  return make_catalog_generator(c.driver, c.beta, c.gamma, c.f0, c.f0_value, c.d, c.T);
}

TerminalSpec config_terminal(const ExperimentConfig& c) {
  return make_catalog_terminal(c.terminal, c.terminal_c, c.T);
}

SolveOptions config_options(const ExperimentConfig& c) {
  SolveOptions o;
  o.basis_degree = c.basis_degree;
  o.theta = c.theta;
  o.fixed_point_tol = c.tol;
  o.max_fixed_point_iter = c.max_iter;
  o.ridge = c.ridge;
  return o;
}

// xi(W_T) per path.
std::vector<double> sample_terminal(const PathEnsemble& paths, const TerminalSpec& xi) {
  const std::vector<double> pos = brownian_positions(paths);
  const std::size_t row = static_cast<std::size_t>(paths.grid.n_steps + 1) * paths.d;
  std::vector<double> out(paths.M);
  for (std::size_t m = 0; m < paths.M; ++m) {
    std::span<const double> wT{pos.data() + m * row + row - paths.d,
                               static_cast<std::size_t>(paths.d)};
    out[m] = xi.xi(wT);
  }
  return out;
}

StoppingFamily horizon_rule(const TimeGrid& grid, std::size_t M) {
  StoppingFamily f;
  f.n_steps = grid.n_steps;
  f.M = M;
  f.labels = {"horizon"};
  f.stop_steps = {std::vector<int>(M, grid.n_steps)};
  return f;
}

int run_psi_check(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  CsvWriter csv(run.out_dir + "/psi_check.csv");
  csv.header({"check", "x1", "x2", "a", "b", "c", "margin", "violation"});

  SplitMix64 g{c.psi_seed};
  const double pm = c.psi_param_max, xm = c.psi_x_max;
  long long violations = 0;
  std::uint64_t rows = 0;

  const auto emit = [&](const char* check, double x1, double x2, double a, double b,
                        double cc, double margin) {
    const bool bad = !(margin >= 0.0);
    if (bad) ++violations;
    csv.row({std::string(check), x1, x2, a, b, cc, margin, bad});
    ++rows;
  };

  for (std::uint64_t i = 0; i < c.psi_samples; ++i) {
    const double mu = log_uniform(g, 1e-3, pm);
    double x = log_uniform(g, 1e-3, 20.0);
    if (g.next() & 1) x = -x;
    const double y = (i % 1000 == 0) ? 0.0 : log_uniform(g, 1e-8, xm);
    emit("young", x, y, mu, 0.0, 0.0, young_gap(x, y, PsiWeight(mu)));
  }
  for (std::uint64_t i = 0; i < c.psi_samples; ++i) {
    const double mu = log_uniform(g, 1e-3, pm);
    const double mult = 1.0 + log_uniform(g, 1e-6, pm);
    const double x = (i % 1000 == 0) ? 0.0 : log_uniform(g, 1e-8, xm);
    emit("submultiplicative", mult, x, mu, 0.0, 0.0,
         submultiplicativity_margin(mult, x, PsiWeight(mu)));
  }
  for (std::uint64_t i = 0; i < c.psi_samples; ++i) {
    const PsiSplit split(log_uniform(g, 1e-3, pm), log_uniform(g, 1e-3, pm),
                         log_uniform(g, 1e-3, pm));
    const double x = (i % 1000 == 0) ? 0.0 : log_uniform(g, 1e-8, xm);
    emit("composition", x, 0.0, split.a, split.b, split.c, composition_margin(x, split));
  }
  csv.flush();

  std::cout << "psi-check: " << rows << " margin rows, " << violations << " violations\n";
  return violations == 0 ? 0 : 2;
}

int run_gauss_check(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const TimeGrid grid(c.T, c.n_steps);
  const PathEnsemble paths = generate_paths(grid, c.d, c.M, c.seed);
  std::vector<double> q(c.d, 0.0);
  q[0] = c.gamma;
  const AdaptedDrift drift = AdaptedDrift::constant(paths, q);

  const GaussMomentReport rep =
      gauss_moment_check(paths, drift, PsiWeight(c.mu), c.from_step);
  CsvWriter csv(run.out_dir + "/gauss_check.csv");
  csv.header({"t", "mu", "drift_bound", "estimate", "std_error", "bound", "violation"});
  csv.row({rep.t, rep.mu, rep.drift_bound, rep.estimate, rep.std_error, rep.bound,
           rep.violation});
  csv.flush();

  const std::vector<double> w = girsanov_weight(paths, drift, 0, grid.n_steps);
  const MeanVar mv = mean_var(w);
  const bool girsanov_ok = std::abs(mv.mean - 1.0) <= 3.0 * mv.std_error();
  CsvWriter gcsv(run.out_dir + "/girsanov.csv");
  gcsv.header({"mean", "std_error", "abs_error", "pass"});
  gcsv.row({mv.mean, mv.std_error(), std::abs(mv.mean - 1.0), girsanov_ok});
  gcsv.flush();

  std::cout << "gauss-check: estimate " << rep.estimate << " vs bound " << rep.bound
            << (rep.violation ? " VIOLATED" : " ok") << "; girsanov mean " << mv.mean
            << (girsanov_ok ? " ok" : " VIOLATED") << "\n";
  return (rep.violation || !girsanov_ok) ? 2 : 0;
}

int run_solve(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const GeneratorSpec gen = config_generator(c);
  const TerminalSpec xi = config_terminal(c);
  const PathEnsemble paths = generate_paths(TimeGrid(c.T, c.n_steps), c.d, c.M, c.seed);
  const SolutionField sol = solve(gen, xi, paths, config_options(c));

  const std::optional<double> oracle =
      oracle_y0(c.driver, c.f0, c.f0_value, c.beta, c.gamma, c.terminal, c.terminal_c, c.T);

  CsvWriter summary(run.out_dir + "/solve_summary.csv");
  summary.header({"name", "y0", "y0_std_error", "oracle", "abs_error",
                  "total_fixed_point_iters", "max_fixed_point_iters", "max_residual",
                  "min_regression_pivot"});
  const double nan = std::nan("");
  summary.row({c.name, sol.y0(), sol.diagnostics.y0_std_error, oracle ? *oracle : nan,
               oracle ? std::abs(sol.y0() - *oracle) : nan,
               sol.diagnostics.total_fixed_point_iters,
               static_cast<long long>(sol.diagnostics.max_fixed_point_iters),
               sol.diagnostics.max_fixed_point_residual,
               sol.diagnostics.min_regression_pivot});
  summary.flush();

  CsvWriter steps(run.out_dir + "/solve_steps.csv");
  steps.header({"step", "time", "mean_y", "mean_abs_y", "mean_z0"});
  std::vector<double> col(paths.M), acol(paths.M), zcol(paths.M);
  for (int k = 0; k <= c.n_steps; ++k) {
    for (std::size_t m = 0; m < paths.M; ++m) {
      col[m] = sol.y(m, k);
      acol[m] = std::abs(col[m]);
      zcol[m] = k < c.n_steps ? sol.z(m, k, 0) : nan;
    }
    steps.row({static_cast<long long>(k), paths.grid.time(k), mean_var(col).mean,
               mean_var(acol).mean, k < c.n_steps ? mean_var(zcol).mean : nan});
  }
  steps.flush();

  std::cout << "solve: y0 = " << sol.y0() << " (se " << sol.diagnostics.y0_std_error << ")";
  if (oracle) std::cout << ", oracle " << *oracle;
  std::cout << "\n";
  return 0;
}

int run_truncation_ladder(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const GeneratorSpec gen = config_generator(c);
  const TerminalSpec xi = config_terminal(c);
  const PathEnsemble paths = generate_paths(TimeGrid(c.T, c.n_steps), c.d, c.M, c.seed);
  const SolveOptions opt = config_options(c);

  const std::size_t ni = c.n_levels.size(), pi = c.p_levels.size();
  std::vector<double> y0(ni * pi), se(ni * pi), direct(ni * pi), direct_se(ni * pi);
  const bool has_direct = c.driver == "zero";

  CsvWriter csv(run.out_dir + "/truncation_ladder.csv");
  csv.header({"n", "p", "y0", "y0_std_error", "direct_oracle", "direct_oracle_se"});
  const double nan = std::nan("");
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j < pi; ++j) {
      const TruncationIndex idx(c.n_levels[i], c.p_levels[j]);
      const SolutionField sol = solve_truncated(gen, xi, idx, paths, opt);
      y0[i * pi + j] = sol.y0();
      se[i * pi + j] = sol.diagnostics.y0_std_error;
      if (has_direct) {
        // zero driver: Y_0 = E[xi^{n,p}] + T * f0^{n,p}
        std::vector<double> v = sample_terminal(paths, truncate_terminal(xi, idx));
        const double shift = c.T * truncate_value(c.f0 == "zero" ? 0.0 : c.f0_value, idx);
        for (double& x : v) x += shift;
        const MeanVar mv = mean_var(v);
        direct[i * pi + j] = mv.mean;
        direct_se[i * pi + j] = mv.std_error();
      }
      csv.row({static_cast<long long>(c.n_levels[i]), static_cast<long long>(c.p_levels[j]),
               y0[i * pi + j], se[i * pi + j], has_direct ? direct[i * pi + j] : nan,
               has_direct ? direct_se[i * pi + j] : nan});
    }
  csv.flush();

  // Comparison-theorem order: y0 non-decreasing in n, non-increasing in p,
  // within 3 combined standard errors.
  long long mono_n = 0, mono_p = 0, oracle_bad = 0;
  for (std::size_t j = 0; j < pi; ++j)
    for (std::size_t i = 0; i + 1 < ni; ++i) {
      const double slack =
          3.0 * std::hypot(se[i * pi + j], se[(i + 1) * pi + j]);
      if (c.n_levels[i] <= c.n_levels[i + 1] &&
          y0[(i + 1) * pi + j] < y0[i * pi + j] - slack)
        ++mono_n;
    }
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j + 1 < pi; ++j) {
      const double slack = 3.0 * std::hypot(se[i * pi + j], se[i * pi + j + 1]);
      if (c.p_levels[j] <= c.p_levels[j + 1] &&
          y0[i * pi + j + 1] > y0[i * pi + j] + slack)
        ++mono_p;
    }
  if (has_direct)
    for (std::size_t k = 0; k < ni * pi; ++k)
      if (std::abs(y0[k] - direct[k]) > 3.0 * std::hypot(se[k], direct_se[k]) + 5e-3)
        ++oracle_bad;

  CsvWriter sum(run.out_dir + "/truncation_summary.csv");
  sum.header({"check", "violations"});
  sum.row({std::string("monotone_in_n"), mono_n});
  sum.row({std::string("monotone_in_p"), mono_p});
  sum.row({std::string("direct_oracle"), oracle_bad});
  sum.flush();

  const long long total = mono_n + mono_p + oracle_bad;
  std::cout << "truncation-ladder: " << ni * pi << " levels, " << total << " violations\n";
  return total == 0 ? 0 : 2;
}

int run_bound_check(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const GeneratorSpec gen = config_generator(c);
  const TerminalSpec xi = config_terminal(c);
  const PathEnsemble paths = generate_paths(TimeGrid(c.T, c.n_steps), c.d, c.M, c.seed);
  const SolutionField sol = solve(gen, xi, paths, config_options(c));
  const BoundReport rep = apriori_bound_check(sol, gen, xi, PsiWeight(c.mu), paths,
                                              kBoundViolationTol, c.basis_degree, c.ridge);

  CsvWriter csv(run.out_dir + "/bound_check.csv");
  csv.header({"step_index", "time", "mean_margin", "min_margin", "violations"});
  for (const StepMargin& s : rep.per_step)
    csv.row({static_cast<long long>(s.step), s.time, s.mean_margin, s.min_margin,
             s.violations});
  csv.flush();

  std::cout << "bound-check: " << rep.total_violations << " pathwise violations across "
            << rep.per_step.size() << " steps\n";
  return rep.total_violations == 0 ? 0 : 2;
}

int run_class_d(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const GeneratorSpec gen = config_generator(c);
  const TerminalSpec xi = config_terminal(c);
  const PathEnsemble paths = generate_paths(TimeGrid(c.T, c.n_steps), c.d, c.M, c.seed);
  const SolutionField sol = solve(gen, xi, paths, config_options(c));

  const PsiSplit split = default_split(PsiWeight(c.mu), c.gamma, c.T);
  StoppingFamily family = StoppingFamily::deterministic(paths.grid, paths.M);
  family.append(StoppingFamily::hitting(c.levels, abs_y_process(sol), paths.M, c.n_steps,
                                        "abs_y"));

  const ClassDReport rep = class_D_diagnostic(sol, split.a, family);
  const ProofConstant bound = class_d_proof_constant(gen, xi, paths, split);
  const bool pass =
      rep.sup_estimate <= bound.value + 3.0 * (rep.sup_std_error + bound.std_error);

  CsvWriter csv(run.out_dir + "/class_d.csv");
  csv.header({"rule", "estimate", "std_error"});
  for (const ClassDEntry& e : rep.entries) csv.row({e.rule, e.estimate, e.std_error});
  csv.flush();

  CsvWriter sum(run.out_dir + "/class_d_summary.csv");
  sum.header({"a", "b", "c", "sup_estimate", "sup_std_error", "argmax_rule",
              "proof_constant", "proof_constant_se", "pass"});
  sum.row({split.a, split.b, split.c, rep.sup_estimate, rep.sup_std_error,
           rep.argmax >= 0 ? rep.entries[rep.argmax].rule : std::string("-"), bound.value,
           bound.std_error, pass});
  sum.flush();

  std::cout << "class-d: sup " << rep.sup_estimate << " vs constant " << bound.value
            << (pass ? " ok" : " VIOLATED") << "\n";
  return pass ? 0 : 2;
}

int run_uniqueness(const Run& run) {
  const ExperimentConfig& c = run.cfg;
  const GeneratorSpec gen = config_generator(c);
  const TerminalSpec xi = config_terminal(c);
  const TimeGrid grid(c.T, c.n_steps);
  const PathEnsemble paths = generate_paths(grid, c.d, c.M, c.seed);

  SolveOptions opt_a = config_options(c);
  SolveOptions opt_b = opt_a;
  opt_b.basis_degree = c.basis_degree_b;

  const SolutionField s1 = solve(gen, xi, paths, opt_a);
  const SolutionField s2 = [&]() -> SolutionField {
    if (!c.negative_control) return solve(gen, xi, paths, opt_b);
    // Deliberately corrupted partner: same terminal value, shifted interior.
    // A valid linearization still exists, but s2 solves no nearby equation,
    // so the representation margins must flag it.
    SolutionField f = s1;
    for (std::size_t m = 0; m < f.M; ++m)
      for (int k = 0; k <= c.n_steps; ++k)
        f.Y[m * static_cast<std::size_t>(c.n_steps + 1) + k] +=
            1.0 - grid.time(k) / grid.T;
    return f;
  }();

  const LinearizationField lin = linearize(gen, s1, s2);
  const PsiSplit split = default_split(PsiWeight(c.mu), c.gamma, c.T);
  const WindowSchedule windows = window_schedule(split.a, c.gamma, c.T);

  StoppingFamily family = horizon_rule(grid, paths.M);
  family.append(StoppingFamily::hitting(c.levels, abs_sum_process(s1, s2), paths.M,
                                        c.n_steps, "abs_sum"));

  CsvWriter rcsv(run.out_dir + "/uniqueness_representation.csv");
  rcsv.header({"window", "t_step", "t", "rule", "mean_margin", "min_margin", "std_error",
               "pathwise_below_tol", "violation"});
  long long rep_violations = 0;
  for (std::size_t w = 0; w < windows.windows.size(); ++w) {
    const int t_step = grid.step_at_or_after(windows.windows[w].begin);
    const DeltaRepReport rep = delta_representation_margin(
        s1, s2, lin, family, paths, t_step, c.rep_tolerance, c.basis_degree, c.ridge);
    rep_violations += rep.total_violations;
    for (const LevelMargin& lm : rep.per_rule)
      rcsv.row({static_cast<long long>(w), static_cast<long long>(rep.t_step), rep.t,
                lm.rule, lm.mean_margin, lm.min_margin, lm.std_error,
                lm.pathwise_below_tol, lm.violation});
  }
  rcsv.flush();

  if (c.negative_control) {
    std::cout << "uniqueness: negative control, " << rep_violations
              << " representation violations (expected > 0)\n";
    return rep_violations > 0 ? 2 : 0;
  }

  const int ui_step = grid.step_at_or_after(windows.windows.front().begin);
  const UiReport ui = uniform_integrability_margin(s1, s2, lin, family, paths, split.a,
                                                   ui_step);
  CsvWriter ucsv(run.out_dir + "/uniqueness_ui.csv");
  ucsv.header({"rule", "young_violations", "second_moment", "second_moment_se",
               "second_moment_bound", "second_moment_violation", "psi_delta_mean",
               "psi_pair_mean", "psi_split_violations", "psi_mean_violation"});
  for (const UiRuleReport& r : ui.per_rule)
    ucsv.row({r.rule, r.young_violations, r.second_moment, r.second_moment_se,
              r.second_moment_bound, r.second_moment_violation, r.psi_delta_mean,
              r.psi_pair_mean, r.psi_split_violations, r.psi_mean_violation});
  ucsv.flush();

  const AgreementReport agree =
      two_solver_agreement(gen, xi, grid, c.d, c.M, c.seed, c.seed_b, opt_a, opt_b,
                           PsiWeight(c.mu), c.allowance);
  CsvWriter acsv(run.out_dir + "/uniqueness_agreement.csv");
  acsv.header({"y0_a", "y0_b", "se_a", "se_b", "delta", "combined_se", "allowance",
               "max_step_mean_diff", "psi_moment", "psi_moment_se",
               "integrability_warning", "pass"});
  acsv.row({agree.y0_a, agree.y0_b, agree.se_a, agree.se_b, agree.delta, agree.combined_se,
            agree.allowance, agree.max_step_mean_diff, agree.psi_moment, agree.psi_moment_se,
            agree.integrability_warning, agree.pass});
  acsv.flush();

  const bool ok = rep_violations == 0 && !ui.any_violation() && agree.pass;
  std::cout << "uniqueness: rep violations " << rep_violations << ", ui "
            << (ui.any_violation() ? "VIOLATED" : "ok") << ", agreement |dY0| = "
            << agree.delta << (agree.pass ? " ok" : " VIOLATED") << "\n";
  if (agree.integrability_warning)
    std::cout << "warning: empirical psi-moment diverged; agreement is best-effort\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for scalar BSDEs with linearly growing drivers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path, out_flag;
  long long seed_override = 0;
  int jobs = 0;
  app.add_option("--config", config_path, "experiment config file (INI)");
  app.add_option("--seed-override", seed_override, "replace the config's ensemble seed");
  app.add_option("--out", out_flag, "output directory for reports and the manifest");
  app.add_option("--jobs", jobs, "worker thread cap (results are thread-count invariant)");

  const std::vector<std::pair<std::string, int (*)(const Run&)>> commands = {
      {"psi-check", run_psi_check},     {"gauss-check", run_gauss_check},
      {"solve", run_solve},             {"truncation-ladder", run_truncation_ladder},
      {"bound-check", run_bound_check}, {"class-d", run_class_d},
      {"uniqueness", run_uniqueness}};
  static const std::vector<std::string> descriptions = {
      "sample the growth-gauge inequalities and report margins",
      "Gaussian exponential-moment and Girsanov-weight checks",
      "backward LSMC solve of one instance",
      "truncated instances over a grid of levels, with comparison-order checks",
      "pathwise a-priori growth bound margins",
      "class-(D) supremum against its proof constant",
      "linearization, representation, integrability and two-run agreement"};
  for (std::size_t i = 0; i < commands.size(); ++i)
    app.add_subcommand(commands[i].first, descriptions[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (jobs > 0) set_max_threads(jobs);

    Run run;
    if (!config_path.empty()) run.cfg = parse_config_file(config_path);
    if (app.count("--seed-override") > 0)
      run.cfg.seed = static_cast<std::uint64_t>(seed_override);
    validate(run.cfg);

    if (!out_flag.empty())
      run.out_dir = out_flag;
    else if (!run.cfg.dir.empty())
      run.out_dir = run.cfg.dir;
    else if (const char* env = std::getenv("BSDELAB_OUT"); env && *env)
      run.out_dir = env;
    else
      run.out_dir = ".";
    std::filesystem::create_directories(run.out_dir);
    run.cfg.dir = run.out_dir;

    const CLI::App* sub = app.get_subcommands().front();
    std::ofstream manifest(run.out_dir + "/manifest.cfg");
    manifest << serialize_config(run.cfg) << "\n[run]\nsubcommand = " << sub->get_name()
             << "\nversion = " << kVersion << "\n";
    manifest.close();

    for (const auto& [name, fn] : commands)
      if (sub->get_name() == name) return fn(run);
    std::cerr << "error: no handler for subcommand " << sub->get_name() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << "\n";
    return 1;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis not satisfied: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
