#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("BSDELAB_BIN");
  REQUIRE_MESSAGE(b != nullptr, "BSDELAB_BIN must point at the CLI binary");
  return b;
}

int run(const std::string& args, const std::string& log = "cli_test.log") {
  const std::string cmd = bin() + " " + args + " > " + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

long long count_lines(const fs::path& p) {
  const std::string s = slurp(p);
  long long n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_scratch") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("usage errors exit with 1, help and version with 0") {
  CHECK(run("frobnicate") == 1);
  CHECK(run("") == 1);  // a subcommand is required
  CHECK(run("solve --no-such-flag") == 1);
  CHECK(run("--help") == 0);
  CHECK(run("--version") == 0);
}

TEST_CASE("malformed and invalid configs exit with 1") {
  TempDir tmp("bad_config");
  const fs::path cfg = tmp.path / "bad.cfg";

  write_file(cfg, "[grid]\nn_steps = fast\n");
  CHECK(run("solve --config " + cfg.string() + " --out " + tmp.str()) == 1);

  write_file(cfg, "[generator]\ndriver = septic\n");
  CHECK(run("solve --config " + cfg.string() + " --out " + tmp.str()) == 1);

  CHECK(run("solve --config " + tmp.str() + "/absent.cfg --out " + tmp.str()) == 1);
}

TEST_CASE("sub-critical gauge weight is a hypothesis error, not a crash") {
  TempDir tmp("subcritical");
  const fs::path cfg = tmp.path / "sub.cfg";
  // gamma sqrt(T) = 1 but mu = 0.5: the growth gauge carries no information
  write_file(cfg,
             "[generator]\ndriver = mixed\nbeta = 0.5\ngamma = 1\n"
             "[psi]\nmu = 0.5\n"
             "[grid]\nT = 1\nn_steps = 8\n"
             "[ensemble]\nM = 500\nseed = 1\n"
             "[solver]\nbasis_degree = 2\n"
             "[terminal]\nkind = abs_w_t\nc = 1\n");
  const fs::path log = tmp.path / "log.txt";
  CHECK(run("bound-check --config " + cfg.string() + " --out " + tmp.str(),
            log.string()) == 1);
  CHECK(slurp(log).find("hypothesis") != std::string::npos);
  CHECK(run("class-d --config " + cfg.string() + " --out " + tmp.str()) == 1);
}

TEST_CASE("default psi-check emits at least 3e5 margin rows and passes") {
  TempDir tmp("psi_default");
  CHECK(run("psi-check --out " + tmp.str()) == 0);
  CHECK(count_lines(tmp.path / "psi_check.csv") >= 300001);  // header + rows
}

TEST_CASE("gauss-check passes on the attained closed-form case") {
  TempDir tmp("gauss");
  const fs::path cfg = tmp.path / "gauss.cfg";
  // |q| = gamma = 1, t = 0.5, mu = 1: bound sqrt(2), attained
  write_file(cfg,
             "[generator]\ngamma = 1\n"
             "[psi]\nmu = 1\n"
             "[grid]\nT = 1\nn_steps = 8\n"
             "[ensemble]\nM = 100000\nseed = 5\n"
             "[gauss]\nfrom_step = 4\n");
  CHECK(run("gauss-check --config " + cfg.string() + " --out " + tmp.str()) == 0);
  CHECK(fs::exists(tmp.path / "gauss_check.csv"));
  CHECK(fs::exists(tmp.path / "girsanov.csv"));
}

TEST_CASE("manifest reproduces a run byte-for-byte") {
  TempDir tmp("manifest");
  const fs::path cfg = tmp.path / "inst.cfg";
  // path-dependent terminal so a seed change must show up in the bytes
  write_file(cfg,
             "[instance]\nname = repro\n"
             "[generator]\ndriver = linear_y\nbeta = 0.5\ngamma = 0.5\n"
             "[terminal]\nkind = abs_w_t\nc = 1\n"
             "[grid]\nT = 1\nn_steps = 10\n"
             "[ensemble]\nM = 2000\nseed = 11\n"
             "[solver]\nbasis_degree = 3\n");
  const std::string d1 = (tmp.path / "d1").string(), d2 = (tmp.path / "d2").string();
  REQUIRE(run("solve --config " + cfg.string() + " --out " + d1) == 0);
  REQUIRE(run("solve --config " + d1 + "/manifest.cfg --out " + d2) == 0);
  const std::string s1 = slurp(fs::path(d1) / "solve_summary.csv");
  CHECK(!s1.empty());
  CHECK(s1 == slurp(fs::path(d2) / "solve_summary.csv"));
  CHECK(slurp(fs::path(d1) / "solve_steps.csv") == slurp(fs::path(d2) / "solve_steps.csv"));

  // a different seed must change the numbers
  const std::string d3 = (tmp.path / "d3").string();
  REQUIRE(run("solve --config " + cfg.string() + " --seed-override 999 --out " + d3) == 0);
  CHECK(s1 != slurp(fs::path(d3) / "solve_summary.csv"));

  // --jobs must not change the numbers
  const std::string d4 = (tmp.path / "d4").string();
  REQUIRE(run("solve --config " + cfg.string() + " --jobs 3 --out " + d4) == 0);
  CHECK(s1 == slurp(fs::path(d4) / "solve_summary.csv"));
}

TEST_CASE("output directory falls back to the environment variable") {
  TempDir tmp("envdir");
  const std::string cmd = "BSDELAB_OUT=" + tmp.str() + " " + bin() +
                          " psi-check --config /dev/null > /dev/null 2>&1";
  // /dev/null parses as an empty config: all defaults; shrink the sample count
  const fs::path cfg = tmp.path / "small.cfg";
  write_file(cfg, "[psi_check]\nsamples = 100\n");
  const std::string cmd2 = "BSDELAB_OUT=" + tmp.str() + " " + bin() + " psi-check --config " +
                           cfg.string() + " > /dev/null 2>&1";
  const int rc = std::system(cmd2.c_str());
  REQUIRE(WIFEXITED(rc));
  CHECK(WEXITSTATUS(rc) == 0);
  CHECK(fs::exists(tmp.path / "psi_check.csv"));
  (void)cmd;
}

TEST_CASE("negative control is flagged with exit code 2") {
  TempDir tmp("negctl");
  const fs::path cfg = tmp.path / "neg.cfg";
  write_file(cfg,
             "[instance]\nname = corrupted pair\n"
             "[generator]\ndriver = affine\nbeta = 0.5\ngamma = 0.25\n"
             "[terminal]\nkind = abs_w_t\nc = 1\n"
             "[psi]\nmu = 0.5\n"
             "[grid]\nT = 1\nn_steps = 64\n"
             "[ensemble]\nM = 1000\nseed = 3\n"
             "[solver]\nbasis_degree = 2\n"
             "[uniqueness]\nbasis_degree_b = 3\nnegative_control = true\n");
  CHECK(run("uniqueness --config " + cfg.string() + " --out " + tmp.str()) == 2);
  CHECK(fs::exists(tmp.path / "uniqueness_representation.csv"));

  // The same instance with a genuine second solve passes. Both degrees must
  // resolve the kinked value function near the terminal (a degree-2 fit of
  // E|W_T| carries an O(0.1) bias there that the margin check rightly flags),
  // hence 4 and 5.
  write_file(cfg,
             "[instance]\nname = genuine pair\n"
             "[generator]\ndriver = affine\nbeta = 0.5\ngamma = 0.25\n"
             "[terminal]\nkind = abs_w_t\nc = 1\n"
             "[psi]\nmu = 0.5\n"
             "[grid]\nT = 1\nn_steps = 64\n"
             "[ensemble]\nM = 4000\nseed = 3\n"
             "[solver]\nbasis_degree = 4\n"
             "[uniqueness]\nbasis_degree_b = 5\nnegative_control = false\n");
  CHECK(run("uniqueness --config " + cfg.string() + " --out " + tmp.str()) == 0);
  CHECK(fs::exists(tmp.path / "uniqueness_ui.csv"));
  CHECK(fs::exists(tmp.path / "uniqueness_agreement.csv"));
}

TEST_CASE("bound-check CSV carries the pinned schema") {
  TempDir tmp("bound");
  const fs::path cfg = tmp.path / "ok.cfg";
  write_file(cfg,
             "[generator]\ndriver = mixed\nbeta = 0.5\ngamma = 0.5\nf0 = constant\n"
             "f0_value = 0.25\n"
             "[terminal]\nkind = abs_w_t\nc = 1\n"
             "[psi]\nmu = 1\n"
             "[grid]\nT = 1\nn_steps = 8\n"
             "[ensemble]\nM = 2000\nseed = 9\n"
             "[solver]\nbasis_degree = 3\n");
  CHECK(run("bound-check --config " + cfg.string() + " --out " + tmp.str()) == 0);
  std::ifstream in(tmp.path / "bound_check.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "step_index,time,mean_margin,min_margin,violations");
  CHECK(count_lines(tmp.path / "bound_check.csv") == 10);  // header + 9 steps
}
