#include "bsdelab/catalog.hpp"

#include <cmath>
#include <numbers>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {
double norm2(std::span<const double> z) {
  double s = 0.0;
  for (double x : z) s += x * x;
  return std::sqrt(s);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
}  // namespace

std::vector<std::string> catalog_drivers() {
  return {"zero", "linear_y", "gamma_abs_z", "mixed", "affine"};
}

std::vector<std::string> catalog_intercepts() { return {"zero", "constant"}; }

std::vector<std::string> catalog_terminals() {
  return {"constant", "w_t", "abs_w_t", "exp_abs_w_t", "exp_sq_w_t"};
}

GeneratorSpec make_catalog_generator(const std::string& driver, double beta, double gamma,
                                     const std::string& f0_name, double f0_value, int z_dim,
                                     double horizon) {
  InterceptFn f0;
  if (f0_name == "zero")
    f0 = [](double) { return 0.0; };
  else if (f0_name == "constant")
    f0 = [f0_value](double) { return f0_value; };
  else
    throw DomainError("unknown intercept '" + f0_name + "'");

  DriverFn f;
  if (driver == "zero") {
    f = [f0](double t, double, std::span<const double>) { return f0(t); };
  } else if (driver == "linear_y") {
    f = [f0, beta](double t, double y, std::span<const double>) { return f0(t) + beta * y; };
  } else if (driver == "gamma_abs_z") {
    f = [f0, gamma](double t, double, std::span<const double> z) {
      return f0(t) + gamma * norm2(z);
    };
  } else if (driver == "mixed") {
    f = [f0, beta, gamma](double t, double y, std::span<const double> z) {
      return f0(t) + beta * y + gamma * norm2(z);
    };
  } else if (driver == "affine") {
    f = [f0, beta, gamma](double t, double y, std::span<const double> z) {
      return f0(t) + beta * y + gamma * z[0];
    };
  } else {
    throw DomainError("unknown driver '" + driver + "'");
  }
  return GeneratorSpec::make(beta, gamma, std::move(f0), std::move(f), /*lipschitz=*/true,
                             z_dim, horizon);
}

TerminalSpec make_catalog_terminal(const std::string& kind, double c, double T) {
  if (!std::isfinite(c)) throw DomainError("terminal coefficient must be finite");
  TerminalSpec spec;
  spec.description = kind + "(c=" + std::to_string(c) + ")";
  if (kind == "constant")
    spec.xi = [c](std::span<const double>) { return c; };
  else if (kind == "w_t")
    spec.xi = [c](std::span<const double> x) { return c * x[0]; };
  else if (kind == "abs_w_t")
    spec.xi = [c](std::span<const double> x) { return c * std::abs(x[0]); };
  else if (kind == "exp_abs_w_t")
    spec.xi = [c](std::span<const double> x) { return std::exp(c * std::abs(x[0])); };
  else if (kind == "exp_sq_w_t") {
    if (!(c < 0.5 / T))
      throw DomainError("exp_sq_w_t: need c < 1/(2T) for an integrable terminal");
    spec.xi = [c](std::span<const double> x) { return std::exp(c * x[0] * x[0]); };
  } else
    throw DomainError("unknown terminal '" + kind + "'");
  return spec;
}

std::optional<double> terminal_mean(const std::string& kind, double c, double T) {
  if (kind == "constant") return c;
  if (kind == "w_t") return 0.0;
  if (kind == "abs_w_t") return c * std::sqrt(2.0 * T / std::numbers::pi);
  if (kind == "exp_abs_w_t")
    return 2.0 * std::exp(0.5 * c * c * T) * normal_cdf(c * std::sqrt(T));
  if (kind == "exp_sq_w_t") {
    if (!(c < 0.5 / T)) return std::nullopt;
    return 1.0 / std::sqrt(1.0 - 2.0 * c * T);
  }
  return std::nullopt;
}

std::optional<double> oracle_y0(const std::string& driver, const std::string& f0_name,
                                double f0_value, double beta, double gamma,
                                const std::string& terminal, double c, double T) {
  const double f0 = f0_name == "zero" ? 0.0 : f0_value;
  const std::optional<double> mean = terminal_mean(terminal, c, T);
  if (!mean) return std::nullopt;

  if (driver == "zero") return *mean + f0 * T;

  // The rest only have closed forms with a vanishing intercept.
  if (f0 != 0.0) return std::nullopt;

  if (driver == "linear_y") {
    if (terminal == "constant") return c * std::exp(beta * T);
    if (terminal == "w_t") return 0.0;
    return std::nullopt;
  }
  if (driver == "gamma_abs_z") {
    if (terminal == "constant") return c;
    if (terminal == "w_t") return gamma * std::abs(c) * T;
    return std::nullopt;
  }
  if (driver == "mixed") {
    // Y_t = c e^{beta(T-t)} W_t + gamma|c| (T-t) e^{beta(T-t)} for w_t,
    // collapsing to the linear_y answer for constants.
    if (terminal == "constant") return c * std::exp(beta * T);
    if (terminal == "w_t") return gamma * std::abs(c) * T * std::exp(beta * T);
    return std::nullopt;
  }
  if (driver == "affine") {
    // Same ODE system as `mixed` but with gamma z in place of gamma|z|.
    if (terminal == "constant") return c * std::exp(beta * T);
    if (terminal == "w_t") return gamma * c * T * std::exp(beta * T);
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace bsdelab
