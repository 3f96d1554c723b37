#include "bsdelab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/rng.hpp"

namespace bsdelab {

namespace {
double norm2(std::span<const double> z) {
  double s = 0.0;
  for (double x : z) s += x * x;
  return std::sqrt(s);
}

// Sign-symmetric log-uniform magnitude in [1e-3, 1e3].
double sample_coord(SplitMix64& g) {
  const double u = g.next_uniform();
  const double mag = std::exp(std::log(1e-3) + u * (std::log(1e3) - std::log(1e-3)));
  return g.next() & 1 ? mag : -mag;
}
}  // namespace

GeneratorSpec GeneratorSpec::make(double beta, double gamma, InterceptFn f0, DriverFn driver,
                                  bool lipschitz, int z_dim, double horizon,
                                  std::uint64_t check_seed) {
  if (!(std::isfinite(beta) && beta >= 0.0))
    throw DomainError("GeneratorSpec: beta must be finite and >= 0");
  if (!(std::isfinite(gamma) && gamma >= 0.0))
    throw DomainError("GeneratorSpec: gamma must be finite and >= 0");
  if (z_dim < 1) throw DomainError("GeneratorSpec: z_dim must be >= 1");
  if (!f0 || !driver) throw DomainError("GeneratorSpec: f0 and driver must be callable");
  if (!(std::isfinite(horizon) && horizon > 0.0))
    throw DomainError("GeneratorSpec: horizon must be finite and > 0");

  // Randomized spot check of the declared envelope. Not a proof, but it
  // catches transposed parameters and mis-specified intercepts immediately.
  SplitMix64 g = path_stream(check_seed, 0);
  std::vector<double> z1(z_dim), z2(z_dim);
  constexpr int kSamples = 128;
  for (int s = 0; s < kSamples; ++s) {
    const double t = horizon * g.next_uniform();
    const double y1 = sample_coord(g), y2 = sample_coord(g);
    for (int j = 0; j < z_dim; ++j) z1[j] = sample_coord(g);
    for (int j = 0; j < z_dim; ++j) z2[j] = sample_coord(g);

    const double base = f0(t);
    if (!std::isfinite(base)) throw DomainError("GeneratorSpec: f0 not finite on [0, T]");
    const double v1 = driver(t, y1, z1);
    const double envelope = beta * std::abs(y1) + gamma * norm2(z1);
    const double slack = 1e-9 * (1.0 + std::abs(base) + envelope);
    if (!(std::abs(v1 - base) <= envelope + slack))
      throw DomainError("GeneratorSpec: driver violates |f - f0| <= beta|y| + gamma|z|");

    if (lipschitz) {
      const double v2 = driver(t, y2, z2);
      std::vector<double> dz(z_dim);
      for (int j = 0; j < z_dim; ++j) dz[j] = z1[j] - z2[j];
      const double lip = beta * std::abs(y1 - y2) + gamma * norm2(dz);
      if (!(std::abs(v1 - v2) <= lip + 1e-9 * (1.0 + lip)))
        throw DomainError("GeneratorSpec: driver violates the declared Lipschitz bounds");
    }
  }

  GeneratorSpec spec;
  spec.beta = beta;
  spec.gamma = gamma;
  spec.f0 = std::move(f0);
  spec.driver = std::move(driver);
  spec.lipschitz = lipschitz;
  spec.z_dim = z_dim;
  return spec;
}

TruncationIndex::TruncationIndex(int n_, int p_) : n(n_), p(p_) {
  if (n < 1 || p < 1) throw DomainError("TruncationIndex: levels must be >= 1");
}

double truncate_value(double x, TruncationIndex idx) {
  const double pos = std::min(std::max(x, 0.0), static_cast<double>(idx.n));
  const double neg = std::min(std::max(-x, 0.0), static_cast<double>(idx.p));
  return pos - neg;
}

TerminalSpec truncate_terminal(const TerminalSpec& xi, TruncationIndex idx) {
  TerminalFn base = xi.xi;
  if (!base) throw DomainError("truncate_terminal: terminal must be callable");
  TerminalSpec out;
  out.description = xi.description + " truncated(" + std::to_string(idx.n) + "," +
                    std::to_string(idx.p) + ")";
  out.xi = [base, idx](std::span<const double> x) { return truncate_value(base(x), idx); };
  return out;
}

GeneratorSpec truncated_generator(const GeneratorSpec& gen, TruncationIndex idx) {
  if (!gen.f0 || !gen.driver) throw DomainError("truncated_generator: empty generator");
  GeneratorSpec out = gen;
  InterceptFn f0 = gen.f0;
  DriverFn f = gen.driver;
  out.f0 = [f0, idx](double t) { return truncate_value(f0(t), idx); };
  out.driver = [f0, f, idx](double t, double y, std::span<const double> z) {
    const double base = f0(t);
    return f(t, y, z) + (truncate_value(base, idx) - base);
  };
  return out;
}

GeneratorSpec comparison_generator(const GeneratorSpec& gen, TruncationIndex idx) {
  if (!gen.f0) throw DomainError("comparison_generator: empty generator");
  GeneratorSpec out;
  out.beta = gen.beta;
  out.gamma = gen.gamma;
  out.z_dim = gen.z_dim;
  out.lipschitz = true;
  InterceptFn f0 = gen.f0;
  const double beta = gen.beta, gamma = gen.gamma;
  out.f0 = [f0, idx](double t) { return std::abs(truncate_value(f0(t), idx)); };
  out.driver = [f0, idx, beta, gamma](double t, double y, std::span<const double> z) {
    return std::abs(truncate_value(f0(t), idx)) + beta * y + gamma * norm2(z);
  };
  return out;
}

}  // namespace bsdelab
