#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace bsdelab {

using DriverFn = std::function<double(double t, double y, std::span<const double> z)>;
using InterceptFn = std::function<double(double t)>;     // f0(t) = f(t, 0, 0)
using TerminalFn = std::function<double(std::span<const double> x)>;  // xi as a map of W_T

// Driver f with the linear-growth envelope |f(t,y,z) - f0(t)| <= beta|y| + gamma|z|.
// The factory spot-checks the envelope (and Lipschitz continuity when claimed)
// on a randomized sample before accepting the spec; violations throw.
struct GeneratorSpec {
  double beta = 0.0;
  double gamma = 0.0;
  InterceptFn f0;
  DriverFn driver;
  bool lipschitz = false;
  int z_dim = 1;

  static GeneratorSpec make(double beta, double gamma, InterceptFn f0, DriverFn driver,
                            bool lipschitz, int z_dim = 1, double horizon = 1.0,
                            std::uint64_t check_seed = 0x5eedULL);
};

struct TerminalSpec {
  TerminalFn xi;
  std::string description;
};

// Two-sided truncation level: positive part capped at n, negative part at p.
struct TruncationIndex {
  int n = 1;
  int p = 1;
  TruncationIndex(int n_, int p_);
};

// x -> min(x^+, n) - min(x^-, p). Exactly the identity (bit-for-bit) wherever
// |x^+| <= n and |x^-| <= p.
double truncate_value(double x, TruncationIndex idx);

TerminalSpec truncate_terminal(const TerminalSpec& xi, TruncationIndex idx);

// f^{n,p}(t,y,z) = f(t,y,z) + (f0^{n,p}(t) - f0(t)): same envelope (beta, gamma)
// around the truncated intercept. The correction term is exactly 0.0 wherever
// the truncation is inactive, so outputs match f bit-for-bit there.
GeneratorSpec truncated_generator(const GeneratorSpec& gen, TruncationIndex idx);

// Dominating driver |f0^{n,p}(t)| + beta y + gamma |z| used for comparison runs.
GeneratorSpec comparison_generator(const GeneratorSpec& gen, TruncationIndex idx);

}  // namespace bsdelab
