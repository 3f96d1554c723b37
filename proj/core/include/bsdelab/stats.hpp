#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1 denominator); 0 for n == 1
  std::size_t n = 0;

  double std_error() const {
    return n == 0 ? 0.0 : std::sqrt(variance / static_cast<double>(n));
  }
};

// Two-pass mean/variance with block accumulation in index order: the result is
// identical for any thread count.
inline MeanVar mean_var(std::span<const double> v) {
  if (v.empty()) throw DomainError("mean_var: empty sample");
  const std::size_t n = v.size();
  const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;

  std::vector<double> partial(n_blocks, 0.0);
  parallel_for_blocks(n, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    partial[lo / kReductionBlock] = s;
  });
  double sum = 0.0;
  for (double s : partial) sum += s;
  const double mean = sum / static_cast<double>(n);

  parallel_for_blocks(n, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = v[i] - mean;
      s += d * d;
    }
    partial[lo / kReductionBlock] = s;
  });
  double ss = 0.0;
  for (double s : partial) ss += s;

  MeanVar out;
  out.mean = mean;
  out.variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  out.n = n;
  return out;
}

}  // namespace bsdelab
