#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bsdelab {

// All monomials x^alpha with |alpha| <= degree in dim variables, graded order.
class PolynomialBasis {
 public:
  PolynomialBasis(int dim, int degree);
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  void evaluate(std::span<const double> x, std::span<double> out) const;

 private:
  int dim_, degree_;
  std::vector<std::vector<int>> exponents_;
};

struct RegressionDiagnostics {
  double min_pivot = 0.0;   // smallest diagonal entry of the Cholesky factor
  double ridge = 0.0;       // regularization added to the unit-RMS-normalized Gram
};

// Least-squares projection onto a polynomial basis of the state, shared by all
// regressands at one time step: the design matrix and the Cholesky factor of
// the (normalized, ridge-stabilized) Gram matrix are built once, then fit()
// projects any number of regressands. Gram accumulation runs over fixed path
// blocks combined in index order, so coefficients are thread-count invariant.
class StepRegression {
 public:
  // states: M x dim, row-major.
  StepRegression(const PolynomialBasis& basis, std::span<const double> states, std::size_t M,
                 double ridge = kDefaultRidge);
  ~StepRegression();
  StepRegression(StepRegression&&) noexcept;
  StepRegression& operator=(StepRegression&&) noexcept;

  // Fitted values Phi * coef at the ensemble's own states.
  void fit(std::span<const double> regressand, std::span<double> fitted) const;
  std::vector<double> fit(std::span<const double> regressand) const;
  // Basis coefficients in the original (unnormalized) monomial scaling.
  std::vector<double> coefficients(std::span<const double> regressand) const;

  const RegressionDiagnostics& diagnostics() const { return diag_; }

  static constexpr double kDefaultRidge = 1e-10;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  RegressionDiagnostics diag_;
};

}  // namespace bsdelab
