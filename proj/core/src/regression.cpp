#include "bsdelab/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

PolynomialBasis::PolynomialBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1) throw DomainError("PolynomialBasis: dim must be >= 1");
  if (degree < 0) throw DomainError("PolynomialBasis: degree must be >= 0");
  // Enumerate multi-indices by total degree, lexicographic within a degree.
  std::vector<int> alpha(dim, 0);
  for (int total = 0; total <= degree; ++total) {
    std::fill(alpha.begin(), alpha.end(), 0);
    alpha[0] = total;
    for (;;) {
      exponents_.push_back(alpha);
      // next composition of `total` into dim parts
      int i = dim - 2;
      while (i >= 0 && alpha[i] == 0) --i;
      if (i < 0) break;
      --alpha[i];
      int rest = total;
      for (int j = 0; j <= i; ++j) rest -= alpha[j];
      alpha[i + 1] = rest;
      for (int j = i + 2; j < dim; ++j) alpha[j] = 0;
    }
  }
}

void PolynomialBasis::evaluate(std::span<const double> x, std::span<double> out) const {
  for (std::size_t b = 0; b < exponents_.size(); ++b) {
    double v = 1.0;
    for (int j = 0; j < dim_; ++j) {
      const int e = exponents_[b][j];
      for (int r = 0; r < e; ++r) v *= x[j];
    }
    out[b] = v;
  }
}

struct StepRegression::Impl {
  int nb = 0;
  std::size_t M = 0;
  std::vector<double> phi;     // M x nb design matrix, columns scaled to unit RMS
  std::vector<double> scale;   // per-column RMS used for the scaling
  Eigen::LLT<Eigen::MatrixXd> llt;
};

StepRegression::~StepRegression() = default;
StepRegression::StepRegression(StepRegression&&) noexcept = default;
StepRegression& StepRegression::operator=(StepRegression&&) noexcept = default;

StepRegression::StepRegression(const PolynomialBasis& basis, std::span<const double> states,
                               std::size_t M, double ridge)
    : impl_(std::make_unique<Impl>()) {
  const int nb = basis.size();
  const int dim = basis.dim();
  if (M == 0) throw DomainError("StepRegression: empty ensemble");
  if (states.size() != M * static_cast<std::size_t>(dim))
    throw DomainError("StepRegression: states size mismatch");
  if (M < static_cast<std::size_t>(nb))
    throw DomainError("StepRegression: fewer paths than basis functions");

  impl_->nb = nb;
  impl_->M = M;
  impl_->phi.resize(M * static_cast<std::size_t>(nb));
  double* phi = impl_->phi.data();

  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m)
      basis.evaluate(states.subspan(m * dim, dim),
                     std::span<double>(phi + m * nb, static_cast<std::size_t>(nb)));
  });

  // Column RMS normalization; a column that is identically ~0 keeps scale 1.
  std::vector<double>& scale = impl_->scale;
  scale.assign(nb, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    for (int b = 0; b < nb; ++b) scale[b] += phi[m * nb + b] * phi[m * nb + b];
  for (int b = 0; b < nb; ++b) {
    scale[b] = std::sqrt(scale[b] / static_cast<double>(M));
    if (!(scale[b] > 1e-300)) scale[b] = 1.0;
    if (!std::isfinite(scale[b]))
      throw ConditioningError("StepRegression: non-finite basis column");
  }
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m)
      for (int b = 0; b < nb; ++b) phi[m * nb + b] /= scale[b];
  });

  // Gram matrix (1/M) Phi^T Phi accumulated over fixed blocks in index order.
  const std::size_t n_blocks = (M + kReductionBlock - 1) / kReductionBlock;
  std::vector<Eigen::MatrixXd> partial(n_blocks, Eigen::MatrixXd::Zero(nb, nb));
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    Eigen::MatrixXd& G = partial[lo / kReductionBlock];
    for (std::size_t m = lo; m < hi; ++m) {
      Eigen::Map<const Eigen::VectorXd> row(phi + m * nb, nb);
      G.selfadjointView<Eigen::Lower>().rankUpdate(row);
    }
  });
  Eigen::MatrixXd Gl = Eigen::MatrixXd::Zero(nb, nb);
  for (const auto& P : partial) Gl += P;
  Eigen::MatrixXd G = Gl.selfadjointView<Eigen::Lower>();
  G /= static_cast<double>(M);
  if (!G.allFinite()) throw ConditioningError("StepRegression: non-finite Gram matrix");
  G.diagonal().array() += ridge;

  impl_->llt.compute(G);
  if (impl_->llt.info() != Eigen::Success)
    throw ConditioningError("StepRegression: Cholesky factorization failed");
  diag_.ridge = ridge;
  diag_.min_pivot = impl_->llt.matrixLLT().diagonal().minCoeff();
}

std::vector<double> StepRegression::coefficients(std::span<const double> regressand) const {
  const int nb = impl_->nb;
  const std::size_t M = impl_->M;
  if (regressand.size() != M) throw DomainError("StepRegression: regressand size mismatch");
  const double* phi = impl_->phi.data();

  // Anchor the fit at the first regressand value: solving on r - r0 and folding
  // r0 back into the constant coefficient keeps the ridge bias off the constant
  // component, so a constant regressand is reproduced bit-for-bit.
  const double r0 = regressand[0];

  const std::size_t n_blocks = (M + kReductionBlock - 1) / kReductionBlock;
  std::vector<Eigen::VectorXd> partial(n_blocks, Eigen::VectorXd::Zero(nb));
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd& v = partial[lo / kReductionBlock];
    for (std::size_t m = lo; m < hi; ++m) {
      Eigen::Map<const Eigen::VectorXd> row(phi + m * nb, nb);
      v += (regressand[m] - r0) * row;
    }
  });
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
  for (const auto& p : partial) rhs += p;
  rhs /= static_cast<double>(M);
  if (!std::isfinite(r0) || !rhs.allFinite())
    throw ConditioningError("StepRegression: non-finite regressand");

  Eigen::VectorXd c = impl_->llt.solve(rhs);
  std::vector<double> out(nb);
  for (int b = 0; b < nb; ++b) out[b] = c[b] / impl_->scale[b];
  out[0] += r0;  // basis index 0 is the constant, scale exactly 1
  return out;
}

void StepRegression::fit(std::span<const double> regressand, std::span<double> fitted) const {
  const int nb = impl_->nb;
  const std::size_t M = impl_->M;
  if (regressand.size() != M || fitted.size() != M)
    throw DomainError("StepRegression: size mismatch");
  // coefficients() undoes the column scaling; redo it for the scaled design.
  std::vector<double> c = coefficients(regressand);
  Eigen::VectorXd cs(nb);
  for (int b = 0; b < nb; ++b) cs[b] = c[b] * impl_->scale[b];
  const double* phi = impl_->phi.data();
  parallel_for_blocks(M, kReductionBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      Eigen::Map<const Eigen::VectorXd> row(phi + m * nb, nb);
      fitted[m] = row.dot(cs);
    }
  });
}

std::vector<double> StepRegression::fit(std::span<const double> regressand) const {
  std::vector<double> out(impl_->M);
  fit(regressand, out);
  return out;
}

}  // namespace bsdelab
