#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "gmrf/krylov.hpp"
#include "gmrf/operators.hpp"

namespace gmrf {

// The five factored-preconditioner capabilities.  M = F F^T; a preconditioner
// advertises which applications of F it supports.
enum class Capability {
  apply_finv,    // w -> F^{-1} w
  apply_ftinv,   // w -> F^{-T} w
  solve_ft,      // solve F^T x = u
  sample,        // draw from N(0, M^{-1})
  logdet_factor  // log det F
};

class FactoredPreconditioner {
 public:
  virtual ~FactoredPreconditioner() = default;
  virtual std::int64_t dim() const = 0;
  virtual bool provides(Capability c) const = 0;

  virtual void apply_finv(std::span<const double> w, std::span<double> out) const;
  virtual void apply_ftinv(std::span<const double> w, std::span<double> out) const;
  // Defaults to apply_ftinv, which is the same map; kept separate so a
  // preconditioner can advertise the solve without exposing the factor.
  virtual void solve_ft(std::span<const double> u, std::span<double> x) const;
  virtual Vector sample(std::mt19937_64& rng) const;
  virtual double logdet_factor() const;

  // w -> F w.  Not part of the capability set proper; available on all
  // built-in preconditioners for round-trip checks and M matvecs.
  virtual void apply_factor(std::span<const double> w, std::span<double> out) const;
};

// F = I.  The preconditioned sampler collapses to the plain one.
class IdentityPreconditioner final : public FactoredPreconditioner {
 public:
  explicit IdentityPreconditioner(std::int64_t n);
  std::int64_t dim() const override { return n_; }
  bool provides(Capability) const override { return true; }
  void apply_finv(std::span<const double> w, std::span<double> out) const override;
  void apply_ftinv(std::span<const double> w, std::span<double> out) const override;
  void solve_ft(std::span<const double> u, std::span<double> x) const override;
  Vector sample(std::mt19937_64& rng) const override;
  double logdet_factor() const override { return 0.0; }
  void apply_factor(std::span<const double> w, std::span<double> out) const override;

 private:
  std::int64_t n_;
};

std::shared_ptr<const FactoredPreconditioner> identity_preconditioner(std::int64_t n);

// M = Q + alpha I for block-circulant Q.  F is itself circulant with spectrum
// sqrt(eigenvalue + alpha); every capability is a spectral filter, O(n log n).
class CirculantShiftPreconditioner final : public FactoredPreconditioner {
 public:
  CirculantShiftPreconditioner(std::shared_ptr<const BlockCirculantOperator> q, double alpha);
  std::int64_t dim() const override { return q_->dim(); }
  bool provides(Capability) const override { return true; }
  void apply_finv(std::span<const double> w, std::span<double> out) const override;
  void apply_ftinv(std::span<const double> w, std::span<double> out) const override;
  void solve_ft(std::span<const double> u, std::span<double> x) const override;
  Vector sample(std::mt19937_64& rng) const override;
  double logdet_factor() const override { return logdet_factor_; }
  void apply_factor(std::span<const double> w, std::span<double> out) const override;

  double alpha() const { return alpha_; }
  const Vector& shifted_spectrum() const { return shifted_; }
  // Exact lower bound for the smallest eigenvalue of F^{-1} Q F^{-T}
  // (= min eigenvalue/(eigenvalue+alpha)); tight input for the sampler bound.
  double preconditioned_lambda_min_bound() const;

 private:
  std::shared_ptr<const BlockCirculantOperator> q_;
  double alpha_;
  Vector shifted_;      // eigenvalue + alpha
  Vector w_finv_;       // (eigenvalue + alpha)^{-1/2}
  Vector w_f_;          // (eigenvalue + alpha)^{+1/2}
  double logdet_factor_;
};

std::shared_ptr<const CirculantShiftPreconditioner> build_circulant_shift(
    std::shared_ptr<const BlockCirculantOperator> q, double alpha);

// Threshold incomplete Cholesky M = F F^T with lower-triangular sparse F.
// Candidate entries whose pre-division magnitude falls below
// drop_tol * ||Q(:,k)||_2 are dropped after elimination; the diagonal is
// always kept.  Every dropped value adds its magnitude to the two diagonals
// it couples, which keeps the elimination positive definite on SPD input
// (drop_tol = 0 reproduces the exact Cholesky, compensation-free).  A
// nonpositive pivot triggers one retry with diagonal shift
// 1e-2 * mean(diag(Q)); a second failure throws NotSpdError carrying the row.
class IncompleteCholeskyPreconditioner final : public FactoredPreconditioner {
 public:
  static std::shared_ptr<const IncompleteCholeskyPreconditioner> build(const SparseOperator& q,
                                                                       double drop_tol);

  std::int64_t dim() const override { return n_; }
  bool provides(Capability) const override { return true; }
  void apply_finv(std::span<const double> w, std::span<double> out) const override;
  void apply_ftinv(std::span<const double> w, std::span<double> out) const override;
  void solve_ft(std::span<const double> u, std::span<double> x) const override;
  Vector sample(std::mt19937_64& rng) const override;
  double logdet_factor() const override;
  void apply_factor(std::span<const double> w, std::span<double> out) const override;

  double drop_tol() const { return drop_tol_; }
  double diagonal_shift() const { return shift_; }
  std::int64_t factor_nnz() const { return static_cast<std::int64_t>(values_.size()); }
  // Factor in compressed-sparse-column form, rows ascending within a column.
  const std::vector<std::int64_t>& col_ptr() const { return col_ptr_; }
  const std::vector<std::int64_t>& row_idx() const { return row_idx_; }
  const Vector& values() const { return values_; }
  // Per-row total of dropped magnitude folded into the diagonal:
  // (F F^T)_{kk} == Q_kk + diagonal_shift + diagonal_compensation[k].
  const Vector& diagonal_compensation() const { return diag_comp_; }

 private:
  IncompleteCholeskyPreconditioner() = default;
  std::int64_t n_ = 0;
  double drop_tol_ = 0.0;
  double shift_ = 0.0;
  std::vector<std::int64_t> col_ptr_, row_idx_;
  Vector values_;
  Vector diag_comp_;
};

std::shared_ptr<const IncompleteCholeskyPreconditioner> build_ict(const SparseOperator& q,
                                                                  double drop_tol);

// Exact dense Cholesky of an explicitly given M; the perfect-preconditioner
// baseline and the desk-scale reference factor.
class DenseCholeskyPreconditioner final : public FactoredPreconditioner {
 public:
  explicit DenseCholeskyPreconditioner(const Eigen::MatrixXd& m);
  std::int64_t dim() const override { return llt_.matrixL().rows(); }
  bool provides(Capability) const override { return true; }
  void apply_finv(std::span<const double> w, std::span<double> out) const override;
  void apply_ftinv(std::span<const double> w, std::span<double> out) const override;
  void solve_ft(std::span<const double> u, std::span<double> x) const override;
  Vector sample(std::mt19937_64& rng) const override;
  double logdet_factor() const override { return logdet_factor_; }
  void apply_factor(std::span<const double> w, std::span<double> out) const override;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double logdet_factor_ = 0.0;
};

// F^{-1} Q F^{-T}, the symmetrically preconditioned operator.  Non-owning:
// both referents must outlive the instance.
class PreconditionedOperator final : public LinearOperator {
 public:
  PreconditionedOperator(const LinearOperator& q, const FactoredPreconditioner& p);
  std::int64_t dim() const override { return q_.dim(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  const LinearOperator& q_;
  const FactoredPreconditioner& p_;
};

// Preconditioned sampling: run the Krylov sampler on F^{-1} Q F^{-T} and push
// the result through F^T x = u, which leaves the target precision exactly Q.
// The returned report is the inner sampler's, and any recorded iterates stay
// in the preconditioned coordinates.
SampleResult preconditioned_sample(const LinearOperator& q, const FactoredPreconditioner& p,
                                   const Vector& z, const SamplerOptions& opts);
SampleResult preconditioned_sample(const LinearOperator& q, const FactoredPreconditioner& p,
                                   const SamplerOptions& opts);

}  // namespace gmrf
