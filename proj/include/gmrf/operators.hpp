#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmrf/errors.hpp"
#include "gmrf/fft.hpp"
#include "gmrf/vec.hpp"

namespace gmrf {

// Symmetric linear operator with a matrix-free matvec.  Operators are
// immutable after construction and safe to share across threads; apply() uses
// per-call (thread_local) scratch only.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::int64_t dim() const = 0;
  // y = A x with x.size() == y.size() == dim().  Unchecked fast path; use
  // matvec() for the validated entry point.
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

// Validated matvec: checks dimensions and input finiteness.
Vector matvec(const LinearOperator& op, const Vector& v);

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(Vector diag);
  std::int64_t dim() const override { return static_cast<std::int64_t>(diag_.size()); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  const Vector& diagonal() const { return diag_; }

 private:
  Vector diag_;
};

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

// Compressed-sparse-row symmetric operator with both triangles stored.
// Duplicate coordinate entries are summed, missing diagonal slots are
// materialised as explicit zeros, and the assembled matrix must be
// numerically symmetric to 1e-12 relative.
class SparseOperator final : public LinearOperator {
 public:
  SparseOperator(std::int64_t n, std::vector<Triplet> entries);

  std::int64_t dim() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int64_t>& col_idx() const { return col_idx_; }
  const Vector& values() const { return values_; }
  Vector diagonal() const;

 private:
  std::int64_t n_;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int64_t> col_idx_;
  Vector values_;
};

// Block-circulant operator on an n1 x n2 torus, defined by its first column
// (`base`, row-major) and applied through the 2-D FFT.  The base must carry
// the torus symmetry base[i,j] == base[n1-i mod n1, n2-j mod n2], which makes
// the DFT of the base real; construction rejects bases whose transform has a
// nontrivial imaginary part.  Eigenvalue positivity is *not* required for
// plain matvecs and is checked where an SPD operator is needed.
class BlockCirculantOperator final : public LinearOperator {
 public:
  BlockCirculantOperator(int n1, int n2, Vector base);

  std::int64_t dim() const override { return static_cast<std::int64_t>(n1_) * n2_; }
  void apply(std::span<const double> x, std::span<double> y) const override;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  const Vector& base() const { return base_; }

  // Raw eigenvalue array (2-D DFT of the base), no sign check.
  const Vector& eigenvalues() const { return eigvals_; }
  // Eigenvalues validated as an SPD spectrum; throws NotSpdError carrying the
  // offending index when any eigenvalue is <= 0.
  Vector spectrum() const;
  bool is_spd() const;

  // out = F^H diag(weights) F in / n, the generic spectral filter.  The
  // imaginary residue of the round trip is checked against
  // 1e-10 * max|weights| * ||in||; anything larger is an error, not a silent
  // truncation.
  void apply_mode_weights(std::span<const double> weights,
                          std::span<const double> in,
                          std::span<double> out) const;

  // Spectral power filter: weights = eigenvalue^exponent.  Requires an SPD
  // spectrum unless the exponent is a non-negative integer.
  Vector filter_apply(const Vector& v, double exponent) const;
  Vector solve(const Vector& b) const { return filter_apply(b, -1.0); }

  // [(Q + shift I)^{-1}]_{kk}: constant along the diagonal for a circulant,
  // equal to the mean of 1/(eigenvalue + shift).
  double inverse_diagonal_entry(double shift = 0.0) const;

 private:
  int n1_, n2_;
  Vector base_;
  Vector eigvals_;
  std::shared_ptr<const Fft2d> fft_;
};

// Weighted sum of operators of equal dimension, applied term by term in the
// order given.
class SumOperator final : public LinearOperator {
 public:
  using Term = std::pair<double, std::shared_ptr<const LinearOperator>>;
  explicit SumOperator(std::vector<Term> terms);

  std::int64_t dim() const override;
  void apply(std::span<const double> x, std::span<double> y) const override;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

// Explicitly stored symmetric matrix, for oracles and desk-scale work only
// (dim <= 4096, symmetric to 1e-12 relative).
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd a);
  std::int64_t dim() const override { return a_.rows(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  Eigen::MatrixXd a_;
};

// Column-by-column materialisation through matvecs on unit vectors.
DenseOperator to_dense(const LinearOperator& op);

// Reads a coordinate-format real Matrix Market file (symmetric or general
// with numerically symmetric content) into a SparseOperator with both
// triangles stored.
SparseOperator load_matrix_market(const std::filesystem::path& path);

// Pass-through wrapper counting apply() calls; benchmark instrumentation.
class CountingOperator final : public LinearOperator {
 public:
  explicit CountingOperator(const LinearOperator& inner) : inner_(inner) {}
  std::int64_t dim() const override { return inner_.dim(); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    inner_.apply(x, y);
  }
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  const LinearOperator& inner_;
  mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace gmrf
