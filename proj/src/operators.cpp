#include "gmrf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>

namespace gmrf {

Vector matvec(const LinearOperator& op, const Vector& v) {
  if (static_cast<std::int64_t>(v.size()) != op.dim())
    throw DimensionError("matvec: vector length " + std::to_string(v.size()) +
                         " does not match operator dimension " + std::to_string(op.dim()));
  if (!vec::all_finite(v)) throw NumericError("matvec: non-finite input vector");
  Vector y(v.size());
  op.apply(v, y);
  return y;
}

// --- DiagonalOperator ---

DiagonalOperator::DiagonalOperator(Vector diag) : diag_(std::move(diag)) {
  if (diag_.empty()) throw DimensionError("DiagonalOperator: empty diagonal");
  if (!vec::all_finite(diag_)) throw NumericError("DiagonalOperator: non-finite entries");
}

void DiagonalOperator::apply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < diag_.size(); ++i) y[i] = diag_[i] * x[i];
}

// --- SparseOperator ---

SparseOperator::SparseOperator(std::int64_t n, std::vector<Triplet> entries) : n_(n) {
  if (n < 1) throw DimensionError("SparseOperator: dimension must be positive");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw DimensionError("SparseOperator: index out of range");
    if (!std::isfinite(t.value)) throw NumericError("SparseOperator: non-finite value");
  }
  // Diagonal slots are always present so that factorisations and graph walks
  // can assume them.
  for (std::int64_t i = 0; i < n; ++i) entries.push_back({i, i, 0.0});
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    std::size_t j = k;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[k].row &&
           entries[j].col == entries[k].col) {
      sum += entries[j].value;
      ++j;
    }
    col_idx_.push_back(entries[k].col);
    values_.push_back(sum);
    ++row_ptr_[static_cast<std::size_t>(entries[k].row) + 1];
    k = j;
  }
  for (std::int64_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];

  // Numeric symmetry check against the transposed entry.
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::int64_t j = col_idx_[k];
      if (j <= i) continue;
      double vt = 0.0;
      const auto lo = col_idx_.begin() + row_ptr_[j];
      const auto hi = col_idx_.begin() + row_ptr_[j + 1];
      const auto it = std::lower_bound(lo, hi, i);
      if (it != hi && *it == i) vt = values_[it - col_idx_.begin()];
      if (std::abs(values_[k] - vt) > 1e-12 * std::max(scale, 1e-300))
        throw NumericError("SparseOperator: matrix is not symmetric at (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  for (std::int64_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

Vector SparseOperator::diagonal() const {
  Vector d(static_cast<std::size_t>(n_), 0.0);
  for (std::int64_t i = 0; i < n_; ++i)
    for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (col_idx_[k] == i) d[i] = values_[k];
  return d;
}

// --- BlockCirculantOperator ---

namespace {

thread_local std::vector<std::complex<double>> tl_buf_a;
thread_local std::vector<std::complex<double>> tl_buf_b;

}  // namespace

BlockCirculantOperator::BlockCirculantOperator(int n1, int n2, Vector base)
    : n1_(n1), n2_(n2), base_(std::move(base)) {
  if (n1 < 1 || n2 < 1) throw DimensionError("BlockCirculantOperator: bad grid");
  const std::int64_t n = static_cast<std::int64_t>(n1) * n2;
  if (static_cast<std::int64_t>(base_.size()) != n)
    throw DimensionError("BlockCirculantOperator: base length does not match grid");
  if (!vec::all_finite(base_)) throw NumericError("BlockCirculantOperator: non-finite base");
  fft_ = Fft2d::plan(n1, n2);

  std::vector<std::complex<double>> in(base_.begin(), base_.end());
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  fft_->forward(in.data(), out.data());

  double scale = 0.0;
  for (double v : base_) scale += std::abs(v);
  eigvals_.resize(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    if (std::abs(out[k].imag()) > 1e-10 * std::max(scale, 1e-300))
      throw NumericError("BlockCirculantOperator: base lacks torus symmetry, "
                         "spectrum is not real (mode " + std::to_string(k) + ")");
    eigvals_[k] = out[k].real();
  }
}

Vector BlockCirculantOperator::spectrum() const {
  for (std::size_t k = 0; k < eigvals_.size(); ++k) {
    if (!(eigvals_[k] > 0.0))
      throw NotSpdError("BlockCirculantOperator: not SPD, eigenvalue " +
                        std::to_string(eigvals_[k]) + " at index " + std::to_string(k),
                        static_cast<std::int64_t>(k));
  }
  return eigvals_;
}

bool BlockCirculantOperator::is_spd() const {
  return std::all_of(eigvals_.begin(), eigvals_.end(), [](double v) { return v > 0.0; });
}

void BlockCirculantOperator::apply_mode_weights(std::span<const double> weights,
                                                std::span<const double> in,
                                                std::span<double> out) const {
  const std::int64_t n = dim();
  tl_buf_a.resize(static_cast<std::size_t>(n));
  tl_buf_b.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) tl_buf_a[i] = in[i];
  fft_->forward(tl_buf_a.data(), tl_buf_b.data());
  for (std::int64_t k = 0; k < n; ++k) tl_buf_b[k] *= weights[k];
  fft_->inverse(tl_buf_b.data(), tl_buf_a.data());

  const double inv_n = 1.0 / static_cast<double>(n);
  double imag2 = 0.0;
  double wmax = 0.0;
  for (std::int64_t k = 0; k < n; ++k) wmax = std::max(wmax, std::abs(weights[k]));
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = tl_buf_a[i].real() * inv_n;
    const double im = tl_buf_a[i].imag() * inv_n;
    imag2 += im * im;
  }
  // Residue is measured against the spectral scale of the filter; an absolute
  // 1e-10 * ||in|| test would reject legitimate round trips whenever
  // max|weights| is large.
  const double in_norm = vec::nrm2(in);
  if (std::sqrt(imag2) > 1e-10 * std::max(wmax, 1e-300) * std::max(in_norm, 1e-300))
    throw NumericError("BlockCirculantOperator: FFT imaginary residue above tolerance");
}

void BlockCirculantOperator::apply(std::span<const double> x, std::span<double> y) const {
  apply_mode_weights(eigvals_, x, y);
}

Vector BlockCirculantOperator::filter_apply(const Vector& v, double exponent) const {
  if (static_cast<std::int64_t>(v.size()) != dim())
    throw DimensionError("filter_apply: dimension mismatch");
  const bool needs_spd =
      exponent < 0.0 || exponent != std::floor(exponent);
  Vector w(eigvals_.size());
  for (std::size_t k = 0; k < eigvals_.size(); ++k) {
    if (needs_spd && !(eigvals_[k] > 0.0))
      throw NotSpdError("filter_apply: non-positive eigenvalue at index " + std::to_string(k),
                        static_cast<std::int64_t>(k));
    w[k] = std::pow(eigvals_[k], exponent);
  }
  Vector out(v.size());
  apply_mode_weights(w, v, out);
  return out;
}

double BlockCirculantOperator::inverse_diagonal_entry(double shift) const {
  double s = 0.0;
  for (std::size_t k = 0; k < eigvals_.size(); ++k) {
    const double lam = eigvals_[k] + shift;
    if (!(lam > 0.0))
      throw NotSpdError("inverse_diagonal_entry: non-positive shifted eigenvalue",
                        static_cast<std::int64_t>(k));
    s += 1.0 / lam;
  }
  return s / static_cast<double>(eigvals_.size());
}

// --- SumOperator ---

SumOperator::SumOperator(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DimensionError("SumOperator: no terms");
  for (const auto& [w, op] : terms_) {
    if (!op) throw DimensionError("SumOperator: null term");
    if (op->dim() != terms_.front().second->dim())
      throw DimensionError("SumOperator: mismatched term dimensions");
    if (!std::isfinite(w)) throw NumericError("SumOperator: non-finite weight");
  }
}

std::int64_t SumOperator::dim() const { return terms_.front().second->dim(); }

void SumOperator::apply(std::span<const double> x, std::span<double> y) const {
  // Per-call scratch: constituents may themselves be composite operators.
  Vector tmp(x.size());
  std::fill(y.begin(), y.end(), 0.0);
  for (const auto& [w, op] : terms_) {
    op->apply(x, tmp);
    vec::axpy(w, tmp, y);
  }
}

// --- DenseOperator ---

DenseOperator::DenseOperator(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw DimensionError("DenseOperator: matrix not square");
  if (a_.rows() > 4096) throw DimensionError("DenseOperator: dimension cap 4096 exceeded");
  const double scale = a_.cwiseAbs().maxCoeff();
  const double asym = (a_ - a_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1e-300))
    throw NumericError("DenseOperator: matrix is not symmetric to 1e-12 relative");
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  yv = a_ * xv;
}

DenseOperator to_dense(const LinearOperator& op) {
  const std::int64_t n = op.dim();
  if (n > 4096) throw DimensionError("to_dense: dimension cap 4096 exceeded");
  Eigen::MatrixXd a(n, n);
  Vector e(static_cast<std::size_t>(n), 0.0);
  Vector col(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    for (std::int64_t i = 0; i < n; ++i) a(i, j) = col[i];
    e[j] = 0.0;
  }
  return DenseOperator(std::move(a));
}

// --- Matrix Market reader ---

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

SparseOperator load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (lower(tag) != "%%matrixmarket" || lower(object) != "matrix")
    throw ParseError(path.string() + ": not a Matrix Market file");
  if (lower(format) != "coordinate")
    throw ParseError(path.string() + ": only coordinate format is supported");
  field = lower(field);
  if (field != "real" && field != "integer")
    throw ParseError(path.string() + ": only real matrices are supported");
  symmetry = lower(symmetry);
  if (symmetry != "symmetric" && symmetry != "general")
    throw ParseError(path.string() + ": symmetry must be symmetric or general");

  // Skip comments and blanks.
  do {
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing size line");
  } while (!line.empty() && line[0] == '%');

  std::int64_t rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> nnz)) throw ParseError(path.string() + ": bad size line");
  }
  if (rows != cols) throw ParseError(path.string() + ": matrix must be square");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(symmetry == "symmetric" ? 2 * nnz : nnz));
  for (std::int64_t k = 0; k < nnz; ++k) {
    std::int64_t i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v))
      throw ParseError(path.string() + ": truncated entry list at entry " + std::to_string(k));
    // One-based on disk.
    i -= 1;
    j -= 1;
    if (i < 0 || i >= rows || j < 0 || j >= rows)
      throw ParseError(path.string() + ": index out of range at entry " + std::to_string(k));
    entries.push_back({i, j, v});
    if (symmetry == "symmetric" && i != j) entries.push_back({j, i, v});
  }
  try {
    return SparseOperator(rows, std::move(entries));
  } catch (const NumericError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace gmrf
