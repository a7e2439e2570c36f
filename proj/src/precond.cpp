#include "gmrf/precond.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmrf/rng.hpp"

namespace gmrf {

// --- FactoredPreconditioner defaults ---

void FactoredPreconditioner::apply_finv(std::span<const double>, std::span<double>) const {
  throw CapabilityError("preconditioner does not support apply_finv");
}
void FactoredPreconditioner::apply_ftinv(std::span<const double>, std::span<double>) const {
  throw CapabilityError("preconditioner does not support apply_ftinv");
}
void FactoredPreconditioner::solve_ft(std::span<const double> u, std::span<double> x) const {
  if (!provides(Capability::apply_ftinv))
    throw CapabilityError("preconditioner does not support solve_ft");
  apply_ftinv(u, x);
}
Vector FactoredPreconditioner::sample(std::mt19937_64&) const {
  throw CapabilityError("preconditioner does not support sampling");
}
double FactoredPreconditioner::logdet_factor() const {
  throw CapabilityError("preconditioner does not support logdet_factor");
}
void FactoredPreconditioner::apply_factor(std::span<const double>, std::span<double>) const {
  throw CapabilityError("preconditioner does not support apply_factor");
}

// --- IdentityPreconditioner ---

IdentityPreconditioner::IdentityPreconditioner(std::int64_t n) : n_(n) {
  if (n < 1) throw DimensionError("IdentityPreconditioner: dimension must be positive");
}

namespace {
void copy_span(std::span<const double> in, std::span<double> out) {
  std::copy(in.begin(), in.end(), out.begin());
}
}  // namespace

void IdentityPreconditioner::apply_finv(std::span<const double> w, std::span<double> out) const {
  copy_span(w, out);
}
void IdentityPreconditioner::apply_ftinv(std::span<const double> w, std::span<double> out) const {
  copy_span(w, out);
}
void IdentityPreconditioner::solve_ft(std::span<const double> u, std::span<double> x) const {
  copy_span(u, x);
}
Vector IdentityPreconditioner::sample(std::mt19937_64& rng) const {
  return rng::standard_normal(rng, static_cast<std::size_t>(n_));
}
void IdentityPreconditioner::apply_factor(std::span<const double> w, std::span<double> out) const {
  copy_span(w, out);
}

std::shared_ptr<const FactoredPreconditioner> identity_preconditioner(std::int64_t n) {
  return std::make_shared<const IdentityPreconditioner>(n);
}

// --- CirculantShiftPreconditioner ---

CirculantShiftPreconditioner::CirculantShiftPreconditioner(
    std::shared_ptr<const BlockCirculantOperator> q, double alpha)
    : q_(std::move(q)), alpha_(alpha) {
  if (!q_) throw DimensionError("CirculantShiftPreconditioner: null operator");
  const Vector& lam = q_->eigenvalues();
  shifted_.resize(lam.size());
  w_finv_.resize(lam.size());
  w_f_.resize(lam.size());
  double logdet = 0.0;
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const double s = lam[k] + alpha;
    if (!(s > 0.0))
      throw NotSpdError("CirculantShiftPreconditioner: shifted spectrum not positive at index " +
                            std::to_string(k),
                        static_cast<std::int64_t>(k));
    shifted_[k] = s;
    w_f_[k] = std::sqrt(s);
    w_finv_[k] = 1.0 / w_f_[k];
    logdet += std::log(s);
  }
  logdet_factor_ = 0.5 * logdet;
}

void CirculantShiftPreconditioner::apply_finv(std::span<const double> w,
                                              std::span<double> out) const {
  q_->apply_mode_weights(w_finv_, w, out);
}
void CirculantShiftPreconditioner::apply_ftinv(std::span<const double> w,
                                               std::span<double> out) const {
  // F is symmetric (a circulant square root), so F^{-T} = F^{-1}.
  q_->apply_mode_weights(w_finv_, w, out);
}
void CirculantShiftPreconditioner::solve_ft(std::span<const double> u, std::span<double> x) const {
  q_->apply_mode_weights(w_finv_, u, x);
}
Vector CirculantShiftPreconditioner::sample(std::mt19937_64& rng) const {
  Vector z = rng::standard_normal(rng, static_cast<std::size_t>(dim()));
  Vector out(z.size());
  q_->apply_mode_weights(w_finv_, z, out);
  return out;
}
void CirculantShiftPreconditioner::apply_factor(std::span<const double> w,
                                                std::span<double> out) const {
  q_->apply_mode_weights(w_f_, w, out);
}

double CirculantShiftPreconditioner::preconditioned_lambda_min_bound() const {
  const Vector& lam = q_->eigenvalues();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lam.size(); ++k) lo = std::min(lo, lam[k] / shifted_[k]);
  return lo;
}

std::shared_ptr<const CirculantShiftPreconditioner> build_circulant_shift(
    std::shared_ptr<const BlockCirculantOperator> q, double alpha) {
  return std::make_shared<const CirculantShiftPreconditioner>(std::move(q), alpha);
}

// --- IncompleteCholeskyPreconditioner ---

namespace {

struct IctFactor {
  std::vector<std::int64_t> col_ptr, row_idx;
  Vector values;
  Vector diag_comp;
};

// Left-looking incomplete Cholesky with per-column threshold dropping and
// diagonal compensation: every dropped entry adds its magnitude to the two
// diagonals it couples, which keeps each Schur complement positive definite,
// so dropping alone can never break the factorisation.  Throws NotSpdError
// carrying the failing row on a nonpositive pivot (indefinite input).
IctFactor ict_factorise(const SparseOperator& q, double drop_tol, double shift) {
  const std::int64_t n = q.dim();
  const auto& rp = q.row_ptr();
  const auto& ci = q.col_idx();
  const auto& vals = q.values();

  // Column norms of Q (row norms by symmetry) drive the drop threshold.
  Vector col_norm(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t k = rp[i]; k < rp[i + 1]; ++k) s += vals[k] * vals[k];
    col_norm[i] = std::sqrt(s);
  }

  IctFactor f;
  f.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  f.row_idx.reserve(static_cast<std::size_t>(q.nnz()));
  f.values.reserve(static_cast<std::size_t>(q.nnz()));

  // pending[r]: positions of already-stored entries L(r, j), j < r, grouped by
  // the row r they will update when column r is eliminated.
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> pending(
      static_cast<std::size_t>(n));
  Vector work(static_cast<std::size_t>(n), 0.0);
  std::vector<std::int64_t> stamp(static_cast<std::size_t>(n), -1);
  std::vector<std::int64_t> touched;
  f.diag_comp.assign(static_cast<std::size_t>(n), 0.0);

  for (std::int64_t k = 0; k < n; ++k) {
    touched.clear();
    auto scatter = [&](std::int64_t r, double v) {
      if (stamp[r] != k) {
        stamp[r] = k;
        work[r] = 0.0;
        touched.push_back(r);
      }
      work[r] += v;
    };
    // Lower part of column k of Q (= row k entries at columns >= k).
    for (std::int64_t p = rp[k]; p < rp[k + 1]; ++p)
      if (ci[p] >= k) scatter(ci[p], vals[p] + (ci[p] == k ? shift : 0.0));
    scatter(k, f.diag_comp[k]);

    // Updates from previously eliminated columns j with L(k, j) != 0.
    for (const auto& [j, pos] : pending[k]) {
      const double lkj = f.values[pos];
      for (std::int64_t p = pos; p < f.col_ptr[j + 1]; ++p)
        scatter(f.row_idx[p], -lkj * f.values[p]);
    }

    // Dropping happens before the pivot so its compensation lands on it.
    std::sort(touched.begin(), touched.end());
    const double threshold = drop_tol * col_norm[k];
    double pivot = work[k];
    for (std::int64_t r : touched) {
      if (r <= k) continue;
      if (std::abs(work[r]) < threshold) {
        pivot += std::abs(work[r]);
        f.diag_comp[r] += std::abs(work[r]);
        f.diag_comp[k] += std::abs(work[r]);
        work[r] = 0.0;
      }
    }

    if (!(pivot > 0.0))
      throw NotSpdError("incomplete Cholesky: nonpositive pivot at row " + std::to_string(k), k);
    const double lkk = std::sqrt(pivot);

    f.row_idx.push_back(k);
    f.values.push_back(lkk);
    for (std::int64_t r : touched) {
      if (r <= k || work[r] == 0.0) continue;
      f.row_idx.push_back(r);
      f.values.push_back(work[r] / lkk);
    }
    f.col_ptr[k + 1] = static_cast<std::int64_t>(f.values.size());
    // Register the stored off-diagonals for the columns they will update.
    for (std::int64_t p = f.col_ptr[k] + 1; p < f.col_ptr[k + 1]; ++p)
      pending[f.row_idx[p]].emplace_back(k, p);
  }
  return f;
}

}  // namespace

std::shared_ptr<const IncompleteCholeskyPreconditioner> IncompleteCholeskyPreconditioner::build(
    const SparseOperator& q, double drop_tol) {
  if (!(drop_tol >= 0.0)) throw std::invalid_argument("build_ict: drop_tol must be >= 0");
  auto pc = std::shared_ptr<IncompleteCholeskyPreconditioner>(
      new IncompleteCholeskyPreconditioner());
  pc->n_ = q.dim();
  pc->drop_tol_ = drop_tol;

  IctFactor f;
  try {
    f = ict_factorise(q, drop_tol, 0.0);
  } catch (const NotSpdError&) {
    // One retry with a small diagonal shift before giving up.
    const Vector d = q.diagonal();
    const double mean_diag = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    pc->shift_ = 1e-2 * mean_diag;
    f = ict_factorise(q, drop_tol, pc->shift_);
  }
  pc->col_ptr_ = std::move(f.col_ptr);
  pc->row_idx_ = std::move(f.row_idx);
  pc->values_ = std::move(f.values);
  pc->diag_comp_ = std::move(f.diag_comp);
  return pc;
}

std::shared_ptr<const IncompleteCholeskyPreconditioner> build_ict(const SparseOperator& q,
                                                                  double drop_tol) {
  return IncompleteCholeskyPreconditioner::build(q, drop_tol);
}

void IncompleteCholeskyPreconditioner::apply_finv(std::span<const double> w,
                                                  std::span<double> out) const {
  // Forward substitution F y = w, column oriented.
  copy_span(w, out);
  for (std::int64_t k = 0; k < n_; ++k) {
    const std::int64_t head = col_ptr_[k];
    out[k] /= values_[head];
    const double yk = out[k];
    for (std::int64_t p = head + 1; p < col_ptr_[k + 1]; ++p)
      out[row_idx_[p]] -= values_[p] * yk;
  }
}

void IncompleteCholeskyPreconditioner::apply_ftinv(std::span<const double> w,
                                                   std::span<double> out) const {
  // Back substitution F^T x = w using the columns of F.
  copy_span(w, out);
  for (std::int64_t k = n_ - 1; k >= 0; --k) {
    const std::int64_t head = col_ptr_[k];
    double s = out[k];
    for (std::int64_t p = head + 1; p < col_ptr_[k + 1]; ++p)
      s -= values_[p] * out[row_idx_[p]];
    out[k] = s / values_[head];
  }
}

void IncompleteCholeskyPreconditioner::solve_ft(std::span<const double> u,
                                                std::span<double> x) const {
  apply_ftinv(u, x);
}

Vector IncompleteCholeskyPreconditioner::sample(std::mt19937_64& rng) const {
  Vector z = rng::standard_normal(rng, static_cast<std::size_t>(n_));
  Vector out(z.size());
  apply_ftinv(z, out);
  return out;
}

double IncompleteCholeskyPreconditioner::logdet_factor() const {
  double s = 0.0;
  for (std::int64_t k = 0; k < n_; ++k) s += std::log(values_[col_ptr_[k]]);
  return s;
}

void IncompleteCholeskyPreconditioner::apply_factor(std::span<const double> w,
                                                    std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int64_t k = 0; k < n_; ++k) {
    const double wk = w[k];
    for (std::int64_t p = col_ptr_[k]; p < col_ptr_[k + 1]; ++p)
      out[row_idx_[p]] += values_[p] * wk;
  }
}

// --- DenseCholeskyPreconditioner ---

DenseCholeskyPreconditioner::DenseCholeskyPreconditioner(const Eigen::MatrixXd& m) : llt_(m) {
  if (m.rows() != m.cols()) throw DimensionError("DenseCholeskyPreconditioner: not square");
  if (llt_.info() != Eigen::Success)
    throw NotSpdError("DenseCholeskyPreconditioner: matrix is not positive definite");
  logdet_factor_ = llt_.matrixLLT().diagonal().array().log().sum();
}

void DenseCholeskyPreconditioner::apply_finv(std::span<const double> w,
                                             std::span<double> out) const {
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(out.size()));
  ov = llt_.matrixL().solve(wv);
}
void DenseCholeskyPreconditioner::apply_ftinv(std::span<const double> w,
                                              std::span<double> out) const {
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(out.size()));
  ov = llt_.matrixU().solve(wv);
}
void DenseCholeskyPreconditioner::solve_ft(std::span<const double> u, std::span<double> x) const {
  apply_ftinv(u, x);
}
Vector DenseCholeskyPreconditioner::sample(std::mt19937_64& rng) const {
  Vector z = rng::standard_normal(rng, static_cast<std::size_t>(dim()));
  Vector out(z.size());
  apply_ftinv(z, out);
  return out;
}
void DenseCholeskyPreconditioner::apply_factor(std::span<const double> w,
                                               std::span<double> out) const {
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(out.size()));
  ov = llt_.matrixL() * wv;
}

// --- PreconditionedOperator & preconditioned sampling ---

PreconditionedOperator::PreconditionedOperator(const LinearOperator& q,
                                               const FactoredPreconditioner& p)
    : q_(q), p_(p) {
  if (q.dim() != p.dim())
    throw DimensionError("PreconditionedOperator: operator/preconditioner dimension mismatch");
  if (!p.provides(Capability::apply_finv) || !p.provides(Capability::apply_ftinv))
    throw CapabilityError("PreconditionedOperator: needs apply_finv and apply_ftinv");
}

void PreconditionedOperator::apply(std::span<const double> x, std::span<double> y) const {
  // Per-call scratch: the wrapped operator may itself be composite.
  Vector t1(x.size()), t2(x.size());
  p_.apply_ftinv(x, t1);
  q_.apply(t1, t2);
  p_.apply_finv(t2, y);
}

SampleResult preconditioned_sample(const LinearOperator& q, const FactoredPreconditioner& p,
                                   const Vector& z, const SamplerOptions& opts) {
  if (!p.provides(Capability::solve_ft))
    throw CapabilityError("preconditioned_sample: preconditioner cannot solve F^T x = u");
  const PreconditionedOperator op(q, p);
  SampleResult inner = lanczos_sample(op, z, opts);
  if (!inner.sample.empty()) {
    Vector x(inner.sample.size());
    p.solve_ft(inner.sample, x);
    inner.sample = std::move(x);
  }
  return inner;
}

SampleResult preconditioned_sample(const LinearOperator& q, const FactoredPreconditioner& p,
                                   const SamplerOptions& opts) {
  auto eng = rng::stream(opts.seed);
  return preconditioned_sample(q, p, rng::standard_normal(eng, static_cast<std::size_t>(q.dim())),
                               opts);
}

}  // namespace gmrf
