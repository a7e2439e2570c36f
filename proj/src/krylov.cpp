#include "gmrf/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmrf/precond.hpp"
#include "gmrf/rng.hpp"
#include "gmrf/tridiag.hpp"

namespace gmrf {

namespace {

// Lanczos basis stored as contiguous rows.
struct Basis {
  explicit Basis(std::size_t n) : n(n) {}
  std::size_t n;
  std::size_t count = 0;
  std::vector<double> data;
  void push(std::span<const double> v) {
    data.insert(data.end(), v.begin(), v.end());
    ++count;
  }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * n, n}; }
};

void full_reorthogonalise(std::span<double> w, const Basis& basis) {
  // Two classical Gram-Schmidt passes over the whole basis.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < basis.count; ++i) {
      const auto vi = basis.row(i);
      vec::axpy(-vec::dot(vi, w), vi, w);
    }
  }
}

double smallest_ritz(std::span<const double> alphas, std::span<const double> betas_inner) {
  thread_local std::vector<double> vals, w;
  tridiag_eigen_first_row(alphas, betas_inner, vals, w);
  return *std::min_element(vals.begin(), vals.end());
}

void validate_options(const SamplerOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("SamplerOptions: tolerance must be > 0");
  if (opts.max_iterations < 1)
    throw std::invalid_argument("SamplerOptions: max_iterations must be >= 1");
  if (opts.bound_check_stride < 1)
    throw std::invalid_argument("SamplerOptions: bound_check_stride must be >= 1");
  if (opts.lambda_min && !(*opts.lambda_min > 0.0))
    throw std::invalid_argument("SamplerOptions: lambda_min must be > 0");
  if (opts.record_iterates && !opts.keep_basis)
    throw std::invalid_argument("SamplerOptions: record_iterates requires keep_basis");
}

// Relative threshold under which a Lanczos residual counts as an exact
// invariant-subspace termination.
constexpr double kBreakdownRel = 1e-11;

}  // namespace

SampleResult lanczos_sample(const LinearOperator& q, const SamplerOptions& opts) {
  auto eng = rng::stream(opts.seed);
  return lanczos_sample(q, rng::standard_normal(eng, static_cast<std::size_t>(q.dim())), opts);
}

SampleResult lanczos_sample(const LinearOperator& q, const Vector& z, const SamplerOptions& opts) {
  validate_options(opts);
  const std::int64_t n = q.dim();
  if (static_cast<std::int64_t>(z.size()) != n)
    throw DimensionError("lanczos_sample: z length does not match operator dimension");
  if (!vec::all_finite(z)) throw NumericError("lanczos_sample: non-finite z");

  SampleResult result;
  ConvergenceReport& report = result.report;
  report.tolerance = opts.tolerance;
  report.znorm = vec::nrm2(z);
  report.lambda_min_source = opts.lambda_min ? LambdaMinSource::user : LambdaMinSource::ritz;

  if (report.znorm == 0.0) {
    if (opts.keep_basis) result.sample.assign(static_cast<std::size_t>(n), 0.0);
    report.converged = true;
    report.lambda_min_used = opts.lambda_min.value_or(0.0);
    return result;
  }

  const bool store = opts.keep_basis || opts.reorth == Reorth::full;
  Basis basis(static_cast<std::size_t>(n));
  Vector v_prev, v_cur(z), w(static_cast<std::size_t>(n));
  vec::scal(1.0 / report.znorm, v_cur);
  if (store) basis.push(v_cur);

  double beta_prev = 0.0, t_prev = 0.0, rho = 1.0, scale = 0.0;
  double lam = opts.lambda_min.value_or(std::numeric_limits<double>::quiet_NaN());
  bool done = false;

  for (int m = 1; m <= opts.max_iterations && !done; ++m) {
    q.apply(v_cur, w);
    if (m > 1) vec::axpy(-beta_prev, v_prev, w);
    const double alpha = vec::dot(v_cur, w);
    vec::axpy(-alpha, v_cur, w);
    if (opts.reorth == Reorth::full) full_reorthogonalise(w, basis);
    const double beta = vec::nrm2(w);

    report.alphas.push_back(alpha);
    report.betas.push_back(beta);
    scale = std::max(scale, std::abs(alpha) + beta + beta_prev);

    const double t = (m == 1) ? alpha : alpha - beta_prev * beta_prev / t_prev;
    if (!(t > 0.0))
      throw NotSpdError("lanczos_sample: operator is not positive definite "
                        "(nonpositive pivot at iteration " + std::to_string(m) + ")", m - 1);
    rho *= beta / t;

    const bool breakdown = beta <= kBreakdownRel * scale;
    const bool at_stride = (m % opts.bound_check_stride == 0);
    if (!opts.lambda_min && (m == 1 || at_stride || breakdown || m == opts.max_iterations)) {
      lam = smallest_ritz(report.alphas,
                          std::span<const double>(report.betas.data(), report.betas.size() - 1));
      if (!(lam > 0.0))
        throw NotSpdError("lanczos_sample: nonpositive Ritz value, operator is not SPD");
    }
    const double bound = breakdown ? 0.0 : rho * report.znorm / std::sqrt(lam);
    report.bounds.push_back(bound);
    report.iterations = m;

    const bool converged_now = bound <= opts.tolerance || breakdown;
    if (opts.record_iterates &&
        (at_stride || converged_now || m == opts.max_iterations)) {
      Vector y = tridiag_apply_to_e1(
          report.alphas, std::span<const double>(report.betas.data(), report.betas.size() - 1),
          [](double theta) {
            if (!(theta > 0.0))
              throw NotSpdError("lanczos_sample: nonpositive Ritz value in square root");
            return 1.0 / std::sqrt(theta);
          });
      Vector x(static_cast<std::size_t>(n), 0.0);
      for (std::size_t j = 0; j < basis.count; ++j) vec::axpy(report.znorm * y[j], basis.row(j), x);
      result.iterates.push_back(std::move(x));
      result.iterate_iterations.push_back(m);
    }

    if (converged_now) {
      report.converged = true;
      report.breakdown = breakdown;
      done = true;
    } else if (m == opts.max_iterations) {
      done = true;
    } else {
      if (v_prev.empty()) v_prev.assign(static_cast<std::size_t>(n), 0.0);
      std::swap(v_prev, v_cur);
      v_cur = w;
      vec::scal(1.0 / beta, v_cur);
      if (store) basis.push(v_cur);
      beta_prev = beta;
      t_prev = t;
    }
  }

  report.lambda_min_used = lam;

  if (opts.keep_basis) {
    Vector y = tridiag_apply_to_e1(
        report.alphas, std::span<const double>(report.betas.data(), report.betas.size() - 1),
        [](double theta) {
          if (!(theta > 0.0))
            throw NotSpdError("lanczos_sample: nonpositive Ritz value in square root");
          return 1.0 / std::sqrt(theta);
        });
    Vector x(static_cast<std::size_t>(n), 0.0);
    for (std::size_t j = 0; j < static_cast<std::size_t>(report.iterations); ++j)
      vec::axpy(report.znorm * y[j], basis.row(j), x);
    result.sample = std::move(x);
  }
  return result;
}

double apriori_bound(double kappa, double lambda_min, int m, double znorm) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("apriori_bound: kappa must be >= 1");
  if (!(lambda_min > 0.0)) throw std::invalid_argument("apriori_bound: lambda_min must be > 0");
  if (m < 0) throw std::invalid_argument("apriori_bound: m must be >= 0");
  if (!(znorm >= 0.0) || !std::isfinite(znorm))
    throw std::invalid_argument("apriori_bound: bad znorm");
  const double sk = std::sqrt(kappa);
  const double rate = (sk - 1.0) / (sk + 1.0);
  return 2.0 / std::sqrt(lambda_min) * sk * std::pow(rate, m) * znorm;
}

CgResult cg_solve(const LinearOperator& q, const Vector& b, const FactoredPreconditioner* precond,
                  double tol, int max_iterations) {
  const std::int64_t n = q.dim();
  if (static_cast<std::int64_t>(b.size()) != n)
    throw DimensionError("cg_solve: rhs length does not match operator dimension");
  if (!vec::all_finite(b)) throw NumericError("cg_solve: non-finite rhs");
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be > 0");
  if (precond && precond->dim() != n)
    throw DimensionError("cg_solve: preconditioner dimension mismatch");

  CgResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  const double bnorm = vec::nrm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  Vector r(b), z, p, ap(static_cast<std::size_t>(n)), tmp;
  auto apply_minv = [&](const Vector& src, Vector& dst) {
    if (!precond) {
      dst = src;
      return;
    }
    tmp.resize(src.size());
    dst.resize(src.size());
    precond->apply_finv(src, tmp);
    precond->apply_ftinv(tmp, dst);
  };
  apply_minv(r, z);
  p = z;
  double rz = vec::dot(r, z);

  for (int m = 1; m <= max_iterations; ++m) {
    q.apply(p, ap);
    const double pap = vec::dot(p, ap);
    if (!(pap > 0.0))
      throw NotSpdError("cg_solve: nonpositive curvature, operator is not SPD", m - 1);
    const double alpha = rz / pap;
    vec::axpy(alpha, p, res.x);
    vec::axpy(-alpha, ap, r);
    const double rn = vec::nrm2(r);
    res.residual_norms.push_back(rn);
    res.iterations = m;
    if (rn <= tol * bnorm) {
      res.converged = true;
      break;
    }
    apply_minv(r, z);
    const double rz_new = vec::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

QuadratureResult lanczos_quadrature_logform(const LinearOperator& q, const Vector& v,
                                            const QuadratureOptions& opts) {
  const std::int64_t n = q.dim();
  if (static_cast<std::int64_t>(v.size()) != n)
    throw DimensionError("lanczos_quadrature_logform: vector length mismatch");
  if (!vec::all_finite(v)) throw NumericError("lanczos_quadrature_logform: non-finite v");
  if (!(opts.rtol > 0.0)) throw std::invalid_argument("quadrature rtol must be > 0");
  if (opts.max_iterations < 1) throw std::invalid_argument("quadrature max_iterations must be >= 1");
  const double vnorm = vec::nrm2(v);
  if (vnorm == 0.0) throw std::invalid_argument("lanczos_quadrature_logform: v must be nonzero");
  const double vn2 = vnorm * vnorm;

  const bool store = opts.reorth == Reorth::full;
  Basis basis(static_cast<std::size_t>(n));
  Vector v_prev, v_cur(v), w(static_cast<std::size_t>(n));
  vec::scal(1.0 / vnorm, v_cur);
  if (store) basis.push(v_cur);

  std::vector<double> alphas, betas;
  std::vector<double> theta, w1;
  double beta_prev = 0.0, t_prev = 0.0, scale = 0.0;
  double est = std::numeric_limits<double>::quiet_NaN();
  int consecutive_ok = 0;

  QuadratureResult result;
  const int hard_cap = static_cast<int>(std::min<std::int64_t>(opts.max_iterations, n));

  for (int m = 1; m <= hard_cap; ++m) {
    q.apply(v_cur, w);
    if (m > 1) vec::axpy(-beta_prev, v_prev, w);
    const double alpha = vec::dot(v_cur, w);
    vec::axpy(-alpha, v_cur, w);
    if (opts.reorth == Reorth::full) full_reorthogonalise(w, basis);
    const double beta = vec::nrm2(w);
    alphas.push_back(alpha);
    betas.push_back(beta);
    scale = std::max(scale, std::abs(alpha) + beta + beta_prev);

    const double t = (m == 1) ? alpha : alpha - beta_prev * beta_prev / t_prev;
    if (!(t > 0.0))
      throw NotSpdError("lanczos_quadrature_logform: operator is not SPD "
                        "(nonpositive pivot at iteration " + std::to_string(m) + ")", m - 1);

    const bool breakdown = beta <= kBreakdownRel * scale;
    const bool exhausted = (m == n);
    const bool evaluate = (m % opts.estimate_stride == 0) || breakdown || exhausted ||
                          m == hard_cap;
    result.iterations = m;

    if (evaluate) {
      tridiag_eigen_first_row(alphas, std::span<const double>(betas.data(), betas.size() - 1),
                              theta, w1);
      double acc = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > 0.0))
          throw NotSpdError("lanczos_quadrature_logform: nonpositive Ritz value, log undefined",
                            static_cast<std::int64_t>(i));
        acc += w1[i] * w1[i] * std::log(theta[i]);
      }
      const double est_new = vn2 * acc;
      if (std::isfinite(est)) {
        if (std::abs(est_new - est) <= opts.rtol * std::max(std::abs(est_new), 1e-300))
          ++consecutive_ok;
        else
          consecutive_ok = 0;
      }
      est = est_new;
      result.value = est;
      if (consecutive_ok >= 2) {
        result.converged = true;
        return result;
      }
    }

    if (breakdown || exhausted) {
      // Krylov space exhausted: the quadrature is exact.
      result.converged = true;
      return result;
    }

    if (v_prev.empty()) v_prev.assign(static_cast<std::size_t>(n), 0.0);
    std::swap(v_prev, v_cur);
    v_cur = w;
    vec::scal(1.0 / beta, v_cur);
    if (store) basis.push(v_cur);
    beta_prev = beta;
    t_prev = t;
  }
  return result;
}

}  // namespace gmrf
