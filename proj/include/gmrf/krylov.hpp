#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmrf/operators.hpp"
#include "gmrf/vec.hpp"

namespace gmrf {

class FactoredPreconditioner;  // precond.hpp

enum class Reorth { full, none };
enum class LambdaMinSource { user, ritz };

struct SamplerOptions {
  int max_iterations = 1000;
  // Absolute tolerance on the a-posteriori error bound lambda_min^{-1/2}||r_m||.
  double tolerance = 1e-8;
  Reorth reorth = Reorth::full;
  // Exact or lower-bound smallest eigenvalue of the operator; when absent the
  // smallest Ritz value of the current tridiagonal is used instead.
  std::optional<double> lambda_min;
  std::uint64_t seed = 0;
  // Ritz-value refreshes and recorded iterates happen every `bound_check_stride`
  // iterations; the bound itself is tracked at every step.
  int bound_check_stride = 1;
  // With keep_basis = false only the convergence report is produced (O(n)
  // memory); the returned sample is empty.  Benchmark mode.
  bool keep_basis = true;
  // Store the approximate sample at every check point (requires keep_basis).
  bool record_iterates = false;
};

struct ConvergenceReport {
  std::vector<double> bounds;  // bound after iteration m, index m-1
  std::vector<double> alphas;  // Lanczos diagonal
  std::vector<double> betas;   // Lanczos off-diagonal, including the trailing
                               // recurrence residual beta_m
  double znorm = 0.0;
  double lambda_min_used = 0.0;
  LambdaMinSource lambda_min_source = LambdaMinSource::ritz;
  double tolerance = 0.0;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;  // exact invariant-subspace termination
};

struct SampleResult {
  Vector sample;  // ||z|| V_m T_m^{-1/2} e_1; empty when keep_basis = false
  ConvergenceReport report;
  std::vector<Vector> iterates;        // filled when record_iterates
  std::vector<int> iterate_iterations; // iteration number of each stored iterate
};

// Krylov sampler: approximates the inverse principal square root of an SPD
// operator applied to z, targeting a draw from the Gaussian with precision Q.
// Stops when the bound falls below opts.tolerance, on exact breakdown, or at
// max_iterations.  A zero Lanczos residual before tolerance is exact
// termination, not an error; a non-positive pivot or Ritz value is.
SampleResult lanczos_sample(const LinearOperator& q, const Vector& z, const SamplerOptions& opts);
// Draws z ~ N(0, I) internally from the stream addressed by opts.seed.
SampleResult lanczos_sample(const LinearOperator& q, const SamplerOptions& opts);

// A-priori error bound: 2 lambda_min^{-1/2} sqrt(kappa)
// ((sqrt(kappa)-1)/(sqrt(kappa)+1))^m ||z||.
double apriori_bound(double kappa, double lambda_min, int m, double znorm);

struct CgResult {
  Vector x;
  std::vector<double> residual_norms;  // ||b - Q x_m|| per iteration
  int iterations = 0;
  bool converged = false;
};

// (Preconditioned) conjugate gradients for Q x = b; stops when
// ||b - Q x|| <= tol * ||b||.  Pass nullptr for plain CG.  A maxit exit
// returns the partial iterate flagged not converged.
CgResult cg_solve(const LinearOperator& q, const Vector& b, const FactoredPreconditioner* precond,
                  double tol, int max_iterations);

struct QuadratureOptions {
  double rtol = 1e-7;       // relative-change stopping rule
  int max_iterations = 200;
  Reorth reorth = Reorth::full;
  int estimate_stride = 1;  // evaluate the quadrature value every k-th step
};

struct QuadratureResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// ||v||^2 e_1^T log(T_m) e_1: Lanczos quadrature for the quadratic form
// v^T log(Q) v.  Stops once the relative change of the estimate is below rtol
// for two consecutive evaluations, on breakdown, or at full dimension (both
// exact).  Throws NotSpdError on a non-positive Ritz value.
QuadratureResult lanczos_quadrature_logform(const LinearOperator& q, const Vector& v,
                                            const QuadratureOptions& opts);

}  // namespace gmrf
