#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "gmrf/krylov.hpp"
#include "gmrf/operators.hpp"
#include "gmrf/precond.hpp"

namespace gmrf {

// Regular lattice covering the unit torus [0,1)^2.  The standard
// configuration is square (n1 == n2 >= 2, cell side h = 1/n1); rectangular
// cell counts are accepted for desk-scale diagnostics, with cell area
// 1/(n1*n2) throughout.
struct TorusLattice {
  int n1 = 0;
  int n2 = 0;

  TorusLattice(int n1, int n2);
  static TorusLattice square(int n) { return TorusLattice(n, n); }

  std::int64_t cells() const { return static_cast<std::int64_t>(n1) * n2; }
  double cell_area() const { return 1.0 / (static_cast<double>(n1) * n2); }
  double h() const { return 1.0 / n1; }
  // Torus wrap, then row-major flat index of the containing cell.
  std::int64_t cell_index(double sx, double sy) const;
};

struct PointPattern {
  std::vector<std::array<double, 2>> points;
  std::size_t size() const { return points.size(); }
};

struct LatticeCounts {
  std::vector<std::int64_t> counts;
  std::int64_t total() const;
};

LatticeCounts bin_points(const PointPattern& pattern, const TorusLattice& lattice);

// Discretised log-Gaussian Cox model: stationary circulant prior on the
// latent field, Poisson cell counts with mass cell_area * exp(offset + x).
struct LgcpModel {
  TorusLattice lattice;
  std::shared_ptr<const BlockCirculantOperator> prior;
  LatticeCounts counts;
  double mean_offset = 0.0;

  LgcpModel(TorusLattice lattice, std::shared_ptr<const BlockCirculantOperator> prior,
            LatticeCounts counts, double mean_offset = 0.0);
  std::int64_t dim() const { return lattice.cells(); }
};

struct LikelihoodEval {
  double loglik = 0.0;  // sum_i [y_i s_i - area e^{s_i}], s = offset + x,
                        // up to x-independent constants
  Vector grad;          // y - area e^{s}
  Vector fisher_diag;   // area e^{s}
};

// Throws NumericError when any latent value would overflow exp (divergent
// state guard).
LikelihoodEval loglik_grad_fisher(const LgcpModel& model, const Vector& x);

// Log posterior (up to the model-constant terms dropped from the likelihood).
double log_posterior(const LgcpModel& model, const Vector& x);

struct Proposal {
  Vector state;
  double forward_logdensity = 0.0;
  double reverse_logdensity = 0.0;
  int inner_iterations = 0;  // Krylov/CG iterations spent, 0 for exact paths
  bool ok = true;            // false: divergent proposal or solver failure
};

// Langevin proposal with the prior as metric: mean
// x + (delta^2/2) Q^{-1} grad, covariance delta^2 Q^{-1}.  Exact spectral
// sampling and exact transition log-densities, O(n log n).
Proposal mala_propose(const LgcpModel& model, const Vector& x, double delta,
                      std::mt19937_64& rng);

struct SmmalaOptions {
  double alpha = 0.0;       // circulant shift of the preconditioner
  double cg_tol = 1e-10;
  int cg_max_iterations = 2000;
  double sampler_tol = 1e-8;
  int sampler_max_iterations = 2000;
  // log det(Q + H) is computed exactly through a dense factorisation up to
  // this dimension and estimated stochastically beyond it (inexact chain).
  std::int64_t dense_logdet_cap = 4096;
  int logdet_probes = 32;
};

// Langevin proposal with metric Q + H(x), H the diagonal Fisher information:
// mean via preconditioned CG, noise via the preconditioned Krylov sampler,
// with H re-evaluated at the proposal for the reverse density.
Proposal smmala_propose(const LgcpModel& model, const Vector& x, double delta,
                        const SmmalaOptions& opts, std::mt19937_64& rng);

enum class ProposalKind { rw, mala, smmala };

struct ChainOptions {
  ProposalKind kind = ProposalKind::smmala;
  int iterations = 1000;
  double delta = 0.1;
  std::uint64_t seed = 0;
  int thin = 0;              // keep every thin-th post-warmup state; 0 keeps none
  int adapt_iterations = 0;  // dual-averaging warmup for delta
  double target_accept = 0.574;
  SmmalaOptions smmala;
};

struct ChainRecord {
  int iteration = 0;
  bool accepted = false;
  double log_posterior = 0.0;
  int inner_iterations = 0;
};

struct ChainSummary {
  double acceptance_rate = 0.0;  // post-warmup
  double delta_final = 0.0;
  int iterations = 0;
  bool inexact_logdet = false;
  std::vector<ChainRecord> records;
  std::vector<int> thinned_iterations;
  std::vector<Vector> thinned_states;
  Vector mean_state;  // post-warmup running mean
  Vector final_state;
  double final_log_posterior = 0.0;
};

// Metropolis-Hastings chain over the latent field with the selected proposal.
// Failed proposals count as rejections.
ChainSummary mh_chain(const LgcpModel& model, const ChainOptions& opts);

// tr((Q + alpha I)^{-1} (H - alpha I)) with H = diag(area e^{offset + x}).
// The circulant inverse has a constant diagonal, so this is
// [(Q + alpha I)^{-1}]_{00} * sum_i (H_ii - alpha).
double trace_diagnostic(const LgcpModel& model, const Vector& x, double alpha);

// Exact draw from the prior N(0, Q^{-1}) by spectral filtering of white noise.
Vector sample_field(const BlockCirculantOperator& prior, std::mt19937_64& rng);

// Poisson counts per cell with mass cell_area * exp(log_intensity), each point
// placed uniformly inside its cell.
PointPattern sample_pattern_given_field(const TorusLattice& lattice, const Vector& log_intensity,
                                        std::mt19937_64& rng);

struct LgcpSimulation {
  Vector field;          // latent x (offset not included)
  PointPattern pattern;
  LatticeCounts counts;  // the Poisson draws behind the pattern
};

LgcpSimulation simulate_lgcp(const TorusLattice& lattice,
                             std::shared_ptr<const BlockCirculantOperator> prior,
                             std::uint64_t seed, double mean_offset = 0.0);

}  // namespace gmrf
