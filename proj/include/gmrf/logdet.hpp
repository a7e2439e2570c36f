#pragma once

#include <cstdint>
#include <vector>

#include "gmrf/krylov.hpp"
#include "gmrf/operators.hpp"
#include "gmrf/precond.hpp"

namespace gmrf {

// Partition of {0..n-1} into colour classes in which any two members are at
// graph distance greater than `power` in the adjacency graph of Q.
struct ColouredProbeSet {
  std::vector<int> colour;                  // colour id per vertex
  std::vector<std::vector<std::int64_t>> classes;  // ascending members per colour
  int power = 0;
};

// Greedy sequential colouring (natural vertex order, smallest feasible
// colour) of the distance-`power` graph of Q, built by breadth-first search
// from each vertex rather than by materialising Q^power.
ColouredProbeSet colour_graph(const SparseOperator& q, int power);

struct LogDetOptions {
  std::uint64_t seed = 0;
  QuadratureOptions quadrature;
  int threads = 1;
};

struct LogDetEstimate {
  double estimate = 0.0;              // mean of probe_values
  std::vector<double> probe_values;   // one unbiased log-det estimate per probe/round
  int probes = 0;
  double sample_variance = 0.0;
  double standard_error = 0.0;
  std::vector<double> class_means;    // coloured case: mean contribution per class
  double offset = 0.0;                // preconditioned case: 2 log det F, already included
};

// Plain Hutchinson estimate of log det(Q) with Rademacher probes and Lanczos
// quadrature for each quadratic form.  Probe i draws from the stream
// (seed, i, 0); serial and parallel execution agree bitwise.
LogDetEstimate hutchinson_logdet(const LinearOperator& q, int probes, const LogDetOptions& opts);

// Variance-reduced variant: each round draws one Rademacher probe per colour
// class (supported on the class, zero elsewhere, stream (seed, round, class))
// and sums the class quadratic forms.  A single all-covering class reproduces
// hutchinson_logdet exactly under the same seed.
LogDetEstimate coloured_hutchinson_logdet(const LinearOperator& q, const ColouredProbeSet& probes,
                                          int rounds, const LogDetOptions& opts);

// log det Q = log det(F^{-1} Q F^{-T}) + 2 log det F: estimates the first term
// stochastically on the preconditioned operator and adds the exact factor
// term.  Requires the logdet_factor capability.
LogDetEstimate preconditioned_logdet(const LinearOperator& q, const FactoredPreconditioner& p,
                                     int probes, const LogDetOptions& opts);

// Off-diagonal decay envelope for B = log(Q): parameters of the Chebyshev
// ellipse bound.  Valid when 2 * radius > 1 and the log arguments stay
// positive (radius below the admissible limit).
struct DecayBoundParams {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double radius = 0.0;  // the R in the ellipse parameterisation
};

// Bound on |log(Q)_{ij}| at graph distance d:
// 2/(1 - 1/(2R)) * max_{t = +-(R + 1/(4R))} |log(((lmax-lmin) t + lmax+lmin)/2)|
// * (2R)^{-d}.  Throws NumericError when the log argument is nonpositive.
double decay_bound(const DecayBoundParams& params, int graph_distance);

// Largest admissible R for the spectrum (the bound is undefined beyond it);
// infinity when lambda_max == lambda_min.
double max_admissible_radius(double lambda_min, double lambda_max);

// Exact variance of one coloured-Hutchinson round for B = log(Q):
// 2 * sum over classes of sum_{i != j in class} B_ij^2.  The factor 2 is the
// Rademacher fourth-moment bookkeeping, fixed against a brute-force Monte
// Carlo oracle.  Dense path, dim <= 1024.
double exact_colour_variance(const DenseOperator& q, const ColouredProbeSet& probes);

}  // namespace gmrf
