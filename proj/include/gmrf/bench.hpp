#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gmrf {

struct BenchRecord {
  int grid = 0;             // n1 of the n1 x n1 torus
  std::string method;       // "preconditioned" | "unpreconditioned"
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::uint64_t ffts = 0;
  std::uint64_t matvecs = 0;
};

struct PrecondBenchConfig {
  std::vector<int> grids{16, 32, 64, 128};
  double tau = 1.0;
  double kappa = 10.0;
  int nu = 2;
  double alpha = 0.0;       // circulant shift
  double tolerance = 1e-8;  // on the a-posteriori bound
  int max_iterations_preconditioned = 500;
  int max_iterations_unpreconditioned = 200000;
  std::uint64_t seed = 1;
  bool run_unpreconditioned = true;
};

// Iterations-to-tolerance of the Krylov sampler on the metric operator
// Q + H at a prior draw, with and without the circulant-shift preconditioner,
// across torus grid sizes.  Memory-lean count-only runs.
std::vector<BenchRecord> run_precond_bench(const PrecondBenchConfig& config);

}  // namespace gmrf
