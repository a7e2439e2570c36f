#include "gmrf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gmrf/gallery.hpp"
#include "gmrf/krylov.hpp"
#include "gmrf/lgcp.hpp"
#include "gmrf/precond.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

std::vector<BenchRecord> run_precond_bench(const PrecondBenchConfig& config) {
  std::vector<BenchRecord> records;

  for (const int grid : config.grids) {
    auto prior = torus_precision(grid, grid, config.tau, config.kappa, config.nu);
    const TorusLattice lattice = TorusLattice::square(grid);

    // Metric operator Q + H at a prior draw: the benchmark state.
    auto eng = rng::stream(config.seed, static_cast<std::uint64_t>(grid), 7);
    Vector field = sample_field(*prior, eng);
    Vector fisher(field.size());
    const double area = lattice.cell_area();
    for (std::size_t i = 0; i < field.size(); ++i) fisher[i] = area * std::exp(field[i]);
    const SumOperator metric(
        {{1.0, prior}, {1.0, std::make_shared<const DiagonalOperator>(fisher)}});

    const Vector lam = prior->spectrum();
    const double lam_min_q = *std::min_element(lam.begin(), lam.end());
    const Vector z = rng::standard_normal(eng, static_cast<std::size_t>(metric.dim()));

    auto timed_run = [&](const char* method, const LinearOperator& op,
                         const CountingOperator& counted, const SamplerOptions& opts) {
      BenchRecord rec;
      rec.grid = grid;
      rec.method = method;
      const std::uint64_t fft0 = fft_transform_count();
      const auto t0 = std::chrono::steady_clock::now();
      const ConvergenceReport report = lanczos_sample(op, z, opts).report;
      const auto t1 = std::chrono::steady_clock::now();
      rec.seconds = std::chrono::duration<double>(t1 - t0).count();
      rec.ffts = fft_transform_count() - fft0;
      rec.matvecs = counted.count();
      rec.iterations = report.iterations;
      rec.converged = report.converged;
      records.push_back(rec);
    };

    {
      auto precond = build_circulant_shift(prior, config.alpha);
      const CountingOperator counted(metric);
      const PreconditionedOperator inner(counted, *precond);
      SamplerOptions opts;
      opts.tolerance = config.tolerance;
      opts.max_iterations = config.max_iterations_preconditioned;
      opts.reorth = Reorth::none;
      opts.keep_basis = false;
      // H is positive semidefinite, so the preconditioned spectrum sits above
      // min eigenvalue/(eigenvalue + alpha); exact lower bound for the error
      // bound's lambda_min.
      opts.lambda_min = precond->preconditioned_lambda_min_bound();
      timed_run("preconditioned", inner, counted, opts);
    }

    if (config.run_unpreconditioned) {
      const CountingOperator counted(metric);
      SamplerOptions opts;
      opts.tolerance = config.tolerance;
      opts.max_iterations = config.max_iterations_unpreconditioned;
      opts.reorth = Reorth::none;
      opts.keep_basis = false;
      // Valid lower bound: H only raises the spectrum of Q.
      opts.lambda_min = lam_min_q;
      timed_run("unpreconditioned", counted, counted, opts);
    }
  }
  return records;
}

}  // namespace gmrf
