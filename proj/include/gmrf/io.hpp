#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gmrf/bench.hpp"
#include "gmrf/krylov.hpp"
#include "gmrf/lgcp.hpp"
#include "gmrf/logdet.hpp"

namespace gmrf {

// Shortest round-trippable decimal form of a double; CSV output is
// byte-reproducible under a fixed seed.
std::string format_double(double v);

// Row-major n1 x n2 grid of values, one CSV row per lattice row.
void write_grid_csv(const std::filesystem::path& path, const Vector& values, int n1, int n2);
Vector read_grid_csv(const std::filesystem::path& path, int& n1, int& n2);

// Point pattern as "x,y" rows with a header.
void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern);
PointPattern read_pattern_csv(const std::filesystem::path& path);

// Convergence report: iteration,bound,alpha,beta.
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report);

// Per-probe log-determinant values: probe,value.
void write_probes_csv(const std::filesystem::path& path, const LogDetEstimate& estimate);

// Benchmark table: grid,method,iterations,converged,seconds,ffts,matvecs.
// Capped (non-converged) runs print "-" in the iterations column.
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records);

// Chain trace: iteration,accepted,log_posterior,inner_iterations.
void write_chain_csv(const std::filesystem::path& path, const std::vector<ChainRecord>& records);

// Flat "key: value" summary block.
void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

// Flat key = value configuration file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path);

}  // namespace gmrf
