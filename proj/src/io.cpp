#include "gmrf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gmrf {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_grid_csv(const std::filesystem::path& path, const Vector& values, int n1, int n2) {
  if (static_cast<std::int64_t>(values.size()) != static_cast<std::int64_t>(n1) * n2)
    throw DimensionError("write_grid_csv: value count does not match grid");
  std::ofstream out = open_out(path);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      if (j) out << ',';
      out << format_double(values[static_cast<std::size_t>(i) * n2 + j]);
    }
    out << '\n';
  }
}

Vector read_grid_csv(const std::filesystem::path& path, int& n1, int& n2) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Vector values;
  std::string line;
  n1 = 0;
  n2 = -1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(trim(cell)));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad number '" + cell + "'");
      }
      ++cols;
    }
    if (n2 < 0) n2 = cols;
    if (cols != n2) throw ParseError(path.string() + ": ragged rows");
    ++n1;
  }
  if (n1 == 0) throw ParseError(path.string() + ": empty grid");
  return values;
}

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern) {
  std::ofstream out = open_out(path);
  out << "x,y\n";
  for (const auto& p : pattern.points)
    out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
}

PointPattern read_pattern_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  PointPattern pattern;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (first) {
      first = false;
      if (t == "x,y") continue;  // optional header
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw ParseError(path.string() + ": expected 'x,y' rows");
    try {
      double x = std::stod(t.substr(0, comma));
      double y = std::stod(t.substr(comma + 1));
      // Torus wrap on ingest keeps stored coordinates in [0,1).
      x -= std::floor(x);
      y -= std::floor(y);
      pattern.points.push_back({x, y});
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad coordinate line '" + t + "'");
    }
  }
  return pattern;
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
  std::ofstream out = open_out(path);
  out << "iteration,bound,alpha,beta\n";
  for (std::size_t m = 0; m < report.bounds.size(); ++m)
    out << (m + 1) << ',' << format_double(report.bounds[m]) << ','
        << format_double(report.alphas[m]) << ',' << format_double(report.betas[m]) << '\n';
}

void write_probes_csv(const std::filesystem::path& path, const LogDetEstimate& estimate) {
  std::ofstream out = open_out(path);
  out << "probe,value\n";
  for (std::size_t i = 0; i < estimate.probe_values.size(); ++i)
    out << (i + 1) << ',' << format_double(estimate.probe_values[i]) << '\n';
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ofstream out = open_out(path);
  out << "grid,method,iterations,converged,seconds,ffts,matvecs\n";
  for (const auto& r : records) {
    out << r.grid << ',' << r.method << ',';
    if (r.converged)
      out << r.iterations;
    else
      out << '-';
    out << ',' << (r.converged ? 1 : 0) << ',' << format_double(r.seconds) << ',' << r.ffts << ','
        << r.matvecs << '\n';
  }
}

void write_chain_csv(const std::filesystem::path& path, const std::vector<ChainRecord>& records) {
  std::ofstream out = open_out(path);
  out << "iteration,accepted,log_posterior,inner_iterations\n";
  for (const auto& r : records)
    out << r.iteration << ',' << (r.accepted ? 1 : 0) << ',' << format_double(r.log_posterior)
        << ',' << r.inner_iterations << '\n';
}

void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : entries) out << key << ": " << value << '\n';
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

}  // namespace gmrf
