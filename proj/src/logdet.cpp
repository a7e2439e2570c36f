#include "gmrf/logdet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include <Eigen/Eigenvalues>

#include "gmrf/rng.hpp"

namespace gmrf {

ColouredProbeSet colour_graph(const SparseOperator& q, int power) {
  if (power < 1) throw std::invalid_argument("colour_graph: power must be >= 1");
  const std::int64_t n = q.dim();
  const auto& rp = q.row_ptr();
  const auto& ci = q.col_idx();

  ColouredProbeSet out;
  out.power = power;
  out.colour.assign(static_cast<std::size_t>(n), -1);

  std::vector<std::int64_t> depth(static_cast<std::size_t>(n), -1);
  std::vector<std::int64_t> visited;
  std::deque<std::int64_t> queue;
  std::vector<char> forbidden;

  for (std::int64_t v = 0; v < n; ++v) {
    // Breadth-first search to depth `power`; colours seen in the ball are
    // forbidden for v.
    visited.clear();
    forbidden.assign(out.classes.size() + 1, 0);
    depth[v] = 0;
    visited.push_back(v);
    queue.clear();
    queue.push_back(v);
    while (!queue.empty()) {
      const std::int64_t u = queue.front();
      queue.pop_front();
      if (depth[u] == power) continue;
      for (std::int64_t k = rp[u]; k < rp[u + 1]; ++k) {
        const std::int64_t w = ci[k];
        if (w == u || depth[w] >= 0) continue;
        depth[w] = depth[u] + 1;
        visited.push_back(w);
        queue.push_back(w);
        const int c = out.colour[w];
        if (c >= 0) forbidden[c] = 1;
      }
    }
    for (std::int64_t u : visited) depth[u] = -1;

    int c = 0;
    while (c < static_cast<int>(out.classes.size()) && forbidden[c]) ++c;
    out.colour[v] = c;
    if (c == static_cast<int>(out.classes.size())) out.classes.emplace_back();
    out.classes[c].push_back(v);
  }
  return out;
}

namespace {

void finalise_estimate(LogDetEstimate& est) {
  const int n = est.probes;
  double mean = 0.0;
  for (double v : est.probe_values) mean += v;
  mean /= std::max(n, 1);
  est.estimate = mean;
  double var = 0.0;
  for (double v : est.probe_values) var += (v - mean) * (v - mean);
  est.sample_variance = n > 1 ? var / (n - 1) : 0.0;
  est.standard_error = n > 0 ? std::sqrt(est.sample_variance / n) : 0.0;
}

// Runs fn(i) for i in [0, count) over opts.threads workers; fn must only touch
// slot i of its outputs.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

LogDetEstimate hutchinson_logdet(const LinearOperator& q, int probes, const LogDetOptions& opts) {
  if (probes < 1) throw std::invalid_argument("hutchinson_logdet: probes must be >= 1");
  const std::size_t n = static_cast<std::size_t>(q.dim());
  LogDetEstimate est;
  est.probes = probes;
  est.probe_values.assign(static_cast<std::size_t>(probes), 0.0);
  parallel_for(probes, opts.threads, [&](int i) {
    auto eng = rng::stream(opts.seed, static_cast<std::uint64_t>(i), 0);
    Vector v(n);
    rng::fill_rademacher(eng, v);
    est.probe_values[i] = lanczos_quadrature_logform(q, v, opts.quadrature).value;
  });
  finalise_estimate(est);
  return est;
}

LogDetEstimate coloured_hutchinson_logdet(const LinearOperator& q, const ColouredProbeSet& probes,
                                          int rounds, const LogDetOptions& opts) {
  if (rounds < 1) throw std::invalid_argument("coloured_hutchinson_logdet: rounds must be >= 1");
  const std::int64_t n = q.dim();
  if (static_cast<std::int64_t>(probes.colour.size()) != n)
    throw DimensionError("coloured_hutchinson_logdet: probe set built for a different dimension");
  const std::size_t n_classes = probes.classes.size();

  LogDetEstimate est;
  est.probes = rounds;
  est.probe_values.assign(static_cast<std::size_t>(rounds), 0.0);
  std::vector<Vector> class_values(n_classes, Vector(static_cast<std::size_t>(rounds), 0.0));

  parallel_for(rounds, opts.threads, [&](int r) {
    Vector v(static_cast<std::size_t>(n));
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto eng = rng::stream(opts.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
      std::fill(v.begin(), v.end(), 0.0);
      for (std::int64_t idx : probes.classes[c]) v[idx] = (eng() >> 63) ? 1.0 : -1.0;
      const double val = lanczos_quadrature_logform(q, v, opts.quadrature).value;
      class_values[c][r] = val;
      total += val;
    }
    est.probe_values[r] = total;
  });

  est.class_means.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double m = 0.0;
    for (double v : class_values[c]) m += v;
    est.class_means[c] = m / rounds;
  }
  finalise_estimate(est);
  return est;
}

LogDetEstimate preconditioned_logdet(const LinearOperator& q, const FactoredPreconditioner& p,
                                     int probes, const LogDetOptions& opts) {
  if (!p.provides(Capability::logdet_factor))
    throw CapabilityError("preconditioned_logdet: preconditioner lacks logdet_factor");
  const PreconditionedOperator op(q, p);
  const double offset = 2.0 * p.logdet_factor();
  LogDetEstimate est = hutchinson_logdet(op, probes, opts);
  for (double& v : est.probe_values) v += offset;
  est.offset = offset;
  finalise_estimate(est);
  return est;
}

double decay_bound(const DecayBoundParams& params, int graph_distance) {
  if (!(params.lambda_min > 0.0) || !(params.lambda_max >= params.lambda_min))
    throw std::invalid_argument("decay_bound: need 0 < lambda_min <= lambda_max");
  const double two_r = 2.0 * params.radius;
  if (!(two_r > 1.0)) throw std::invalid_argument("decay_bound: need 2 * radius > 1");
  if (graph_distance < 0) throw std::invalid_argument("decay_bound: negative distance");

  const double t = params.radius + 1.0 / (4.0 * params.radius);
  const double span = params.lambda_max - params.lambda_min;
  const double mid = params.lambda_max + params.lambda_min;
  double m = 0.0;
  for (double sign : {1.0, -1.0}) {
    const double arg = 0.5 * (span * sign * t + mid);
    if (!(arg > 0.0))
      throw NumericError("decay_bound: radius too large for the spectrum, log argument <= 0");
    m = std::max(m, std::abs(std::log(arg)));
  }
  return 2.0 / (1.0 - 1.0 / two_r) * m * std::pow(two_r, -static_cast<double>(graph_distance));
}

double max_admissible_radius(double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min))
    throw std::invalid_argument("max_admissible_radius: need 0 < lambda_min <= lambda_max");
  if (lambda_max == lambda_min) return std::numeric_limits<double>::infinity();
  // R + 1/(4R) = (lmax + lmin)/(lmax - lmin), larger root.
  const double c = (lambda_max + lambda_min) / (lambda_max - lambda_min);
  return 0.5 * (c + std::sqrt(c * c - 1.0));
}

double exact_colour_variance(const DenseOperator& q, const ColouredProbeSet& probes) {
  const std::int64_t n = q.dim();
  if (n > 1024) throw DimensionError("exact_colour_variance: dimension cap 1024 exceeded");
  if (static_cast<std::int64_t>(probes.colour.size()) != n)
    throw DimensionError("exact_colour_variance: probe set dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.matrix());
  if (es.info() != Eigen::Success)
    throw NumericError("exact_colour_variance: eigendecomposition failed");
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw NotSpdError("exact_colour_variance: matrix is not SPD");
  const Eigen::MatrixXd b =
      es.eigenvectors() *
      es.eigenvalues().array().log().matrix().asDiagonal() * es.eigenvectors().transpose();

  double acc = 0.0;
  for (const auto& cls : probes.classes) {
    for (std::size_t a = 0; a < cls.size(); ++a) {
      for (std::size_t c = 0; c < cls.size(); ++c) {
        if (a == c) continue;
        const double v = b(cls[a], cls[c]);
        acc += v * v;
      }
    }
  }
  return 2.0 * acc;
}

}  // namespace gmrf
