#include "gmrf/lgcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "gmrf/gallery.hpp"
#include "gmrf/logdet.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

// --- lattice, binning ---

TorusLattice::TorusLattice(int n1, int n2) : n1(n1), n2(n2) {
  if (n1 < 2 || n2 < 1 || static_cast<std::int64_t>(n1) * n2 < 2)
    throw DimensionError("TorusLattice: need at least two cells with n1 >= 2");
}

std::int64_t TorusLattice::cell_index(double sx, double sy) const {
  sx -= std::floor(sx);
  sy -= std::floor(sy);
  auto clampi = [](double v, int n) {
    const auto i = static_cast<std::int64_t>(std::floor(v * n));
    return std::min<std::int64_t>(std::max<std::int64_t>(i, 0), n - 1);
  };
  return clampi(sx, n1) * n2 + clampi(sy, n2);
}

std::int64_t LatticeCounts::total() const {
  std::int64_t s = 0;
  for (std::int64_t c : counts) s += c;
  return s;
}

LatticeCounts bin_points(const PointPattern& pattern, const TorusLattice& lattice) {
  LatticeCounts out;
  out.counts.assign(static_cast<std::size_t>(lattice.cells()), 0);
  for (const auto& p : pattern.points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
      throw NumericError("bin_points: non-finite coordinate");
    ++out.counts[lattice.cell_index(p[0], p[1])];
  }
  return out;
}

// --- model & likelihood ---

LgcpModel::LgcpModel(TorusLattice lattice_in, std::shared_ptr<const BlockCirculantOperator> prior_in,
                     LatticeCounts counts_in, double mean_offset_in)
    : lattice(lattice_in), prior(std::move(prior_in)), counts(std::move(counts_in)),
      mean_offset(mean_offset_in) {
  if (!prior) throw DimensionError("LgcpModel: null prior");
  if (prior->dim() != lattice.cells())
    throw DimensionError("LgcpModel: prior dimension does not match lattice");
  if (static_cast<std::int64_t>(counts.counts.size()) != lattice.cells())
    throw DimensionError("LgcpModel: counts length does not match lattice");
  for (std::int64_t c : counts.counts)
    if (c < 0) throw NumericError("LgcpModel: negative count");
  prior->spectrum();  // SPD required up front
}

LikelihoodEval loglik_grad_fisher(const LgcpModel& model, const Vector& x) {
  const std::int64_t n = model.dim();
  if (static_cast<std::int64_t>(x.size()) != n)
    throw DimensionError("loglik_grad_fisher: state length mismatch");
  const double area = model.lattice.cell_area();
  const double guard = 700.0 - std::log(area);

  LikelihoodEval ev;
  ev.grad.resize(x.size());
  ev.fisher_diag.resize(x.size());
  double ll = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double s = model.mean_offset + x[i];
    if (!(s < guard))
      throw NumericError("loglik_grad_fisher: divergent state, exp overflow at cell " +
                         std::to_string(i));
    const double mass = area * std::exp(s);
    const double y = static_cast<double>(model.counts.counts[i]);
    ll += y * s - mass;
    ev.grad[i] = y - mass;
    ev.fisher_diag[i] = mass;
  }
  ev.loglik = ll;
  return ev;
}

namespace {

double prior_logdensity(const LgcpModel& model, const Vector& x) {
  const std::int64_t n = model.dim();
  double sum_log = 0.0;
  for (double lam : model.prior->eigenvalues()) sum_log += std::log(lam);
  Vector qx(x.size());
  model.prior->apply(x, qx);
  return 0.5 * sum_log - 0.5 * vec::dot(x, qx) - 0.5 * static_cast<double>(n) * kLog2Pi;
}

// log N(d | 0, delta^2 A^{-1}) given the quadratic form d^T A d and log det A.
double gauss_logdensity(std::int64_t n, double quad, double logdet_a, double delta) {
  return -0.5 * static_cast<double>(n) * kLog2Pi + 0.5 * logdet_a -
         static_cast<double>(n) * std::log(delta) - quad / (2.0 * delta * delta);
}

}  // namespace

double log_posterior(const LgcpModel& model, const Vector& x) {
  return prior_logdensity(model, x) + loglik_grad_fisher(model, x).loglik;
}

// --- MALA ---

Proposal mala_propose(const LgcpModel& model, const Vector& x, double delta,
                      std::mt19937_64& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("mala_propose: delta must be > 0");
  const std::int64_t n = model.dim();
  const BlockCirculantOperator& q = *model.prior;
  const double half_d2 = 0.5 * delta * delta;

  double sum_log = 0.0;
  for (double lam : q.eigenvalues()) sum_log += std::log(lam);

  const LikelihoodEval cur = loglik_grad_fisher(model, x);  // divergence here is a caller error
  Vector mean = q.solve(cur.grad);
  for (std::int64_t i = 0; i < n; ++i) mean[i] = x[i] + half_d2 * mean[i];

  const Vector noise = q.filter_apply(rng::standard_normal(rng, x.size()), -0.5);
  Proposal prop;
  prop.state.resize(x.size());
  for (std::int64_t i = 0; i < n; ++i) prop.state[i] = mean[i] + delta * noise[i];

  Vector d(x.size()), qd(x.size());
  for (std::int64_t i = 0; i < n; ++i) d[i] = prop.state[i] - mean[i];
  q.apply(d, qd);
  prop.forward_logdensity = gauss_logdensity(n, vec::dot(d, qd), sum_log, delta);

  LikelihoodEval star;
  try {
    star = loglik_grad_fisher(model, prop.state);
  } catch (const NumericError&) {
    prop.ok = false;
    return prop;
  }
  Vector mean_back = q.solve(star.grad);
  for (std::int64_t i = 0; i < n; ++i) d[i] = x[i] - (prop.state[i] + half_d2 * mean_back[i]);
  q.apply(d, qd);
  prop.reverse_logdensity = gauss_logdensity(n, vec::dot(d, qd), sum_log, delta);
  return prop;
}

// --- sMMALA ---

namespace {

// Shared machinery for the metric proposal: preconditioner, exact dense
// determinant path at desk scale, stochastic path beyond it.
class SmmalaWorker {
 public:
  SmmalaWorker(const LgcpModel& model, const SmmalaOptions& opts)
      : model_(model), opts_(opts),
        precond_(build_circulant_shift(model.prior, opts.alpha)) {
    if (model.dim() <= opts.dense_logdet_cap) {
      dense_q_ = dense_from_circulant(*model.prior);
      dense_path_ = true;
    }
    lambda_min_bound_ = precond_->preconditioned_lambda_min_bound();
  }

  bool dense_path() const { return dense_path_; }

  struct State {
    Vector x;
    LikelihoodEval lik;
    double logdet_a = 0.0;
    double log_posterior = kNegInf;
    bool valid = false;
  };

  State evaluate(const Vector& x, std::mt19937_64& rng) {
    State st;
    st.x = x;
    try {
      st.lik = loglik_grad_fisher(model_, x);
    } catch (const NumericError&) {
      return st;
    }
    st.logdet_a = metric_logdet(st.lik.fisher_diag, rng);
    st.log_posterior = prior_logdensity(model_, x) + st.lik.loglik;
    st.valid = true;
    return st;
  }

  struct Step {
    Proposal prop;
    State state;
  };

  Step propose(const State& cur, double delta, std::mt19937_64& rng) {
    Step step;
    Proposal& prop = step.prop;
    const std::int64_t n = model_.dim();
    const double half_d2 = 0.5 * delta * delta;

    const SumOperator a_cur = metric_operator(cur.lik.fisher_diag);
    const CgResult cg_fwd =
        cg_solve(a_cur, cur.lik.grad, precond_.get(), opts_.cg_tol, opts_.cg_max_iterations);
    prop.inner_iterations += cg_fwd.iterations;
    if (!cg_fwd.converged) {
      prop.ok = false;
      return step;
    }

    SamplerOptions sopts;
    sopts.tolerance = opts_.sampler_tol;
    sopts.max_iterations = opts_.sampler_max_iterations;
    sopts.lambda_min = lambda_min_bound_;
    const Vector z = rng::standard_normal(rng, static_cast<std::size_t>(n));
    const SampleResult noise = preconditioned_sample(a_cur, *precond_, z, sopts);
    prop.inner_iterations += noise.report.iterations;
    if (!noise.report.converged) {
      prop.ok = false;
      return step;
    }

    prop.state.resize(static_cast<std::size_t>(n));
    Vector mean(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      mean[i] = cur.x[i] + half_d2 * cg_fwd.x[i];
      prop.state[i] = mean[i] + delta * noise.sample[i];
    }
    prop.forward_logdensity =
        gauss_logdensity(n, quad_form(a_cur, prop.state, mean), cur.logdet_a, delta);

    step.state = evaluate(prop.state, rng);
    if (!step.state.valid) {
      prop.ok = false;
      return step;
    }

    // Reverse density with the metric re-evaluated at the proposal.
    const SumOperator a_star = metric_operator(step.state.lik.fisher_diag);
    const CgResult cg_rev = cg_solve(a_star, step.state.lik.grad, precond_.get(), opts_.cg_tol,
                                     opts_.cg_max_iterations);
    prop.inner_iterations += cg_rev.iterations;
    if (!cg_rev.converged) {
      prop.ok = false;
      return step;
    }
    Vector mean_back(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      mean_back[i] = prop.state[i] + half_d2 * cg_rev.x[i];
    prop.reverse_logdensity =
        gauss_logdensity(n, quad_form(a_star, cur.x, mean_back), step.state.logdet_a, delta);
    return step;
  }

 private:
  SumOperator metric_operator(const Vector& fisher_diag) const {
    return SumOperator({{1.0, model_.prior},
                        {1.0, std::make_shared<const DiagonalOperator>(fisher_diag)}});
  }

  static double quad_form(const LinearOperator& a, const Vector& u, const Vector& v) {
    Vector d(u.size()), ad(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - v[i];
    a.apply(d, ad);
    return vec::dot(d, ad);
  }

  double metric_logdet(const Vector& fisher_diag, std::mt19937_64& rng) {
    if (dense_path_) {
      Eigen::MatrixXd m = dense_q_;
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) += fisher_diag[i];
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success)
        throw NotSpdError("smmala: metric is not positive definite");
      return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    const SumOperator a = metric_operator(fisher_diag);
    LogDetOptions lopts;
    lopts.seed = rng();
    return preconditioned_logdet(a, *precond_, opts_.logdet_probes, lopts).estimate;
  }

  const LgcpModel& model_;
  SmmalaOptions opts_;
  std::shared_ptr<const CirculantShiftPreconditioner> precond_;
  Eigen::MatrixXd dense_q_;
  bool dense_path_ = false;
  double lambda_min_bound_ = 1.0;
};

}  // namespace

Proposal smmala_propose(const LgcpModel& model, const Vector& x, double delta,
                        const SmmalaOptions& opts, std::mt19937_64& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("smmala_propose: delta must be > 0");
  SmmalaWorker worker(model, opts);
  SmmalaWorker::State cur = worker.evaluate(x, rng);
  if (!cur.valid) throw NumericError("smmala_propose: divergent current state");
  return worker.propose(cur, delta, rng).prop;
}

// --- Metropolis-Hastings chain ---

namespace {

// Dual-averaging step-size adapter (Nesterov-style, the standard warmup rule).
class StepSizeAdapter {
 public:
  StepSizeAdapter(double delta0, double target)
      : mu_(std::log(10.0 * delta0)), target_(target), log_eps_(std::log(delta0)),
        log_eps_bar_(std::log(delta0)) {}

  void update(double accept_prob) {
    ++t_;
    const double frac = 1.0 / (t_ + t0_);
    hbar_ = (1.0 - frac) * hbar_ + frac * (target_ - accept_prob);
    log_eps_ = mu_ - std::sqrt(static_cast<double>(t_)) / gamma_ * hbar_;
    const double eta = std::pow(static_cast<double>(t_), -kappa_);
    log_eps_bar_ = eta * log_eps_ + (1.0 - eta) * log_eps_bar_;
  }

  double current() const { return std::exp(log_eps_); }
  double frozen() const { return std::exp(log_eps_bar_); }

 private:
  double mu_, target_;
  double log_eps_, log_eps_bar_;
  double hbar_ = 0.0;
  int t_ = 0;
  static constexpr double gamma_ = 0.05;
  static constexpr double t0_ = 10.0;
  static constexpr double kappa_ = 0.75;
};

}  // namespace

ChainSummary mh_chain(const LgcpModel& model, const ChainOptions& opts) {
  if (opts.iterations < 1) throw std::invalid_argument("mh_chain: iterations must be >= 1");
  if (!(opts.delta > 0.0)) throw std::invalid_argument("mh_chain: delta must be > 0");
  if (opts.adapt_iterations < 0 || opts.adapt_iterations >= opts.iterations)
    throw std::invalid_argument("mh_chain: adapt_iterations must be in [0, iterations)");

  const std::int64_t n = model.dim();
  auto chain_rng = rng::stream(opts.seed, 0x6d68636861696eULL);  // chain stream
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  ChainSummary summary;
  summary.records.reserve(static_cast<std::size_t>(opts.iterations));

  std::unique_ptr<SmmalaWorker> worker;
  SmmalaWorker::State cur_state;
  Vector x(static_cast<std::size_t>(n), 0.0);
  double lp_cur;

  if (opts.kind == ProposalKind::smmala) {
    worker = std::make_unique<SmmalaWorker>(model, opts.smmala);
    summary.inexact_logdet = !worker->dense_path();
    cur_state = worker->evaluate(x, chain_rng);
    if (!cur_state.valid) throw NumericError("mh_chain: invalid initial state");
    lp_cur = cur_state.log_posterior;
  } else {
    lp_cur = log_posterior(model, x);
  }

  StepSizeAdapter adapter(opts.delta, opts.target_accept);
  double delta = opts.delta;
  summary.mean_state.assign(static_cast<std::size_t>(n), 0.0);
  std::int64_t kept = 0, accepted_post = 0, post_iters = 0;

  for (int it = 1; it <= opts.iterations; ++it) {
    const bool warmup = it <= opts.adapt_iterations;
    double logr = kNegInf;
    int inner = 0;
    Vector proposal_state;
    double lp_prop = kNegInf;
    SmmalaWorker::State prop_state;

    if (opts.kind == ProposalKind::rw) {
      proposal_state.resize(x.size());
      const Vector xi = rng::standard_normal(chain_rng, x.size());
      for (std::size_t i = 0; i < x.size(); ++i) proposal_state[i] = x[i] + delta * xi[i];
      try {
        lp_prop = log_posterior(model, proposal_state);
        logr = lp_prop - lp_cur;
      } catch (const NumericError&) {
        logr = kNegInf;
      }
    } else if (opts.kind == ProposalKind::mala) {
      const Proposal prop = mala_propose(model, x, delta, chain_rng);
      if (prop.ok) {
        proposal_state = prop.state;
        try {
          lp_prop = log_posterior(model, proposal_state);
          logr = lp_prop - lp_cur + prop.reverse_logdensity - prop.forward_logdensity;
        } catch (const NumericError&) {
          logr = kNegInf;
        }
      }
      inner = prop.inner_iterations;
    } else {
      SmmalaWorker::Step step = worker->propose(cur_state, delta, chain_rng);
      inner = step.prop.inner_iterations;
      if (step.prop.ok && step.state.valid) {
        lp_prop = step.state.log_posterior;
        logr = lp_prop - cur_state.log_posterior + step.prop.reverse_logdensity -
               step.prop.forward_logdensity;
        prop_state = std::move(step.state);
        proposal_state = prop_state.x;
      }
    }

    const double u = unif(chain_rng);
    const bool accept = std::isfinite(logr) ? (std::log(u) < logr) : false;
    if (accept) {
      x = proposal_state;
      lp_cur = lp_prop;
      if (opts.kind == ProposalKind::smmala) cur_state = std::move(prop_state);
    }

    summary.records.push_back({it, accept, lp_cur, inner});

    if (warmup) {
      const double aprob = std::isfinite(logr) ? std::min(1.0, std::exp(logr)) : 0.0;
      adapter.update(aprob);
      delta = adapter.current();
      if (it == opts.adapt_iterations) delta = adapter.frozen();
    } else {
      ++post_iters;
      if (accept) ++accepted_post;
      for (std::size_t i = 0; i < x.size(); ++i)
        summary.mean_state[i] += (x[i] - summary.mean_state[i]) / static_cast<double>(post_iters);
      if (opts.thin > 0 && (post_iters % opts.thin == 0)) {
        summary.thinned_iterations.push_back(it);
        summary.thinned_states.push_back(x);
        ++kept;
      }
    }
  }
  (void)kept;

  summary.acceptance_rate =
      post_iters > 0 ? static_cast<double>(accepted_post) / static_cast<double>(post_iters) : 0.0;
  summary.delta_final = delta;
  summary.iterations = opts.iterations;
  summary.final_state = x;
  summary.final_log_posterior = lp_cur;
  return summary;
}

// --- diagnostics & simulation ---

double trace_diagnostic(const LgcpModel& model, const Vector& x, double alpha) {
  const std::int64_t n = model.dim();
  if (static_cast<std::int64_t>(x.size()) != n)
    throw DimensionError("trace_diagnostic: state length mismatch");
  const double inv11 = model.prior->inverse_diagonal_entry(alpha);
  const double area = model.lattice.cell_area();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    s += area * std::exp(model.mean_offset + x[i]) - alpha;
  return inv11 * s;
}

Vector sample_field(const BlockCirculantOperator& prior, std::mt19937_64& rng) {
  return prior.filter_apply(rng::standard_normal(rng, static_cast<std::size_t>(prior.dim())), -0.5);
}

PointPattern sample_pattern_given_field(const TorusLattice& lattice, const Vector& log_intensity,
                                        std::mt19937_64& rng) {
  if (static_cast<std::int64_t>(log_intensity.size()) != lattice.cells())
    throw DimensionError("sample_pattern_given_field: field length mismatch");
  const double area = lattice.cell_area();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PointPattern pattern;
  for (int i = 0; i < lattice.n1; ++i) {
    for (int j = 0; j < lattice.n2; ++j) {
      const double s = log_intensity[static_cast<std::size_t>(i) * lattice.n2 + j];
      if (!(s < 700.0 - std::log(area)))
        throw NumericError("sample_pattern_given_field: intensity overflow");
      std::poisson_distribution<std::int64_t> pois(area * std::exp(s));
      const std::int64_t y = pois(rng);
      for (std::int64_t k = 0; k < y; ++k) {
        const double sx = (i + unif(rng)) / lattice.n1;
        const double sy = (j + unif(rng)) / lattice.n2;
        pattern.points.push_back({sx, sy});
      }
    }
  }
  return pattern;
}

LgcpSimulation simulate_lgcp(const TorusLattice& lattice,
                             std::shared_ptr<const BlockCirculantOperator> prior,
                             std::uint64_t seed, double mean_offset) {
  if (!prior || prior->dim() != lattice.cells())
    throw DimensionError("simulate_lgcp: prior dimension does not match lattice");
  auto eng = rng::stream(seed, 0x73696dULL);  // sim stream

  LgcpSimulation sim;
  sim.field = sample_field(*prior, eng);
  Vector log_intensity(sim.field.size());
  for (std::size_t i = 0; i < sim.field.size(); ++i)
    log_intensity[i] = mean_offset + sim.field[i];

  // Counts are recorded from the Poisson draws themselves; binning the
  // scattered points would be equivalent up to floating-point cell edges.
  const double area = lattice.cell_area();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  sim.counts.counts.assign(static_cast<std::size_t>(lattice.cells()), 0);
  for (int i = 0; i < lattice.n1; ++i) {
    for (int j = 0; j < lattice.n2; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * lattice.n2 + j;
      const double s = log_intensity[idx];
      if (!(s < 700.0 - std::log(area)))
        throw NumericError("simulate_lgcp: intensity overflow");
      std::poisson_distribution<std::int64_t> pois(area * std::exp(s));
      const std::int64_t y = pois(eng);
      sim.counts.counts[idx] = y;
      for (std::int64_t k = 0; k < y; ++k) {
        const double sx = (i + unif(eng)) / lattice.n1;
        const double sy = (j + unif(eng)) / lattice.n2;
        sim.pattern.points.push_back({sx, sy});
      }
    }
  }
  return sim;
}

}  // namespace gmrf
