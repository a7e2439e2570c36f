#include "oracles.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace gmrf::test {

Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector to_std(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

Eigen::MatrixXd dense_circulant(int n1, int n2, const Vector& base) {
  const Eigen::Index n = static_cast<Eigen::Index>(n1) * n2;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n1; ++k)
        for (int l = 0; l < n2; ++l)
          a(static_cast<Eigen::Index>(i) * n2 + j, static_cast<Eigen::Index>(k) * n2 + l) =
              base[static_cast<std::size_t>((i - k + n1) % n1) * n2 + (j - l + n2) % n2];
  return a;
}

Eigen::MatrixXd random_spd(int n, double cond, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lam(i) = std::pow(cond, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return q * lam.asDiagonal() * q.transpose();
}

Eigen::MatrixXd dense_spectral_apply(const Eigen::MatrixXd& a, double (*f)(double)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_spectral_apply: eig failed");
  Eigen::VectorXd fe = es.eigenvalues();
  for (Eigen::Index i = 0; i < fe.size(); ++i) fe(i) = f(fe(i));
  return es.eigenvectors() * fe.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd dense_matrix_log(const Eigen::MatrixXd& a) {
  return dense_spectral_apply(a, [](double x) {
    if (!(x > 0.0)) throw std::runtime_error("dense_matrix_log: nonpositive eigenvalue");
    return std::log(x);
  });
}

Eigen::MatrixXd dense_inv_sqrt(const Eigen::MatrixXd& a) {
  return dense_spectral_apply(a, [](double x) {
    if (!(x > 0.0)) throw std::runtime_error("dense_inv_sqrt: nonpositive eigenvalue");
    return 1.0 / std::sqrt(x);
  });
}

double dense_logdet(const Eigen::MatrixXd& a) {
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("dense_logdet: not SPD");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

std::vector<double> reference_cg_residuals(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                           int max_iterations) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b, p = b;
  double rr = r.squaredNorm();
  std::vector<double> history;
  for (int m = 1; m <= max_iterations; ++m) {
    const Eigen::VectorXd ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    history.push_back(std::sqrt(rr_new));
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    if (history.back() == 0.0) break;
  }
  return history;
}

std::vector<std::vector<int>> all_pairs_distance(const SparseOperator& q, int cap) {
  const std::int64_t n = q.dim();
  const auto& rp = q.row_ptr();
  const auto& ci = q.col_idx();
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(n),
                                     std::vector<int>(static_cast<std::size_t>(n), cap + 1));
  std::deque<std::int64_t> queue;
  for (std::int64_t s = 0; s < n; ++s) {
    auto& d = dist[s];
    d[s] = 0;
    queue.clear();
    queue.push_back(s);
    while (!queue.empty()) {
      const std::int64_t u = queue.front();
      queue.pop_front();
      if (d[u] == cap) continue;
      for (std::int64_t k = rp[u]; k < rp[u + 1]; ++k) {
        const std::int64_t w = ci[k];
        if (w == u || d[w] <= cap) continue;
        d[w] = d[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

double dense_mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov) {
  const Eigen::Index n = x.size();
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("dense_mvn_logpdf: cov not SPD");
  const Eigen::VectorXd d = x - mean;
  const Eigen::VectorXd y = llt.matrixL().solve(d);
  const double logdet_cov = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * n * std::log(2.0 * M_PI) - 0.5 * logdet_cov - 0.5 * y.squaredNorm();
}

double pitman_morgan_t(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 3)
    throw std::invalid_argument("pitman_morgan_t: need equal-length samples, n >= 3");
  const std::size_t n = a.size();
  double mu = 0.0, mw = 0.0;
  std::vector<double> u(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = a[i] + b[i];
    w[i] = a[i] - b[i];
    mu += u[i];
    mw += w[i];
  }
  mu /= n;
  mw /= n;
  double suu = 0.0, sww = 0.0, suw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    sww += (w[i] - mw) * (w[i] - mw);
    suw += (u[i] - mu) * (w[i] - mw);
  }
  if (suu <= 0.0 || sww <= 0.0) return 0.0;
  const double r = suw / std::sqrt(suu * sww);
  const double df = static_cast<double>(n) - 2.0;
  return r * std::sqrt(df / std::max(1.0 - r * r, 1e-300));
}

}  // namespace gmrf::test
