#include "gmrf/gallery.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Sparse>

namespace gmrf {

Vector torus_precision_base(int n1, int n2, double tau, double kappa, int nu) {
  if (n1 < 2 || n2 < 1) throw DimensionError("torus_precision_base: grid too small");
  if (nu != 1 && nu != 2) throw std::invalid_argument("torus_precision_base: nu must be 1 or 2");
  if (!(tau > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("torus_precision_base: tau and kappa must be positive");

  const std::int64_t n = static_cast<std::int64_t>(n1) * n2;
  const double h2inv = static_cast<double>(n1) * n1;  // h = 1/n1
  const double two_pi = 2.0 * std::numbers::pi;

  // Eigenvalues are available in closed form; the base is their inverse DFT,
  // real by symmetry of the spectrum.
  std::vector<std::complex<double>> modes(static_cast<std::size_t>(n));
  for (int j = 0; j < n1; ++j) {
    for (int k = 0; k < n2; ++k) {
      const double ell = h2inv * (4.0 - 2.0 * std::cos(two_pi * j / n1) -
                                  2.0 * std::cos(two_pi * k / n2));
      const double base_val = kappa * kappa + ell;
      modes[static_cast<std::size_t>(j) * n2 + k] =
          tau * (nu == 1 ? base_val : base_val * base_val);
    }
  }
  auto fft = Fft2d::plan(n1, n2);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  fft->inverse(modes.data(), out.data());
  Vector base(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) base[i] = out[i].real() / static_cast<double>(n);
  return base;
}

std::shared_ptr<const BlockCirculantOperator> torus_precision(int n1, int n2, double tau,
                                                              double kappa, int nu) {
  return std::make_shared<const BlockCirculantOperator>(n1, n2,
                                                        torus_precision_base(n1, n2, tau, kappa, nu));
}

SparseOperator sparse_from_circulant(const BlockCirculantOperator& q, double prune) {
  const int n1 = q.n1(), n2 = q.n2();
  const std::int64_t n = q.dim();
  const Vector& base = q.base();
  double scale = 0.0;
  for (double v : base) scale = std::max(scale, std::abs(v));

  std::vector<std::pair<std::int64_t, double>> stencil;  // flat offset -> value
  for (std::int64_t k = 0; k < n; ++k)
    if (std::abs(base[k]) > prune * scale) stencil.emplace_back(k, base[k]);

  std::vector<Triplet> entries;
  entries.reserve(stencil.size() * static_cast<std::size_t>(n));
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const std::int64_t row = static_cast<std::int64_t>(i) * n2 + j;
      for (const auto& [off, val] : stencil) {
        const int di = static_cast<int>(off / n2);
        const int dj = static_cast<int>(off % n2);
        const int ci = (i - di + n1) % n1;
        const int cj = (j - dj + n2) % n2;
        entries.push_back({row, static_cast<std::int64_t>(ci) * n2 + cj, val});
      }
    }
  }
  return SparseOperator(n, std::move(entries));
}

Eigen::MatrixXd dense_from_circulant(const BlockCirculantOperator& q) {
  const int n1 = q.n1(), n2 = q.n2();
  const std::int64_t n = q.dim();
  if (n > 4096) throw DimensionError("dense_from_circulant: dimension cap 4096 exceeded");
  const Vector& base = q.base();
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n1; ++k)
        for (int l = 0; l < n2; ++l)
          a(static_cast<Eigen::Index>(i) * n2 + j, static_cast<Eigen::Index>(k) * n2 + l) =
              base[static_cast<std::size_t>((i - k + n1) % n1) * n2 + (j - l + n2) % n2];
  return a;
}

SparseOperator second_order_random_walk(int m) {
  if (m < 2) throw DimensionError("second_order_random_walk: m must be at least 2");
  const std::int64_t n = static_cast<std::int64_t>(m) * m;
  const double s2 = static_cast<double>(m + 1) * (m + 1);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5 * n));
  auto idx = [m](int i, int j) { return static_cast<std::int64_t>(i) * m + j; };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      trips.emplace_back(idx(i, j), idx(i, j), 4.0 * s2);
      if (i > 0) trips.emplace_back(idx(i, j), idx(i - 1, j), -s2);
      if (i < m - 1) trips.emplace_back(idx(i, j), idx(i + 1, j), -s2);
      if (j > 0) trips.emplace_back(idx(i, j), idx(i, j - 1), -s2);
      if (j < m - 1) trips.emplace_back(idx(i, j), idx(i, j + 1), -s2);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> q = (a * a).pruned(1e-14);

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(q.nonZeros()));
  for (int k = 0; k < q.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, k); it; ++it)
      entries.push_back({it.row(), it.col(), it.value()});
  return SparseOperator(n, std::move(entries));
}

}  // namespace gmrf
