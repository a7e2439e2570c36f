#include "gmrf/tridiag.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmrf {

// Implicit-shift QL iteration (classic tql2), with the eigenvector update
// collapsed to the first row of the accumulated rotation product.
void tridiag_eigen_first_row(std::span<const double> diag, std::span<const double> offdiag,
                             std::vector<double>& values, std::vector<double>& first_row) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) throw std::invalid_argument("tridiag_eigen_first_row: empty matrix");
  if (static_cast<int>(offdiag.size()) != n - 1)
    throw std::invalid_argument("tridiag_eigen_first_row: offdiag length must be n-1");

  values.assign(diag.begin(), diag.end());
  std::vector<double> e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) e[i] = offdiag[i];
  first_row.assign(static_cast<std::size_t>(n), 0.0);
  first_row[0] = 1.0;

  auto& d = values;
  auto& z = first_row;
  const double eps = std::numeric_limits<double>::epsilon();

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter == 50)
          throw std::runtime_error("tridiag_eigen_first_row: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

TridiagEigen tridiag_eigen(std::span<const double> diag, std::span<const double> offdiag) {
  const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), n);
  Eigen::VectorXd e = offdiag.empty()
                          ? Eigen::VectorXd()
                          : Eigen::Map<const Eigen::VectorXd>(offdiag.data(),
                                                              static_cast<Eigen::Index>(offdiag.size()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("tridiag_eigen: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Vector tridiag_apply_to_e1(std::span<const double> diag, std::span<const double> offdiag,
                           const std::function<double(double)>& f) {
  const TridiagEigen te = tridiag_eigen(diag, offdiag);
  const Eigen::Index m = te.values.size();
  Eigen::VectorXd w = te.vectors.row(0).transpose();
  for (Eigen::Index i = 0; i < m; ++i) w[i] *= f(te.values[i]);
  const Eigen::VectorXd y = te.vectors * w;
  return Vector(y.data(), y.data() + m);
}

}  // namespace gmrf
