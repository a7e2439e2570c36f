#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmrf/vec.hpp"

namespace gmrf {

// Eigenvalues of the symmetric tridiagonal T(diag, offdiag) together with the
// first row of its eigenvector matrix -- the only part Gauss-type quadrature
// rules and e1-projections need.  Implicit-shift QL accumulating a single
// row; O(m^2).  Output order is unspecified.
void tridiag_eigen_first_row(std::span<const double> diag, std::span<const double> offdiag,
                             std::vector<double>& values, std::vector<double>& first_row);

// Full eigendecomposition (ascending eigenvalues) of the same matrix.
struct TridiagEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
TridiagEigen tridiag_eigen(std::span<const double> diag, std::span<const double> offdiag);

// y = f(T) e1 through the full eigendecomposition.
Vector tridiag_apply_to_e1(std::span<const double> diag, std::span<const double> offdiag,
                           const std::function<double(double)>& f);

}  // namespace gmrf
