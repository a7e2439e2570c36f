#pragma once

#include <memory>

#include <Eigen/Dense>

#include "gmrf/operators.hpp"

namespace gmrf {

// First column of Q = tau * (kappa^2 I + L)^nu on an n1 x n2 torus, where L is
// the five-point torus Laplacian scaled by h^{-2}, h = 1/n1, and nu is 1 or 2.
// This family is the repository's canonical stationary precision.
Vector torus_precision_base(int n1, int n2, double tau, double kappa, int nu);

std::shared_ptr<const BlockCirculantOperator> torus_precision(int n1, int n2, double tau,
                                                              double kappa, int nu);

// Same matrix in CSR form; entries of the base below `prune` in magnitude
// (relative to the largest) are treated as structural zeros.
SparseOperator sparse_from_circulant(const BlockCirculantOperator& q, double prune = 1e-12);

// Dense materialisation straight from the base, Q(u, v) = base[u - v mod grid].
// Cheaper than to_dense() for circulants and exact to the last bit.
Eigen::MatrixXd dense_from_circulant(const BlockCirculantOperator& q);

// (s^2 A)^2 with A the five-point Dirichlet Laplacian on the m x m interior
// grid of the unit square and s = m + 1: a second-order random-walk style SPD
// matrix used by the benchmark suite ("rw2" in the CLI).
SparseOperator second_order_random_walk(int m);

}  // namespace gmrf
