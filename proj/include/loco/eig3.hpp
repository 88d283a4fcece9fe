#pragma once

#include <Eigen/Dense>

namespace loco {

// Eigen-decomposition of a symmetric 3x3 matrix.
// vals[0] <= vals[1] <= vals[2]; vecs.col(j) is the unit eigenvector of
// vals[j]. Guarantees ||A v - lambda v|| <= 1e-8 * max(1, vals[2]).
struct SymEig3 {
  Eigen::Vector3d vals;
  Eigen::Matrix3d vecs;
};

// Trigonometric (Cardano) closed form. Fast; eigenvectors degrade when the
// spectrum clusters.
SymEig3 eig3_closed_form(const Eigen::Matrix3d& a);

// Cyclic Jacobi rotations to machine precision. Slower, unconditionally
// robust.
SymEig3 eig3_jacobi(const Eigen::Matrix3d& a);

// Dispatch: closed form, falling back to Jacobi when eigenvalues cluster
// within 1e-12 (relative) or the closed-form residual is not tight.
SymEig3 eig3_sym(const Eigen::Matrix3d& a);

}  // namespace loco
