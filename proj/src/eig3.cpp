#include "loco/eig3.hpp"

#include <algorithm>
#include <cmath>

namespace loco {

namespace {

void sort_ascending(SymEig3& e) {
  for (int i = 0; i < 2; ++i) {
    int m = i;
    for (int j = i + 1; j < 3; ++j)
      if (e.vals[j] < e.vals[m]) m = j;
    if (m != i) {
      std::swap(e.vals[i], e.vals[m]);
      e.vecs.col(i).swap(e.vecs.col(m));
    }
  }
}

// Unit eigenvector for a known eigenvalue: the two rows of (A - lambda I)
// with the largest cross product span the orthogonal complement.
Eigen::Vector3d vector_for(const Eigen::Matrix3d& a, double lambda) {
  Eigen::Matrix3d m = a;
  m.diagonal().array() -= lambda;
  Eigen::Vector3d c0 = m.row(0).cross(m.row(1));
  Eigen::Vector3d c1 = m.row(0).cross(m.row(2));
  Eigen::Vector3d c2 = m.row(1).cross(m.row(2));
  double n0 = c0.squaredNorm(), n1 = c1.squaredNorm(), n2 = c2.squaredNorm();
  Eigen::Vector3d best = c0;
  double nbest = n0;
  if (n1 > nbest) { best = c1; nbest = n1; }
  if (n2 > nbest) { best = c2; nbest = n2; }
  if (nbest <= 0.0) return Eigen::Vector3d::UnitX();  // degenerate
  return best / std::sqrt(nbest);
}

}  // namespace

SymEig3 eig3_closed_form(const Eigen::Matrix3d& a) {
  SymEig3 out;
  const double q = a.trace() / 3.0;
  Eigen::Matrix3d b = a;
  b.diagonal().array() -= q;
  const double p2 = b.squaredNorm() / 6.0;
  const double p = std::sqrt(std::max(p2, 0.0));

  if (p < 1e-300) {  // scalar matrix
    out.vals.setConstant(q);
    out.vecs.setIdentity();
    return out;
  }

  // eigenvalues of B/p are 2 cos(theta + 2 pi k / 3)
  double detr = (b / p).determinant() / 2.0;
  detr = std::clamp(detr, -1.0, 1.0);
  const double theta = std::acos(detr) / 3.0;
  const double two_pi_3 = 2.0943951023931953;
  out.vals[2] = q + 2.0 * p * std::cos(theta);
  out.vals[0] = q + 2.0 * p * std::cos(theta + two_pi_3);
  out.vals[1] = 3.0 * q - out.vals[0] - out.vals[2];

  for (int j = 0; j < 3; ++j) out.vecs.col(j) = vector_for(a, out.vals[j]);

  // Re-orthogonalize: smallest/largest vectors are the reliable ones.
  out.vecs.col(1) = out.vecs.col(2).cross(out.vecs.col(0));
  double n = out.vecs.col(1).norm();
  if (n > 0.0) out.vecs.col(1) /= n;
  sort_ascending(out);
  return out;
}

SymEig3 eig3_jacobi(const Eigen::Matrix3d& a) {
  Eigen::Matrix3d d = a;
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = d(0, 1) * d(0, 1) + d(0, 2) * d(0, 2) + d(1, 2) * d(1, 2);
    if (std::sqrt(off) <= 1e-18 * std::max(1e-300, d.norm())) break;

    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double apq = d(p, q);
        if (apq == 0.0) continue;
        double app = d(p, p), aqq = d(q, q);
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;

        Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
        j(p, p) = c; j(q, q) = c; j(p, q) = s; j(q, p) = -s;
        d = j.transpose() * d * j;
        d(p, q) = d(q, p) = 0.0;  // rotation zeroes this pair by construction
        v = v * j;
      }
    }
  }

  SymEig3 out;
  out.vals = d.diagonal();
  out.vecs = v;
  sort_ascending(out);
  return out;
}

SymEig3 eig3_sym(const Eigen::Matrix3d& a) {
  SymEig3 e = eig3_closed_form(a);

  const double scale = std::max(1.0, std::abs(e.vals[2]));
  const double gap_tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
  bool clustered = (e.vals[1] - e.vals[0]) < gap_tol ||
                   (e.vals[2] - e.vals[1]) < gap_tol;

  if (!clustered) {
    bool tight = true;
    for (int j = 0; j < 3; ++j) {
      double res = (a * e.vecs.col(j) - e.vals[j] * e.vecs.col(j)).norm();
      if (res > 1e-11 * scale) { tight = false; break; }
    }
    if (tight) return e;
  }
  return eig3_jacobi(a);
}

}  // namespace loco
