#include "msfv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace msfv {
namespace {

Matrix assemble_friction(const Matrix& coeff, const Vector& v) {
  const Eigen::Index n = coeff.rows();
  if (v.size() != n) throw std::invalid_argument("composition vector has wrong length");
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      diag += coeff(i, j) * v(j);
      A(i, j) = -coeff(i, j) * v(i);
    }
    A(i, i) = diag;
  }
  return A;
}

}  // namespace

SpeciesSystem build_system(const Matrix& c) {
  if (c.rows() != c.cols()) throw std::invalid_argument("species.c must be square");
  if (c.rows() < 2) throw std::invalid_argument("species.c must describe at least two species");
  const Eigen::Index n = c.rows();
  double cStar = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c(i, i) != 0.0) throw std::invalid_argument("species.c must have a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double cij = c(i, j);
      const double cji = c(j, i);
      if (!std::isfinite(cij) || !(cij > 0.0))
        throw std::invalid_argument("species.c off-diagonal entries must be positive (entry " +
                                    std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      if (std::abs(cij - cji) > 1e-14 * std::max(std::abs(cij), std::abs(cji)))
        throw std::invalid_argument("species.c must be symmetric (entries " + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + " and " + std::to_string(j + 1) + "," +
                                    std::to_string(i + 1) + " differ)");
      cStar = std::min(cStar, cij);
    }
  }

  SpeciesSystem sys;
  sys.c_ = 0.5 * (c + c.transpose());
  sys.cStar_ = cStar;
  sys.cBar_ = Matrix::Zero(n, n);
  sys.cBarMax_ = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      sys.cBar_(i, j) = sys.c_(i, j) - cStar;
      sys.cBarMax_ = std::max(sys.cBarMax_, sys.cBar_(i, j));
    }
  }
  sys.alpha_ = 4.0 / (sys.cStar_ + 2.0 * sys.cBarMax_);
  return sys;
}

Matrix mat_A(const SpeciesSystem& sys, const Vector& v) { return assemble_friction(sys.c(), v); }

Matrix mat_Abar(const SpeciesSystem& sys, const Vector& v) { return assemble_friction(sys.cBar(), v); }

Matrix mat_C(const Vector& v) { return v * Vector::Ones(v.size()).transpose(); }

Matrix mat_M(const Vector& v) { return v.asDiagonal(); }

Matrix mat_B(const SpeciesSystem& sys, const Vector& v) {
  if (v.size() != sys.n()) throw std::invalid_argument("mat_B: composition vector has wrong length");
  if ((v.array() <= 0.0).any()) throw std::domain_error("mat_B requires strictly positive components");
  const Vector inv = v.cwiseInverse();
  Matrix B = inv.asDiagonal() * mat_Abar(sys, v);
  B.diagonal() += sys.cStar() * inv;
  return B;
}

double min_sym_eigenvalue(const Matrix& X) {
  const Matrix S = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

bool in_simplex(const Vector& v, double tol) {
  return (v.array() >= -tol).all() && std::abs(v.sum() - 1.0) <= tol;
}

}  // namespace msfv
