#pragma once

#include <Eigen/Core>

namespace msfv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Friction coefficients of an n-species mixture and the constants derived from them.
///
/// c is symmetric with zero diagonal and positive off-diagonal entries
/// (inverse inter-species diffusivities). With c* the smallest off-diagonal
/// entry, cBar = c - c* off the diagonal, cBarMax its largest entry and
/// alpha = 4 / (c* + 2 cBarMax).
class SpeciesSystem {
 public:
  int n() const { return static_cast<int>(c_.rows()); }
  const Matrix& c() const { return c_; }
  double cStar() const { return cStar_; }
  const Matrix& cBar() const { return cBar_; }
  double cBarMax() const { return cBarMax_; }
  double alpha() const { return alpha_; }

 private:
  friend SpeciesSystem build_system(const Matrix& c);
  SpeciesSystem() = default;

  Matrix c_;
  double cStar_ = 0.0;
  Matrix cBar_;
  double cBarMax_ = 0.0;
  double alpha_ = 0.0;
};

/// Validates c and derives c*, cBar, cBarMax, alpha.
/// Throws std::invalid_argument for n < 2, non-square, nonzero diagonal,
/// asymmetric or nonpositive off-diagonal input.
SpeciesSystem build_system(const Matrix& c);

/// A_ii = sum_{j!=i} c_ij v_j, A_ij = -c_ij v_i.
Matrix mat_A(const SpeciesSystem& sys, const Vector& v);

/// Same structure as mat_A with cBar in place of c. v lies in its kernel and
/// its range has zero component sum.
Matrix mat_Abar(const SpeciesSystem& sys, const Vector& v);

/// C_ij = v_i.
Matrix mat_C(const Vector& v);

/// diag(v).
Matrix mat_M(const Vector& v);

/// B(v) = c* M(v)^{-1} + M(v)^{-1} Abar(v); symmetric positive definite.
/// Throws std::domain_error unless every v_i > 0.
Matrix mat_B(const SpeciesSystem& sys, const Vector& v);

/// Smallest eigenvalue of (X + X^T)/2.
double min_sym_eigenvalue(const Matrix& X);

/// Membership in the simplex {v >= 0, sum v = 1} up to `tol`.
bool in_simplex(const Vector& v, double tol = 1e-12);

}  // namespace msfv
