#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "msfv/config.hpp"
#include "msfv/model.hpp"

using namespace msfv;

namespace {

Matrix two_species(double c12) {
  Matrix c(2, 2);
  c << 0, c12, c12, 0;
  return c;
}

double max_abs(const Matrix& X) { return X.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("derived constants") {
  const SpeciesSystem s1 = build_system(coefficients_1d());
  CHECK(s1.cStar() == doctest::Approx(0.1));
  CHECK(s1.cBarMax() == doctest::Approx(0.9));
  CHECK(s1.alpha() == doctest::Approx(4.0 / 1.9));
  CHECK(s1.alpha() == doctest::Approx(2.105263).epsilon(1e-6));

  const SpeciesSystem s2 = build_system(two_species(1.0));
  CHECK(s2.cStar() == 1.0);
  CHECK(s2.cBarMax() == 0.0);
  CHECK(s2.alpha() == 4.0);

  const SpeciesSystem s3 = build_system(coefficients_2d());
  CHECK(s3.cStar() == doctest::Approx(0.1));
  CHECK(s3.cBarMax() == doctest::Approx(1.9));
  CHECK(s3.alpha() == doctest::Approx(1.025641).epsilon(1e-6));
}

TEST_CASE("build_system rejects invalid coefficients") {
  Matrix asym = coefficients_1d();
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(build_system(asym), std::invalid_argument);
  Matrix neg = coefficients_1d();
  neg(0, 2) = neg(2, 0) = -1.0;
  CHECK_THROWS_AS(build_system(neg), std::invalid_argument);
  Matrix zero = coefficients_1d();
  zero(1, 2) = zero(2, 1) = 0.0;
  CHECK_THROWS_AS(build_system(zero), std::invalid_argument);
  Matrix diag = coefficients_1d();
  diag(1, 1) = 1.0;
  CHECK_THROWS_AS(build_system(diag), std::invalid_argument);
  CHECK_THROWS_AS(build_system(Matrix::Zero(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(build_system(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("mat_A by hand") {
  const SpeciesSystem s = build_system(two_species(1.0));
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK(max_abs(mat_A(s, Vector::Constant(2, 0.5)) - expected) == 0.0);
  CHECK(max_abs(mat_A(build_system(coefficients_1d()), Vector::Zero(3))) == 0.0);

  // Entrywise formula against a loop over the definition.
  const SpeciesSystem s1 = build_system(coefficients_1d());
  Vector v(3);
  v << 0.2, 0.7, 0.1;
  const Matrix A = mat_A(s1, v);
  const Matrix& c = s1.c();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double ref = 0.0;
      if (i == j) {
        for (int k = 0; k < 3; ++k)
          if (k != i) ref += c(i, k) * v(k);
      } else {
        ref = -c(i, j) * v(i);
      }
      CHECK(A(i, j) == doctest::Approx(ref).epsilon(1e-15));
    }
}

TEST_CASE("mat_Abar structure") {
  const SpeciesSystem s2 = build_system(two_species(3.0));
  Vector v(2);
  v << 0.3, 0.9;
  CHECK(max_abs(mat_Abar(s2, v)) == 0.0);

  const SpeciesSystem s1 = build_system(coefficients_1d());
  const Vector third = Vector::Constant(3, 1.0 / 3.0);
  CHECK((mat_Abar(s1, third) * third).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("newid on random simplex points") {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> e(1.0);
  const SpeciesSystem s = build_system(coefficients_1d());
  for (int k = 0; k < 200; ++k) {
    Vector u(3);
    for (int i = 0; i < 3; ++i) u(i) = e(rng);
    u /= u.sum();
    const Matrix rhs = Matrix(s.cStar() * Matrix::Identity(3, 3)) - s.cStar() * mat_C(u) + mat_Abar(s, u);
    CHECK(max_abs(mat_A(s, u) - rhs) <= 1e-14);
  }
}

TEST_CASE("mat_B") {
  const SpeciesSystem s = build_system(two_species(1.0));
  Vector v(2);
  v << 0.5, 0.25;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 2.0;
  expected(1, 1) = 4.0;
  CHECK(max_abs(mat_B(s, v) - expected) < 1e-15);

  Vector bad(2);
  bad << 0.0, 1.0;
  CHECK_THROWS_AS(mat_B(s, bad), std::domain_error);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(1e-3, 1.0);
  const SpeciesSystem s1 = build_system(coefficients_2d());
  for (int k = 0; k < 100; ++k) {
    Vector w(3);
    for (int i = 0; i < 3; ++i) w(i) = d(rng);
    const Matrix B = mat_B(s1, w);
    CHECK(max_abs(B - B.transpose()) <= 1e-12);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (B + B.transpose())).eigenvalues().minCoeff();
    CHECK(lmin >= s1.cStar() - 1e-10);
  }
}

TEST_CASE("upper bound on Abar needs the composition to sum to at most one") {
  // cBar_{i4} = 1, all other cBar entries 0, v = (1,1,1,eps), xi = e4:
  // xi^T M^{-1} Abar xi = 3 / eps while 2 cBarMax xi^T M^{-1} xi = 2 / eps.
  Matrix c = Matrix::Constant(4, 4, 1.0);
  c.diagonal().setZero();
  for (int i = 0; i < 3; ++i) c(i, 3) = c(3, i) = 2.0;
  const SpeciesSystem s = build_system(c);
  const double eps = 1e-2;
  Vector v(4);
  v << 1.0, 1.0, 1.0, eps;
  const Vector inv = v.cwiseInverse();
  const Matrix X = Matrix(2.0 * s.cBarMax() * inv.asDiagonal()) - inv.asDiagonal() * mat_Abar(s, v);
  CHECK(min_sym_eigenvalue(X) < -1.0);

  // Same system on a point with <1, v> <= 1.
  Vector w(4);
  w << 0.3, 0.3, 0.3, 0.1 * eps;
  const Vector winv = w.cwiseInverse();
  const Matrix Y = Matrix(2.0 * s.cBarMax() * winv.asDiagonal()) - winv.asDiagonal() * mat_Abar(s, w);
  CHECK(min_sym_eigenvalue(Y) >= -1e-10);
}

TEST_CASE("A(v) kernel for positive v") {
  const SpeciesSystem s = build_system(coefficients_2d());
  Vector v(3);
  v << 0.2, 0.5, 0.3;
  const Matrix A = mat_A(s, v);
  CHECK((A * v).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(A.fullPivLu().rank() == 2);
}

TEST_CASE("helpers") {
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  CHECK(in_simplex(v));
  v(0) = -1e-9;
  CHECK_FALSE(in_simplex(v));
  CHECK(max_abs(mat_M(Vector::Constant(2, 2.0)) - 2.0 * Matrix::Identity(2, 2)) == 0.0);
  Vector u(2);
  u << 0.1, 0.9;
  CHECK(mat_C(u)(0, 1) == 0.1);
  CHECK(mat_C(u)(1, 0) == 0.9);
}

}
