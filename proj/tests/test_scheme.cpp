#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "msfv/config.hpp"
#include "msfv/scheme.hpp"

using namespace msfv;

namespace {

Matrix two_species(double c12) {
  Matrix c(2, 2);
  c << 0, c12, c12, 0;
  return c;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

StateField constant_state(std::shared_ptr<const Mesh> mesh, const Vector& u) {
  Matrix values(u.size(), static_cast<Eigen::Index>(mesh->num_cells()));
  values.colwise() = u;
  return StateField{std::move(mesh), values};
}

// Root of the scalar equation left after eliminating the simplex and mass
// constraints from the 2-cell, 2-species step (cells of width h, one face at
// distance d, c12 = c*): h (a - aOld) / dt - ((1 - a) - a) / (c* d) = 0.
double bisection_oracle(double aOld, double h, double d, double cStar, double dt) {
  auto f = [&](double a) { return h * (a - aOld) / dt - ((1.0 - a) - a) / (cStar * d); };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("log_mean branches") {
  CHECK(log_mean(0.0, 0.5) == 0.0);
  CHECK(log_mean(-1.0, 0.5) == 0.0);
  CHECK(log_mean(0.4, 0.4) == 0.4);
  CHECK(log_mean(1.0, std::numbers::e) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-15));
  CHECK(log_mean(std::numbers::e, 1.0) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-15));
  // Close arguments stay between min and max and near the geometric mean.
  const double a = 0.3, b = 0.3 * (1.0 + 1e-9);
  const double L = log_mean(a, b);
  CHECK(L >= a);
  CHECK(L <= b);
  CHECK(L == doctest::Approx(std::sqrt(a * b)).epsilon(1e-15));
  // Far apart arguments.
  CHECK(log_mean(1e-10, 1.0) == doctest::Approx((1.0 - 1e-10) / (std::log(1.0) - std::log(1e-10))).epsilon(1e-14));
}

TEST_CASE("log_mean partial derivatives match finite differences") {
  const double pairs[][2] = {{0.2, 0.7}, {0.5, 0.5000001}, {1e-6, 0.9}, {0.9, 0.3}};
  for (const auto& p : pairs) {
    const auto d = log_mean_partials(p[0], p[1]);
    const double ha = 1e-7 * p[0], hb = 1e-7 * p[1];
    const double fa = (log_mean(p[0] + ha, p[1]) - log_mean(p[0] - ha, p[1])) / (2 * ha);
    const double fb = (log_mean(p[0], p[1] + hb) - log_mean(p[0], p[1] - hb)) / (2 * hb);
    CHECK(d.da == doctest::Approx(fa).epsilon(1e-6));
    CHECK(d.db == doctest::Approx(fb).epsilon(1e-6));
  }
  const auto mid = log_mean_partials(0.4, 0.4);
  CHECK(mid.da == 0.5);
  CHECK(mid.db == 0.5);
  const auto zero = log_mean_partials(0.0, 0.4);
  CHECK(zero.da == 0.0);
  CHECK(zero.db == 0.0);
}

TEST_CASE("edge_fractions") {
  const Vector u = vec({0.2, 0.3, 0.5});
  CHECK((edge_fractions(u, u) - u).cwiseAbs().maxCoeff() == 0.0);
  const Vector f = edge_fractions(vec({0, 0.5, 0.5}), vec({0.5, 0.25, 0.25}));
  CHECK(f(0) == 0.0);
  const Vector g = edge_fractions(vec({1, 0, 0}), vec({std::numbers::e, 0, 0}));
  CHECK(g(0) == doctest::Approx(std::numbers::e - 1.0));
  CHECK(g(1) == 0.0);
  CHECK(g(2) == 0.0);
}

TEST_CASE("edge_flux") {
  const SpeciesSystem s1 = build_system(coefficients_1d());
  const Vector us = vec({0.2, 0.3, 0.5});
  CHECK(edge_flux(s1, us, Vector::Zero(3), 0.1).cwiseAbs().maxCoeff() == 0.0);

  const SpeciesSystem s2 = build_system(two_species(1.0));
  const Vector J = edge_flux(s2, vec({0.5, 0.5}), vec({0.1, -0.1}), 0.5);
  CHECK(J(0) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(J(1) == doctest::Approx(0.2).epsilon(1e-15));

  // Zero total flux for a jump with zero sum.
  const Vector J3 = edge_flux(s1, us, vec({0.1, -0.3, 0.2}), 0.25);
  CHECK(std::abs(J3.sum()) < 1e-14 * J3.cwiseAbs().maxCoeff());
}

TEST_CASE("residual vanishes on constant states") {
  auto mesh = std::make_shared<const Mesh>(uniform_rectangle(3, 2));
  const SpeciesSystem s = build_system(coefficients_2d());
  const StateField u = constant_state(mesh, vec({0.2, 0.3, 0.5}));
  CHECK(residual(s, *mesh, u, u, 1e-3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("residual on two cells by hand") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(2));
  const SpeciesSystem s = build_system(two_species(1.0));
  StateField uOld{mesh, Matrix(2, 2)};
  uOld.values << 0.25, 0.75, 0.75, 0.25;
  StateField uNew{mesh, Matrix(2, 2)};
  uNew.values << 0.3, 0.7, 0.7, 0.3;
  const double dt = 0.1;
  const Matrix R = residual(s, *mesh, uNew, uOld, dt);
  // J_K = -(u_L - u_K) / (c* d), d = 0.5, m_sigma = 1, m_K = 0.5.
  for (int i = 0; i < 2; ++i) {
    const double J = -(uNew.values(i, 1) - uNew.values(i, 0)) / 0.5;
    CHECK(R(i, 0) == doctest::Approx(0.5 * (uNew.values(i, 0) - uOld.values(i, 0)) / dt + J).epsilon(1e-14));
    CHECK(R(i, 1) == doctest::Approx(0.5 * (uNew.values(i, 1) - uOld.values(i, 1)) / dt - J).epsilon(1e-14));
  }
}

TEST_CASE("residual rejects mismatched inputs") {
  auto m1 = std::make_shared<const Mesh>(uniform_interval(2));
  auto m2 = std::make_shared<const Mesh>(uniform_interval(3));
  const SpeciesSystem s = build_system(two_species(1.0));
  const StateField a = constant_state(m1, vec({0.5, 0.5}));
  const StateField b = constant_state(m2, vec({0.5, 0.5}));
  CHECK_THROWS_AS(residual(s, *m1, a, b, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(residual(s, *m1, a, a, 0.0), std::invalid_argument);
}

TEST_CASE("jacobian matches central differences") {
  auto mesh = std::make_shared<const Mesh>(uniform_rectangle(3, 2));
  const SpeciesSystem s = build_system(coefficients_2d());
  StateField uOld{mesh, Matrix(3, 6)};
  StateField uNew{mesh, Matrix(3, 6)};
  for (int K = 0; K < 6; ++K) {
    const double t = 0.1 * K;
    uOld.values.col(K) = vec({0.2 + t * 0.5, 0.3, 0.5 - t * 0.5});
    uNew.values.col(K) = vec({0.25 + t * 0.4, 0.35 - t * 0.2, 0.4 - t * 0.2});
  }
  const double dt = 1e-2;
  const Matrix Ja = Matrix(jacobian(s, *mesh, uNew, uOld, dt));
  REQUIRE(Ja.rows() == 18);
  const double h = 1e-6;
  double worst = 0.0;
  StateField probe = uNew;
  for (int K = 0; K < 6; ++K)
    for (int i = 0; i < 3; ++i) {
      probe.values(i, K) += h;
      const Matrix Rp = residual(s, *mesh, probe, uOld, dt);
      probe.values(i, K) -= 2 * h;
      const Matrix Rm = residual(s, *mesh, probe, uOld, dt);
      probe.values(i, K) += h;
      const Matrix col = (Rp - Rm) / (2 * h);
      const Eigen::Map<const Vector> c(col.data(), col.size());
      worst = std::max(worst, (Ja.col(K * 3 + i) - c).cwiseAbs().maxCoeff());
    }
  CHECK(worst / Ja.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("project_simplex") {
  const Vector a = project_simplex(vec({0.2, 0.3, 0.5}), 1e-12);
  CHECK((a - vec({0.2, 0.3, 0.5})).cwiseAbs().maxCoeff() < 1e-16);
  const Vector b = project_simplex(vec({-0.01, 0.5, 0.51}), 1e-12);
  CHECK(b(0) == doctest::Approx(1e-12 / 1.01).epsilon(1e-12));
  CHECK(b(1) == doctest::Approx(0.5 / 1.01).epsilon(1e-12));
  CHECK(b(2) == doctest::Approx(0.51 / 1.01).epsilon(1e-12));
  CHECK(b(0) == doctest::Approx(9.90099e-13).epsilon(1e-6));
  const Vector c = project_simplex(vec({-1, -1}), 1e-12);
  CHECK(c(0) == 0.5);
  CHECK(c(1) == 0.5);
}

TEST_CASE("newton on a constant state is stationary") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(5));
  const SpeciesSystem s = build_system(coefficients_1d());
  const StateField u = constant_state(mesh, vec({0.2, 0.3, 0.5}));
  const StepResult r = newton_solve(s, *mesh, u, 1e-3);
  CHECK(r.iterations <= 2);
  CHECK((r.state.values - u.values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(r.fluxes.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-cell step matches the bisection oracle") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(2));
  const SpeciesSystem s = build_system(two_species(1.0));
  StateField uOld{mesh, Matrix(2, 2)};
  uOld.values << 0.25, 0.75, 0.75, 0.25;
  const StepResult r = newton_solve(s, *mesh, uOld, 0.1);
  const double a = bisection_oracle(0.25, 0.5, 0.5, 1.0, 0.1);
  CHECK(a == doctest::Approx(3.25 / 9.0).epsilon(1e-14));
  CHECK(std::abs(r.state.values(0, 0) - a) <= 1e-10);
  CHECK(std::abs(r.state.values(0, 1) - (1.0 - a)) <= 1e-10);
  CHECK(std::abs(r.state.values(1, 0) - (1.0 - a)) <= 1e-10);
}

TEST_CASE("nonlinear step conserves mass and volume") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(16));
  const SpeciesSystem s = build_system(coefficients_1d());
  RunConfig cfg = make_1d_config("nonsmooth1d", 16, 1e-3, 1e-3);
  const StateField u0 = preset_initial(cfg.initial, mesh, 3);
  const StepResult r = newton_solve(s, *mesh, u0, 1e-3);
  const Vector dm = r.state.masses() - u0.masses();
  CHECK(dm.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.preProjectionSumDeviation < 1e-10);
  CHECK(r.state.values.minCoeff() > 0.0);
  CHECK(residual(s, *mesh, r.state, u0, 1e-3).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("run and step_count") {
  CHECK(step_count(1e-5, 2e-3) == 200);
  CHECK(step_count(1e-4, 0.25) == 2500);
  CHECK(step_count(0.3, 1.0) == 4);

  auto mesh = std::make_shared<const Mesh>(uniform_rectangle(2, 3));
  const SpeciesSystem s = build_system(coefficients_2d());
  const StateField u = constant_state(mesh, vec({0.1, 0.1, 0.8}));
  std::size_t calls = 0;
  const StateField out = run(s, *mesh, u, 0.1, 0.5, SolverConfig{}, [&](std::size_t p, double t, const StepResult&) {
    ++calls;
    CHECK(t == doctest::Approx(0.1 * p));
  });
  CHECK(calls == 5);
  CHECK((out.values - u.values).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.newtonTol = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("newton reports non-convergence") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(8));
  const SpeciesSystem s = build_system(coefficients_1d());
  RunConfig cfg = make_1d_config("nonsmooth1d", 8, 1e-1, 1e-1);
  const StateField u0 = preset_initial(cfg.initial, mesh, 3);
  SolverConfig sc;
  sc.maxNewtonIters = 1;
  CHECK_THROWS_AS(newton_solve(s, *mesh, u0, 1e-1, sc), NonConvergence);
}

}
