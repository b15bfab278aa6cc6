#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "msfv/config.hpp"
#include "msfv/diagnostics.hpp"

using namespace msfv;

namespace {

Matrix two_species(double c12) {
  Matrix c(2, 2);
  c << 0, c12, c12, 0;
  return c;
}

// Two unit cells joined by one face with m_sigma = d_sigma = tau_sigma = 1.
std::shared_ptr<const Mesh> unit_pair() {
  Mesh m;
  m.dimension = 1;
  for (std::size_t K = 0; K < 2; ++K) {
    Cell c;
    c.index = K;
    c.center = Eigen::VectorXd::Constant(1, 0.5 + static_cast<double>(K));
    c.measure = 1.0;
    m.cells.push_back(c);
  }
  InteriorEdge e;
  e.cellK = 0;
  e.cellL = 1;
  e.measure = 1.0;
  e.distance = 1.0;
  e.distK = e.distL = 0.5;
  e.transmissibility = 1.0;
  e.normalKtoL = Eigen::VectorXd::Constant(1, 1.0);
  e.diamondMeasure = 1.0;
  m.interiorEdges.push_back(e);
  m.totalMeasure = 2.0;
  return std::make_shared<const Mesh>(m);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("entropy values") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(4));
  StateField u{mesh, Matrix::Constant(3, 4, 1.0 / 3.0)};
  CHECK(entropy(*mesh, u) == doctest::Approx(-std::log(3.0)).epsilon(1e-14));

  StateField pure{mesh, Matrix::Zero(3, 4)};
  pure.values.row(1).setOnes();
  CHECK(entropy(*mesh, pure) == 0.0);

  auto one = std::make_shared<const Mesh>(uniform_interval(1));
  StateField s{one, Matrix(2, 1)};
  s.values << 0.25, 0.75;
  CHECK(entropy(*one, s) == doctest::Approx(-0.562335).epsilon(1e-6));
  CHECK(entropy(*one, s) == doctest::Approx(0.25 * std::log(0.25) + 0.75 * std::log(0.75)).epsilon(1e-15));

  s.values(0, 0) = -0.1;
  CHECK_THROWS_AS(entropy(*one, s), std::domain_error);
}

TEST_CASE("dissipation values") {
  const SpeciesSystem sys = build_system(two_species(1.0));
  REQUIRE(sys.alpha() == 4.0);
  auto mesh = unit_pair();
  StateField u{mesh, Matrix(2, 2)};
  u.values << 0.25, 0.75, 0.75, 0.25;
  FluxField J{mesh, Matrix::Zero(2, 1)};
  const double jump = std::sqrt(0.75) - std::sqrt(0.25);
  CHECK(dissipation(sys, *mesh, u, J) == doctest::Approx(2.0 * 2.0 * jump * jump).epsilon(1e-14));
  CHECK(dissipation(sys, *mesh, u, J) == doctest::Approx(0.535898).epsilon(1e-6));

  StateField c{mesh, Matrix::Constant(2, 2, 0.5)};
  CHECK(dissipation(sys, *mesh, c, J) == 0.0);

  J.values << 0.3, -0.3;
  CHECK(dissipation(sys, *mesh, c, J) == doctest::Approx(0.5 * 1.0 * 0.18).epsilon(1e-14));
}

TEST_CASE("relative entropy") {
  auto mesh = std::make_shared<const Mesh>(uniform_rectangle(3, 3));
  const Vector m = (Vector(3) << 0.2, 0.3, 0.5).finished();
  StateField u{mesh, Matrix(3, 9)};
  u.values.colwise() = m;
  CHECK(relative_entropy(*mesh, u, m) == 0.0);

  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(1.0);
  for (int k = 0; k < 50; ++k) {
    for (int K = 0; K < 9; ++K) {
      for (int i = 0; i < 3; ++i) u.values(i, K) = e(rng);
      u.values.col(K) /= u.values.col(K).sum();
    }
    const Vector mk = equilibrium_state(*mesh, u.masses());
    const double H = relative_entropy(*mesh, u, mk);
    CHECK(H >= -1e-12);
    StateField eq{mesh, Matrix(3, 9)};
    eq.values.colwise() = mk;
    CHECK(std::abs(H - (entropy(*mesh, u) - entropy(*mesh, eq))) <= 1e-12);
  }

  const Vector bad = (Vector(3) << 0.5, 0.5, 0.0).finished();
  CHECK_THROWS_AS(relative_entropy(*mesh, u, bad), std::domain_error);
}

TEST_CASE("gradient reconstruction") {
  const Mesh m1 = uniform_interval(6);
  Vector x(6);
  for (int K = 0; K < 6; ++K) x(K) = m1.cells[K].center(0);
  const DiamondField g = reconstruct_gradient(m1, x);
  for (std::size_t s = 0; s < m1.num_interior_edges(); ++s) CHECK(g.values(0, s) == doctest::Approx(1.0).epsilon(1e-13));
  for (std::size_t b = 0; b < m1.boundaryEdges.size(); ++b) CHECK(g.values(0, m1.num_interior_edges() + b) == 0.0);
  CHECK(squared_norm(m1, reconstruct_gradient(m1, Vector::Constant(6, 2.5))) == 0.0);

  const std::size_t nx = 4, ny = 3;
  const Mesh m2 = uniform_rectangle(nx, ny);
  Vector v(static_cast<Eigen::Index>(m2.num_cells()));
  for (std::size_t K = 0; K < m2.num_cells(); ++K) v(K) = m2.cells[K].center(0);
  // d * e_x on the (nx-1) ny vertical faces, each of measure 1/(2 nx ny).
  const double expected = 4.0 * static_cast<double>((nx - 1) * ny) / (2.0 * nx * ny);
  CHECK(squared_norm(m2, reconstruct_gradient(m2, v)) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("flux reconstruction") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(4));
  FluxField J{mesh, Matrix::Zero(2, 3)};
  CHECK(reconstruct_flux_field(*mesh, J).squaredNorm == 0.0);
  J.values(0, 1) = 1.0;
  CHECK(reconstruct_flux_field(*mesh, J).squaredNorm == doctest::Approx(0.25).epsilon(1e-15));

  // c*/2 times the norm is d times the flux part of the dissipation.
  const SpeciesSystem sys = build_system(coefficients_2d());
  for (int dim = 1; dim <= 2; ++dim) {
    auto m = dim == 1 ? std::make_shared<const Mesh>(uniform_interval(5))
                      : std::make_shared<const Mesh>(uniform_rectangle(3, 2));
    const auto ne = static_cast<Eigen::Index>(m->num_interior_edges());
    StateField c{m, Matrix::Constant(3, static_cast<Eigen::Index>(m->num_cells()), 1.0 / 3.0)};
    FluxField F{m, Matrix::Random(3, ne)};
    const double fluxPart = dissipation(sys, *m, c, F);
    CHECK(0.5 * sys.cStar() * reconstruct_flux_field(*m, F).squaredNorm == doctest::Approx(dim * fluxPart).epsilon(1e-13));
  }
}

TEST_CASE("L1 space-time error") {
  auto c1 = std::make_shared<const Mesh>(uniform_interval(1));
  auto r2 = std::make_shared<const Mesh>(uniform_interval(2));
  SampledRun a{c1, {1.0}, {Matrix::Constant(1, 1, 1.0)}};
  SampledRun b{r2, {1.0}, {Matrix::Constant(1, 2, 0.5)}};
  CHECK(l1_space_time_error(a, b) == doctest::Approx(0.5).epsilon(1e-15));

  auto c2 = std::make_shared<const Mesh>(uniform_interval(2));
  auto r4 = std::make_shared<const Mesh>(uniform_interval(4));
  SampledRun c{c2, {1.0}, {(Matrix(1, 2) << 0.0, 1.0).finished()}};
  SampledRun d{r4, {1.0}, {(Matrix(1, 4) << 0.0, 0.5, 0.5, 1.0).finished()}};
  CHECK(l1_space_time_error(c, d) == doctest::Approx(0.25).epsilon(1e-15));

  CHECK(l1_space_time_error(d, d) == 0.0);

  // Time weights are the slab lengths t_p - t_{p-1}.
  SampledRun e{c1, {0.25, 1.0}, {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)}};
  SampledRun f{r2, {0.25, 1.0}, {Matrix::Constant(1, 2, 0.0), Matrix::Constant(1, 2, 1.0)}};
  CHECK(l1_space_time_error(e, f) == doctest::Approx(0.25).epsilon(1e-15));

  auto r3 = std::make_shared<const Mesh>(uniform_interval(3));
  SampledRun g{r3, {1.0}, {Matrix::Constant(1, 3, 0.0)}};
  CHECK_THROWS_AS(l1_space_time_error(c, g), std::invalid_argument);
}

TEST_CASE("restriction on 2D grids") {
  const Mesh fine = uniform_rectangle(4, 2);
  const Mesh coarse = uniform_rectangle(2, 1);
  Matrix v(1, 8);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  const Matrix r = restrict_to_coarse(fine, v, coarse);
  CHECK(r(0, 0) == doctest::Approx((1 + 2 + 5 + 6) / 4.0));
  CHECK(r(0, 1) == doctest::Approx((3 + 4 + 7 + 8) / 4.0));
  CHECK_THROWS_AS(restrict_to_coarse(uniform_rectangle(3, 2), Matrix::Zero(1, 6), coarse), std::invalid_argument);
}

TEST_CASE("diagnostics record") {
  auto mesh = std::make_shared<const Mesh>(uniform_interval(3));
  const SpeciesSystem sys = build_system(coefficients_1d());
  StateField u{mesh, Matrix::Constant(3, 3, 1.0 / 3.0)};
  const DiagnosticsRecord r = make_record(sys, 0.0, u, nullptr, u.masses());
  CHECK(r.dissipation == 0.0);
  CHECK(r.relativeEntropy == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.minFraction == doctest::Approx(1.0 / 3.0));
  CHECK(r.newtonIterations == 0);
}

}
