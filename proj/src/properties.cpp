#include "msfv/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Dense>

#include "msfv/csv.hpp"
#include "msfv/mesh.hpp"
#include "msfv/scheme.hpp"

namespace msfv {
namespace {

constexpr double kPsdTol = -1e-10;
constexpr double kIdentityTol = 1e-14;

std::mt19937_64 stream(const PropertyOptions& opt, std::uint64_t salt) {
  std::seed_seq seq{opt.seed, salt};
  return std::mt19937_64(seq);
}

int random_n(std::mt19937_64& rng) { return std::uniform_int_distribution<int>(2, 5)(rng); }

Vector random_positive(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> dist(1e-3, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

// Positive v with <1, v> <= 1, the domain on which the upper bounds hold.
Vector random_subsimplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> scale(0.1, 1.0);
  return scale(rng) * random_composition(rng, n, 1e-3 / n);
}

// Records a "deviation <= tol" measurement.
void record_deviation(PropertyResult& r, double dev) {
  ++r.instances;
  r.worst = std::max(r.worst, dev);
  if (!(dev <= r.tolerance)) ++r.failures;
}

// Records a "smallest eigenvalue >= tol" measurement.
void record_eigenvalue(PropertyResult& r, double lambda) {
  if (r.instances == 0) r.worst = lambda;
  ++r.instances;
  r.worst = std::min(r.worst, lambda);
  if (!(lambda >= r.tolerance)) ++r.failures;
}

double max_abs(const Matrix& X) { return X.cwiseAbs().maxCoeff(); }

double inf_norm(const Matrix& X) { return X.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

SpeciesSystem random_system(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> dist(0.05, 2.0);
  Matrix c = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(i, j) = c(j, i) = dist(rng);
  return build_system(c);
}

Vector random_composition(std::mt19937_64& rng, int n, double lo) {
  std::exponential_distribution<double> dist(1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng) + 1e-12;
  v /= v.sum();
  // Mixing with the barycenter keeps the point in the simplex.
  const double s = std::min(1.0, lo * n);
  v = (1.0 - s) * v + Vector::Constant(n, s / n);
  return v / v.sum();
}

PropertyResult check_abar_psd(const PropertyOptions& opt) {
  PropertyResult r{"abar_psd", 0, 0, 0.0, kPsdTol};
  auto rng = stream(opt, 1);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_positive(rng, sys.n());
    const Matrix X = v.cwiseInverse().asDiagonal() * opt.abar(sys, v);
    const double asym = max_abs(X - X.transpose()) / std::max(1.0, max_abs(X));
    double lambda = min_sym_eigenvalue(X);
    if (asym > 1e-12) lambda = std::min(lambda, -asym);
    record_eigenvalue(r, lambda);
  }
  return r;
}

PropertyResult check_abar_upper_bound(const PropertyOptions& opt) {
  PropertyResult r{"abar_upper_bound", 0, 0, 0.0, kPsdTol};
  auto rng = stream(opt, 2);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_subsimplex(rng, sys.n());
    const Vector inv = v.cwiseInverse();
    const Matrix X = Matrix(2.0 * sys.cBarMax() * inv.asDiagonal()) - inv.asDiagonal() * opt.abar(sys, v);
    record_eigenvalue(r, min_sym_eigenvalue(X));
  }
  return r;
}

PropertyResult check_identity(const PropertyOptions& opt) {
  PropertyResult r{"identity", 0, 0, 0.0, kIdentityTol};
  auto rng = stream(opt, 3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    Vector v(sys.n());
    for (int i = 0; i < sys.n(); ++i) v(i) = dist(rng);
    const int n = sys.n();
    const Matrix rhs = Matrix(sys.cStar() * v.sum() * Matrix::Identity(n, n)) - sys.cStar() * mat_C(v) + opt.abar(sys, v);
    record_deviation(r, max_abs(mat_A(sys, v) - rhs));
  }
  return r;
}

PropertyResult check_newid(const PropertyOptions& opt) {
  PropertyResult r{"newid", 0, 0, 0.0, kIdentityTol};
  auto rng = stream(opt, 4);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const int n = sys.n();
    const Vector u = random_composition(rng, n);
    const Matrix rhs = Matrix(sys.cStar() * Matrix::Identity(n, n)) - sys.cStar() * mat_C(u) + opt.abar(sys, u);
    record_deviation(r, max_abs(mat_A(sys, u) - rhs));
  }
  return r;
}

PropertyResult check_abar_kernel_range(const PropertyOptions& opt) {
  PropertyResult r{"abar_kernel_range", 0, 0, 0.0, kIdentityTol};
  auto rng = stream(opt, 5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_positive(rng, sys.n());
    Vector w(sys.n());
    for (int i = 0; i < sys.n(); ++i) w(i) = dist(rng);
    const Matrix Ab = opt.abar(sys, v);
    const double kernel = (Ab * v).cwiseAbs().maxCoeff();
    const double range = std::abs((Ab * w).sum());
    record_deviation(r, std::max(kernel, range));
  }
  return r;
}

PropertyResult check_a_column_sums(const PropertyOptions& opt) {
  PropertyResult r{"a_column_sums", 0, 0, 0.0, kIdentityTol};
  auto rng = stream(opt, 6);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    Vector v(sys.n());
    for (int i = 0; i < sys.n(); ++i) v(i) = dist(rng);
    record_deviation(r, mat_A(sys, v).colwise().sum().cwiseAbs().maxCoeff());
  }
  return r;
}

PropertyResult check_a_rank(const PropertyOptions& opt) {
  // For v > 0, A(v) v = 0 and the remaining n-1 singular values are nonzero.
  PropertyResult r{"a_kernel_rank", 0, 0, 0.0, kIdentityTol};
  auto rng = stream(opt, 7);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_positive(rng, sys.n());
    const Matrix A = mat_A(sys, v);
    const Eigen::JacobiSVD<Matrix> svd(A);
    const Vector s = svd.singularValues();
    const bool rankOk = s(s.size() - 2) > 1e-8 * s(0) && s(s.size() - 1) <= 1e-12 * s(0);
    const double dev = (A * v).cwiseAbs().maxCoeff();
    record_deviation(r, rankOk ? dev : std::numeric_limits<double>::infinity());
  }
  return r;
}

PropertyResult check_b_lower_bound(const PropertyOptions& opt) {
  // Reported value: lambda_min(B) - c*, which must stay >= -1e-10.
  PropertyResult r{"b_lower_bound", 0, 0, 0.0, kPsdTol};
  auto rng = stream(opt, 8);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_positive(rng, sys.n());
    const Vector inv = v.cwiseInverse();
    const Matrix B = Matrix(sys.cStar() * inv.asDiagonal()) + inv.asDiagonal() * opt.abar(sys, v);
    const double asym = max_abs(B - B.transpose());
    double lambda = min_sym_eigenvalue(B) - sys.cStar();
    if (asym > 1e-12) lambda = std::min(lambda, -asym);
    record_eigenvalue(r, lambda);
  }
  return r;
}

PropertyResult check_b_inverse_bound(const PropertyOptions& opt) {
  PropertyResult r{"b_inverse_bound", 0, 0, 0.0, kPsdTol};
  auto rng = stream(opt, 9);
  for (int k = 0; k < opt.matrixInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const Vector v = random_subsimplex(rng, sys.n());
    const Vector inv = v.cwiseInverse();
    Matrix B = Matrix(sys.cStar() * inv.asDiagonal()) + inv.asDiagonal() * opt.abar(sys, v);
    B = 0.5 * (B + B.transpose());
    const Matrix Binv = B.ldlt().solve(Matrix::Identity(sys.n(), sys.n()));
    const Matrix X = Binv - Matrix(v.asDiagonal()) / (sys.cStar() + 2.0 * sys.cBarMax());
    record_eigenvalue(r, min_sym_eigenvalue(X));
  }
  return r;
}

PropertyResult check_jacobian_fd(const PropertyOptions& opt) {
  PropertyResult r{"jacobian_fd", 0, 0, 0.0, 1e-5};
  auto rng = stream(opt, 10);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> n1(2, 8);
  std::uniform_int_distribution<std::size_t> n2(1, 4);
  std::uniform_real_distribution<double> dtDist(1e-3, 1e-1);
  const double h = 1e-6;
  for (int k = 0; k < opt.jacobianInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const int n = sys.n();
    std::shared_ptr<const Mesh> mesh;
    if (coin(rng) == 0) {
      mesh = std::make_shared<const Mesh>(uniform_interval(n1(rng)));
    } else {
      std::size_t nx = n2(rng), ny = n2(rng);
      if (nx * ny < 2) nx = 2;
      mesh = std::make_shared<const Mesh>(uniform_rectangle(nx, ny));
    }
    const auto cells = static_cast<Eigen::Index>(mesh->num_cells());
    StateField uOld{mesh, Matrix(n, cells)};
    StateField uNew{mesh, Matrix(n, cells)};
    for (Eigen::Index K = 0; K < cells; ++K) {
      uOld.values.col(K) = random_composition(rng, n, 0.05);
      uNew.values.col(K) = random_composition(rng, n, 0.05);
    }
    const double dt = dtDist(rng);

    const Matrix Ja = Matrix(jacobian(sys, *mesh, uNew, uOld, dt));
    Matrix Jfd(Ja.rows(), Ja.cols());
    StateField probe = uNew;
    for (Eigen::Index K = 0; K < cells; ++K) {
      for (int i = 0; i < n; ++i) {
        const double base = uNew.values(i, K);
        probe.values(i, K) = base + h;
        const Matrix Rp = residual(sys, *mesh, probe, uOld, dt);
        probe.values(i, K) = base - h;
        const Matrix Rm = residual(sys, *mesh, probe, uOld, dt);
        probe.values(i, K) = base;
        const Matrix diff = (Rp - Rm) / (2.0 * h);
        Jfd.col(K * n + i) = Eigen::Map<const Vector>(diff.data(), diff.size());
      }
    }
    record_deviation(r, inf_norm(Ja - Jfd) / inf_norm(Jfd));
  }
  return r;
}

PropertyResult check_flux_equivalence(const PropertyOptions& opt) {
  PropertyResult r{"flux_equivalence", 0, 0, 0.0, 1e-10};
  auto rng = stream(opt, 11);
  std::uniform_real_distribution<double> dDist(0.01, 1.0);
  for (int k = 0; k < opt.fluxInstances; ++k) {
    const SpeciesSystem sys = random_system(rng, random_n(rng));
    const int n = sys.n();
    const Vector uK = random_composition(rng, n, 1e-4);
    const Vector uL = random_composition(rng, n, 1e-4);
    const double d = dDist(rng);
    const Vector us = edge_fractions(uK, uL);
    const Vector J = edge_flux(sys, us, uL - uK, d);
    const Vector Dlog = uL.array().log().matrix() - uK.array().log().matrix();
    Matrix B = mat_B(sys, us);
    const Vector Jref = -(B.partialPivLu().solve(Dlog)) / d;
    record_deviation(r, (J - Jref).cwiseAbs().maxCoeff() / std::max(1.0, Jref.cwiseAbs().maxCoeff()));
  }
  return r;
}

std::vector<PropertyResult> run_property_suite(const PropertyOptions& opt) {
  return {check_abar_psd(opt),         check_abar_upper_bound(opt), check_identity(opt),
          check_newid(opt),            check_abar_kernel_range(opt), check_a_column_sums(opt),
          check_a_rank(opt),           check_b_lower_bound(opt),     check_b_inverse_bound(opt),
          check_jacobian_fd(opt),      check_flux_equivalence(opt)};
}

void write_property_report(const std::filesystem::path& path, const std::vector<PropertyResult>& results) {
  auto os = csv::open_output(path);
  os << "property,instances,failures,worst,tolerance,pass\n";
  for (const auto& r : results) {
    os << r.name << ',' << r.instances << ',' << r.failures << ',' << csv::format(r.worst) << ','
       << csv::format(r.tolerance) << ',' << (r.passed() ? "true" : "false") << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace msfv
