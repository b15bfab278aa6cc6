#include "msfv/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SparseLU>

namespace msfv {
namespace {

// log(a / b) for positive a, b without cancellation when a is close to b.
double log_ratio(double a, double b) {
  const double r = a / b;
  if (r >= 0.5 && r <= 2.0) return std::log1p((a - b) / b);
  return std::log(a) - std::log(b);
}

// d/da of (a - b) / log(a / b) expressed through s = log(a / b):
// (s - 1 + e^{-s}) / s^2, with its Taylor series near s = 0.
double log_mean_slope(double s) {
  if (std::abs(s) < 0.1) {
    double term = 0.5;  // 1/2!
    double sum = term;
    for (int k = 1; k <= 12; ++k) {
      term *= -s / static_cast<double>(k + 2);
      sum += term;
    }
    return sum;
  }
  return (s + std::expm1(-s)) / (s * s);
}

bool same_mesh(const Mesh& mesh, const StateField& u) { return u.mesh && u.mesh.get() == &mesh; }

void check_state(const Mesh& mesh, const StateField& uNew, const StateField& uOld, double dt) {
  if (!same_mesh(mesh, uNew) || !same_mesh(mesh, uOld))
    throw std::invalid_argument("state fields must refer to the mesh being assembled on");
  if (uNew.values.cols() != static_cast<Eigen::Index>(mesh.num_cells()) || uNew.values.rows() != uOld.values.rows() ||
      uNew.values.cols() != uOld.values.cols())
    throw std::invalid_argument("state fields have inconsistent shapes");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

// Coupling matrix P with d(Abar(v) J)/dv = P, for fixed J.
Matrix abar_flux_derivative(const Matrix& cBar, const Vector& J) {
  const Eigen::Index n = J.size();
  Matrix P = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      P(i, k) = cBar(i, k) * J(i);
      diag -= cBar(i, k) * J(k);
    }
    P(i, i) = diag;
  }
  return P;
}

// Assembles the residual and, when `triplets` is non-null, the Jacobian entries.
void assemble(const SpeciesSystem& sys, const Mesh& mesh, const Matrix& U, const Matrix& Uold, double dt,
              double threshold, Matrix& R, std::vector<Eigen::Triplet<double>>* triplets) {
  const Eigen::Index n = U.rows();
  const std::size_t nc = mesh.num_cells();
  R.resize(n, static_cast<Eigen::Index>(nc));
  for (std::size_t K = 0; K < nc; ++K) {
    const double w = mesh.cells[K].measure / dt;
    R.col(K) = w * (U.col(K) - Uold.col(K));
    if (triplets) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const int row = static_cast<int>(K * n + i);
        triplets->emplace_back(row, row, w);
      }
    }
  }

  const Matrix identity = Matrix::Identity(n, n);
  Vector uSigma(n), da(n), db(n);
  for (const auto& e : mesh.interiorEdges) {
    const auto uK = U.col(e.cellK);
    const auto uL = U.col(e.cellL);
    for (Eigen::Index i = 0; i < n; ++i) {
      uSigma(i) = log_mean(uK(i), uL(i), threshold);
      if (triplets) {
        const auto p = log_mean_partials(uK(i), uL(i), threshold);
        da(i) = p.da;
        db(i) = p.db;
      }
    }
    Matrix G = mat_Abar(sys, uSigma);
    G.diagonal().array() += sys.cStar();
    const Eigen::PartialPivLU<Matrix> lu(G);
    const Vector J = lu.solve(-(uL - uK) / e.distance);
    R.col(e.cellK) += e.measure * J;
    R.col(e.cellL) -= e.measure * J;

    if (!triplets) continue;
    const Matrix P = abar_flux_derivative(sys.cBar(), J);
    const Matrix dJdK = lu.solve(identity / e.distance - P * da.asDiagonal());
    const Matrix dJdL = lu.solve(-identity / e.distance - P * db.asDiagonal());
    const int baseK = static_cast<int>(e.cellK * n);
    const int baseL = static_cast<int>(e.cellL * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double vK = e.measure * dJdK(i, j);
        const double vL = e.measure * dJdL(i, j);
        triplets->emplace_back(baseK + i, baseK + j, vK);
        triplets->emplace_back(baseK + i, baseL + j, vL);
        triplets->emplace_back(baseL + i, baseK + j, -vK);
        triplets->emplace_back(baseL + i, baseL + j, -vL);
      }
    }
  }
}

Matrix fluxes_of(const SpeciesSystem& sys, const Mesh& mesh, const Matrix& U, double threshold) {
  const Eigen::Index n = U.rows();
  Matrix F(n, static_cast<Eigen::Index>(mesh.num_interior_edges()));
  for (std::size_t s = 0; s < mesh.num_interior_edges(); ++s) {
    const auto& e = mesh.interiorEdges[s];
    const Vector uK = U.col(e.cellK);
    const Vector uL = U.col(e.cellL);
    F.col(s) = edge_flux(sys, edge_fractions(uK, uL, threshold), uL - uK, e.distance);
  }
  return F;
}

Eigen::Map<const Vector> flat(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

}  // namespace

Vector StateField::masses() const {
  Vector m = Vector::Zero(values.rows());
  if (!mesh) return m;
  for (std::size_t K = 0; K < mesh->num_cells(); ++K) m += mesh->cells[K].measure * values.col(K);
  return m;
}

void SolverConfig::validate() const {
  if (!(newtonTol > 0.0)) throw std::invalid_argument("solver.newtonTol must be positive");
  if (maxNewtonIters <= 0) throw std::invalid_argument("solver.maxNewtonIters must be positive");
  if (maxDampingHalvings < 0) throw std::invalid_argument("solver.maxDampingHalvings must be nonnegative");
  if (!(projectionFloor > 0.0)) throw std::invalid_argument("solver.projectionFloor must be positive");
  if (!(logMeanEqualityThreshold > 0.0))
    throw std::invalid_argument("solver.logMeanEqualityThreshold must be positive");
}

double log_mean(double a, double b, double equalityThreshold) {
  if (std::min(a, b) <= 0.0) return 0.0;
  const double diff = a - b;
  if (std::abs(diff) <= equalityThreshold * std::max(a, b)) return 0.5 * (a + b);
  return diff / log_ratio(a, b);
}

LogMeanPartials log_mean_partials(double a, double b, double equalityThreshold) {
  if (std::min(a, b) <= 0.0) return {0.0, 0.0};
  if (std::abs(a - b) <= equalityThreshold * std::max(a, b)) return {0.5, 0.5};
  const double s = log_ratio(a, b);
  return {log_mean_slope(s), log_mean_slope(-s)};
}

Vector edge_fractions(const Vector& uK, const Vector& uL, double equalityThreshold) {
  if (uK.size() != uL.size()) throw std::invalid_argument("edge_fractions: length mismatch");
  Vector out(uK.size());
  for (Eigen::Index i = 0; i < uK.size(); ++i) out(i) = log_mean(uK(i), uL(i), equalityThreshold);
  return out;
}

Vector edge_flux(const SpeciesSystem& sys, const Vector& uSigma, const Vector& Du, double dSigma) {
  if (uSigma.size() != sys.n() || Du.size() != sys.n())
    throw std::invalid_argument("edge_flux: vector length differs from species count");
  if (!(dSigma > 0.0)) throw std::invalid_argument("edge_flux: distance must be positive");
  Matrix G = mat_Abar(sys, uSigma);
  G.diagonal().array() += sys.cStar();
  const Vector J = G.partialPivLu().solve(-Du / dSigma);
  if (!J.allFinite()) throw std::runtime_error("edge_flux: singular edge system");
  return J;
}

FluxField compute_fluxes(const SpeciesSystem& sys, const StateField& u, double equalityThreshold) {
  if (!u.mesh) throw std::invalid_argument("compute_fluxes: state has no mesh");
  return FluxField{u.mesh, fluxes_of(sys, *u.mesh, u.values, equalityThreshold)};
}

Matrix residual(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uNew, const StateField& uOld,
                double dt, double equalityThreshold) {
  check_state(mesh, uNew, uOld, dt);
  Matrix R;
  assemble(sys, mesh, uNew.values, uOld.values, dt, equalityThreshold, R, nullptr);
  return R;
}

Eigen::SparseMatrix<double> jacobian(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uNew,
                                     const StateField& uOld, double dt, double equalityThreshold) {
  check_state(mesh, uNew, uOld, dt);
  const Eigen::Index size = uNew.values.size();
  std::vector<Eigen::Triplet<double>> triplets;
  Matrix R;
  assemble(sys, mesh, uNew.values, uOld.values, dt, equalityThreshold, R, &triplets);
  Eigen::SparseMatrix<double> Jac(size, size);
  Jac.setFromTriplets(triplets.begin(), triplets.end());
  return Jac;
}

Vector project_simplex(const Vector& u, double floor) {
  const Vector v = u.cwiseMax(floor);
  return v / v.sum();
}

struct ImplicitStepper::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> triplets;
};

ImplicitStepper::ImplicitStepper(SpeciesSystem sys, std::shared_ptr<const Mesh> mesh, SolverConfig cfg)
    : sys_(std::move(sys)), mesh_(std::move(mesh)), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  if (!mesh_) throw std::invalid_argument("ImplicitStepper: null mesh");
  cfg_.validate();
}

ImplicitStepper::~ImplicitStepper() = default;

StepResult ImplicitStepper::step(const StateField& uOld, double dt) {
  if (!same_mesh(*mesh_, uOld)) throw std::invalid_argument("ImplicitStepper: state on a different mesh");
  if (uOld.n() != sys_.n()) throw std::invalid_argument("ImplicitStepper: species count mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("ImplicitStepper: time step must be positive");

  const Mesh& mesh = *mesh_;
  const double thr = cfg_.logMeanEqualityThreshold;
  const Eigen::Index size = uOld.values.size();

  Matrix U = uOld.values;
  Matrix R, Rtrial;
  Eigen::SparseMatrix<double> Jac(size, size);
  bool converged = false;
  int iter = 0;

  while (iter < cfg_.maxNewtonIters) {
    ++iter;
    impl_->triplets.clear();
    assemble(sys_, mesh, U, uOld.values, dt, thr, R, &impl_->triplets);
    Jac.setFromTriplets(impl_->triplets.begin(), impl_->triplets.end());
    if (!impl_->analyzed) {
      impl_->lu.analyzePattern(Jac);
      impl_->analyzed = true;
    }
    impl_->lu.factorize(Jac);
    if (impl_->lu.info() != Eigen::Success)
      throw NonConvergence("Newton: Jacobian factorization failed", 0, iter);

    const Vector rhs = -flat(R);
    Vector delta = impl_->lu.solve(rhs);
    // Iterative refinement until the linear residual meets 1e-13 relative.
    const double rhsNorm = rhs.lpNorm<Eigen::Infinity>();
    for (int refine = 0; refine < 3; ++refine) {
      const Vector lin = rhs - Jac * delta;
      if (lin.lpNorm<Eigen::Infinity>() <= 1e-13 * rhsNorm) break;
      delta += impl_->lu.solve(lin);
    }
    if (!delta.allFinite()) throw NonConvergence("Newton: non-finite update", 0, iter);

    const Eigen::Map<const Matrix> step(delta.data(), U.rows(), U.cols());
    const double rNorm = R.lpNorm<Eigen::Infinity>();
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg_.maxDampingHalvings; ++h) {
      assemble(sys_, mesh, U + lambda * step, uOld.values, dt, thr, Rtrial, nullptr);
      if (Rtrial.allFinite() && Rtrial.lpNorm<Eigen::Infinity>() < rNorm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    // No damped step reduced the residual (typically because it already sits
    // at round-off level): take the full Newton step.
    if (!accepted) lambda = 1.0;
    U += lambda * step;

    if (delta.lpNorm<Eigen::Infinity>() < cfg_.newtonTol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergence("Newton: no convergence within " + std::to_string(cfg_.maxNewtonIters) + " iterations",
                         0, iter);

  StepResult out;
  out.iterations = iter;
  out.preProjectionSumDeviation = (U.colwise().sum().array() - 1.0).abs().maxCoeff();
  out.preProjectionMin = U.minCoeff();
  for (Eigen::Index K = 0; K < U.cols(); ++K) U.col(K) = project_simplex(U.col(K), cfg_.projectionFloor);
  out.state = StateField{mesh_, std::move(U)};
  out.fluxes = FluxField{mesh_, fluxes_of(sys_, mesh, out.state.values, thr)};
  return out;
}

StepResult newton_solve(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uOld, double dt,
                        const SolverConfig& cfg) {
  if (!same_mesh(mesh, uOld)) throw std::invalid_argument("newton_solve: state on a different mesh");
  ImplicitStepper stepper(sys, uOld.mesh, cfg);
  return stepper.step(uOld, dt);
}

std::size_t step_count(double dt, double T) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(T >= dt)) throw std::invalid_argument("T must be at least dt");
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

StateField run(const SpeciesSystem& sys, const Mesh& mesh, const StateField& u0, double dt, double T,
               const SolverConfig& cfg, const StepSink& sink) {
  if (!same_mesh(mesh, u0)) throw std::invalid_argument("run: initial state on a different mesh");
  const std::size_t steps = step_count(dt, T);
  ImplicitStepper stepper(sys, u0.mesh, cfg);
  StateField current = u0;
  for (std::size_t p = 1; p <= steps; ++p) {
    StepResult result;
    try {
      result = stepper.step(current, dt);
    } catch (const NonConvergence& err) {
      throw NonConvergence(std::string(err.what()) + " at step " + std::to_string(p), p, err.iterations());
    }
    if (sink) sink(p, static_cast<double>(p) * dt, result);
    current = std::move(result.state);
  }
  return current;
}

}  // namespace msfv
