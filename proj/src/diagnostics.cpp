#include "msfv/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace msfv {
namespace {

void require_cells(const Mesh& mesh, const Matrix& values, const char* who) {
  if (values.cols() != static_cast<Eigen::Index>(mesh.num_cells()))
    throw std::invalid_argument(std::string(who) + ": field does not match the mesh");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double entropy(const Mesh& mesh, const StateField& u) {
  require_cells(mesh, u.values, "entropy");
  if ((u.values.array() < 0.0).any()) throw std::domain_error("entropy: negative volume fraction");
  double E = 0.0;
  for (std::size_t K = 0; K < mesh.num_cells(); ++K) {
    double cell = 0.0;
    for (Eigen::Index i = 0; i < u.values.rows(); ++i) cell += xlogx(u.values(i, K));
    E += mesh.cells[K].measure * cell;
  }
  return E;
}

double dissipation(const SpeciesSystem& sys, const Mesh& mesh, const StateField& u, const FluxField& J) {
  require_cells(mesh, u.values, "dissipation");
  if (J.values.cols() != static_cast<Eigen::Index>(mesh.num_interior_edges()) || J.values.rows() != u.values.rows())
    throw std::invalid_argument("dissipation: flux field does not match the mesh");
  if (u.mesh && J.mesh && u.mesh != J.mesh)
    throw std::invalid_argument("dissipation: state and fluxes live on different meshes");
  if ((u.values.array() < 0.0).any()) throw std::domain_error("dissipation: negative volume fraction");
  double D = 0.0;
  for (std::size_t s = 0; s < mesh.num_interior_edges(); ++s) {
    const auto& e = mesh.interiorEdges[s];
    const double jumpSq =
        (u.values.col(e.cellL).array().sqrt() - u.values.col(e.cellK).array().sqrt()).matrix().squaredNorm();
    D += 0.5 * sys.cStar() * e.measure * e.distance * J.values.col(s).squaredNorm() +
         0.5 * sys.alpha() * e.transmissibility * jumpSq;
  }
  return D;
}

Vector equilibrium_state(const Mesh& mesh, const Vector& masses) { return masses / mesh.totalMeasure; }

double relative_entropy(const Mesh& mesh, const StateField& u, const Vector& m) {
  require_cells(mesh, u.values, "relative_entropy");
  if (m.size() != u.values.rows()) throw std::invalid_argument("relative_entropy: reference has wrong length");
  if ((m.array() <= 0.0).any()) throw std::domain_error("relative_entropy: every species needs positive mass");
  if ((u.values.array() < 0.0).any()) throw std::domain_error("relative_entropy: negative volume fraction");
  double H = 0.0;
  for (std::size_t K = 0; K < mesh.num_cells(); ++K) {
    double cell = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = u.values(i, K);
      if (v > 0.0) cell += v * std::log(v / m(i));
    }
    H += mesh.cells[K].measure * cell;
  }
  return H;
}

double squared_norm(const Mesh& mesh, const DiamondField& field) {
  const std::size_t nInt = mesh.num_interior_edges();
  double sum = 0.0;
  for (std::size_t s = 0; s < nInt; ++s)
    sum += mesh.interiorEdges[s].diamondMeasure * field.values.col(s).squaredNorm();
  for (std::size_t b = 0; b < mesh.boundaryEdges.size(); ++b) {
    const auto& be = mesh.boundaryEdges[b];
    sum += be.measure * be.distance / mesh.dimension * field.values.col(nInt + b).squaredNorm();
  }
  return sum;
}

DiamondField reconstruct_gradient(const Mesh& mesh, const Vector& cellValues) {
  if (cellValues.size() != static_cast<Eigen::Index>(mesh.num_cells()))
    throw std::invalid_argument("reconstruct_gradient: field does not match the mesh");
  const std::size_t nInt = mesh.num_interior_edges();
  DiamondField out{Matrix::Zero(mesh.dimension, static_cast<Eigen::Index>(nInt + mesh.boundaryEdges.size()))};
  for (std::size_t s = 0; s < nInt; ++s) {
    const auto& e = mesh.interiorEdges[s];
    const double jump = cellValues(e.cellL) - cellValues(e.cellK);
    out.values.col(s) = mesh.dimension * jump / e.distance * e.normalKtoL;
  }
  // Boundary diamonds: the mirror value equals v_K, so the jump vanishes.
  return out;
}

FluxReconstruction reconstruct_flux_field(const Mesh& mesh, const FluxField& J) {
  const std::size_t nInt = mesh.num_interior_edges();
  if (J.values.cols() != static_cast<Eigen::Index>(nInt))
    throw std::invalid_argument("reconstruct_flux_field: flux field does not match the mesh");
  const auto cols = static_cast<Eigen::Index>(nInt + mesh.boundaryEdges.size());
  FluxReconstruction out;
  out.perSpecies.assign(static_cast<std::size_t>(J.values.rows()), DiamondField{Matrix::Zero(mesh.dimension, cols)});
  const double d = mesh.dimension;
  for (std::size_t s = 0; s < nInt; ++s) {
    const auto& e = mesh.interiorEdges[s];
    for (Eigen::Index i = 0; i < J.values.rows(); ++i) {
      out.perSpecies[static_cast<std::size_t>(i)].values.col(s) = d * J.values(i, s) * e.normalKtoL;
    }
    out.squaredNorm += e.diamondMeasure * d * d * J.values.col(s).squaredNorm();
  }
  return out;
}

Matrix restrict_to_coarse(const Mesh& fine, const Matrix& fineValues, const Mesh& coarse) {
  if (!fine.shape || !coarse.shape || fine.dimension != coarse.dimension)
    throw std::invalid_argument("restrict_to_coarse: both meshes must be uniform grids of one dimension");
  const auto [fx, fy] = *fine.shape;
  const auto [cx, cy] = *coarse.shape;
  if (fx % cx != 0 || fy % cy != 0)
    throw std::invalid_argument("restrict_to_coarse: reference grid is not nested in the coarse grid");
  require_cells(fine, fineValues, "restrict_to_coarse");
  const std::size_t rx = fx / cx;
  const std::size_t ry = fy / cy;
  const double weight = 1.0 / static_cast<double>(rx * ry);
  Matrix out = Matrix::Zero(fineValues.rows(), static_cast<Eigen::Index>(cx * cy));
  for (std::size_t j = 0; j < fy; ++j) {
    for (std::size_t i = 0; i < fx; ++i) {
      out.col((j / ry) * cx + i / rx) += weight * fineValues.col(j * fx + i);
    }
  }
  return out;
}

L1ErrorAccumulator::L1ErrorAccumulator(std::shared_ptr<const Mesh> coarse, std::shared_ptr<const Mesh> reference)
    : coarse_(std::move(coarse)), reference_(std::move(reference)) {
  if (!coarse_ || !reference_) throw std::invalid_argument("L1ErrorAccumulator: null mesh");
  // Validates nesting up front.
  restrict_to_coarse(*reference_, Matrix::Zero(1, static_cast<Eigen::Index>(reference_->num_cells())), *coarse_);
}

void L1ErrorAccumulator::add(double dt, const Matrix& coarseValues, const Matrix& referenceValues) {
  require_cells(*coarse_, coarseValues, "L1ErrorAccumulator");
  const Matrix restricted = restrict_to_coarse(*reference_, referenceValues, *coarse_);
  if (restricted.rows() != coarseValues.rows())
    throw std::invalid_argument("L1ErrorAccumulator: species counts differ");
  double space = 0.0;
  for (std::size_t K = 0; K < coarse_->num_cells(); ++K)
    space += coarse_->cells[K].measure * (coarseValues.col(K) - restricted.col(K)).lpNorm<1>();
  total_ += dt * space;
}

double l1_space_time_error(const SampledRun& coarse, const SampledRun& reference) {
  if (coarse.times.size() != reference.times.size() || coarse.states.size() != coarse.times.size() ||
      reference.states.size() != reference.times.size())
    throw std::invalid_argument("l1_space_time_error: runs must share their sample times");
  L1ErrorAccumulator acc(coarse.mesh, reference.mesh);
  double previous = 0.0;
  for (std::size_t p = 0; p < coarse.times.size(); ++p) {
    if (std::abs(coarse.times[p] - reference.times[p]) > 1e-12 * std::max(1.0, std::abs(coarse.times[p])))
      throw std::invalid_argument("l1_space_time_error: sample times differ");
    acc.add(coarse.times[p] - previous, coarse.states[p], reference.states[p]);
    previous = coarse.times[p];
  }
  return acc.value();
}

DiagnosticsRecord make_record(const SpeciesSystem& sys, double time, const StateField& u, const FluxField* J,
                              const Vector& initialMasses, int newtonIterations, double preProjectionSumDeviation) {
  const Mesh& mesh = *u.mesh;
  DiagnosticsRecord r;
  r.time = time;
  r.entropy = entropy(mesh, u);
  r.dissipation = J ? dissipation(sys, mesh, u, *J) : 0.0;
  r.relativeEntropy = relative_entropy(mesh, u, equilibrium_state(mesh, initialMasses));
  r.masses = u.masses();
  r.minFraction = u.values.minCoeff();
  r.maxSumDeviation = (u.values.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.maxFluxSumDeviation = (J && J->values.cols() > 0) ? J->values.colwise().sum().cwiseAbs().maxCoeff() : 0.0;
  r.newtonIterations = newtonIterations;
  r.preProjectionSumDeviation = preProjectionSumDeviation;
  return r;
}

}  // namespace msfv
