#include "msfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "msfv/csv.hpp"

namespace msfv {
namespace {

constexpr double kRelTol = 1e-12;

bool close_rel(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  return std::abs(a - b) <= kRelTol * scale;
}

double compute_regularity(const Mesh& mesh) {
  double zeta = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.interiorEdges) {
    zeta = std::min({zeta, e.distK / e.distance, e.distL / e.distance});
  }
  // For a boundary face d_sigma is the distance from x_K to the face itself.
  for (const auto& b : mesh.boundaryEdges) zeta = std::min(zeta, b.distance / b.distance);
  return zeta;
}

void finalize(Mesh& mesh) {
  mesh.totalMeasure = 0.0;
  for (const auto& c : mesh.cells) mesh.totalMeasure += c.measure;
  std::stable_sort(mesh.boundaryEdges.begin(), mesh.boundaryEdges.end(),
                   [](const BoundaryEdge& a, const BoundaryEdge& b) { return a.cellK < b.cellK; });
  mesh.regularity = compute_regularity(mesh);
}

Eigen::VectorXd unit(int dim, int axis, double sign) {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(dim);
  n(axis) = sign;
  return n;
}

}  // namespace

Mesh uniform_interval(std::size_t N) {
  if (N == 0) throw std::invalid_argument("uniform_interval: N must be positive");
  const double h = 1.0 / static_cast<double>(N);
  Mesh mesh;
  mesh.dimension = 1;
  mesh.shape = GridShape{N, 1};
  mesh.cells.reserve(N);
  for (std::size_t k = 0; k < N; ++k) {
    Eigen::VectorXd x(1);
    x(0) = (static_cast<double>(k) + 0.5) * h;
    mesh.cells.push_back(Cell{k, x, h});
  }
  for (std::size_t k = 0; k + 1 < N; ++k) {
    InteriorEdge e;
    e.cellK = k;
    e.cellL = k + 1;
    e.measure = 1.0;  // a point face has unit 0-dimensional measure
    e.distance = h;
    e.distK = 0.5 * h;
    e.distL = 0.5 * h;
    e.transmissibility = e.measure / e.distance;
    e.normalKtoL = unit(1, 0, 1.0);
    e.diamondMeasure = e.measure * e.distance / 1.0;
    mesh.interiorEdges.push_back(std::move(e));
  }
  mesh.boundaryEdges.push_back(BoundaryEdge{0, 1.0, 0.5 * h, unit(1, 0, -1.0)});
  mesh.boundaryEdges.push_back(BoundaryEdge{N - 1, 1.0, 0.5 * h, unit(1, 0, 1.0)});
  mesh.meshSize = h;
  finalize(mesh);
  return mesh;
}

Mesh uniform_rectangle(std::size_t Nx, std::size_t Ny) {
  if (Nx == 0 || Ny == 0) throw std::invalid_argument("uniform_rectangle: subdivisions must be positive");
  const double hx = 1.0 / static_cast<double>(Nx);
  const double hy = 1.0 / static_cast<double>(Ny);
  Mesh mesh;
  mesh.dimension = 2;
  mesh.shape = GridShape{Nx, Ny};
  mesh.cells.reserve(Nx * Ny);
  for (std::size_t j = 0; j < Ny; ++j) {
    for (std::size_t i = 0; i < Nx; ++i) {
      Eigen::VectorXd x(2);
      x << (static_cast<double>(i) + 0.5) * hx, (static_cast<double>(j) + 0.5) * hy;
      mesh.cells.push_back(Cell{j * Nx + i, x, hx * hy});
    }
  }

  auto add_edge = [&](std::size_t K, std::size_t L, double faceMeasure, double dist, int axis) {
    InteriorEdge e;
    e.cellK = K;
    e.cellL = L;
    e.measure = faceMeasure;
    e.distance = dist;
    e.distK = 0.5 * dist;
    e.distL = 0.5 * dist;
    e.transmissibility = faceMeasure / dist;
    e.normalKtoL = unit(2, axis, 1.0);
    e.diamondMeasure = faceMeasure * dist / 2.0;
    mesh.interiorEdges.push_back(std::move(e));
  };
  // x-direction faces, by increasing cellK (row-major numbering keeps this order)
  for (std::size_t j = 0; j < Ny; ++j)
    for (std::size_t i = 0; i + 1 < Nx; ++i) add_edge(j * Nx + i, j * Nx + i + 1, hy, hx, 0);
  for (std::size_t j = 0; j + 1 < Ny; ++j)
    for (std::size_t i = 0; i < Nx; ++i) add_edge(j * Nx + i, (j + 1) * Nx + i, hx, hy, 1);

  std::vector<BoundaryEdge> xFaces, yFaces;
  for (std::size_t j = 0; j < Ny; ++j) {
    xFaces.push_back(BoundaryEdge{j * Nx, hy, 0.5 * hx, unit(2, 0, -1.0)});
    xFaces.push_back(BoundaryEdge{j * Nx + Nx - 1, hy, 0.5 * hx, unit(2, 0, 1.0)});
  }
  for (std::size_t i = 0; i < Nx; ++i) {
    yFaces.push_back(BoundaryEdge{i, hx, 0.5 * hy, unit(2, 1, -1.0)});
    yFaces.push_back(BoundaryEdge{(Ny - 1) * Nx + i, hx, 0.5 * hy, unit(2, 1, 1.0)});
  }
  auto byCell = [](const BoundaryEdge& a, const BoundaryEdge& b) { return a.cellK < b.cellK; };
  std::stable_sort(xFaces.begin(), xFaces.end(), byCell);
  std::stable_sort(yFaces.begin(), yFaces.end(), byCell);
  mesh.boundaryEdges = std::move(xFaces);
  mesh.boundaryEdges.insert(mesh.boundaryEdges.end(), yFaces.begin(), yFaces.end());

  mesh.meshSize = std::hypot(hx, hy);
  mesh.totalMeasure = 0.0;
  for (const auto& c : mesh.cells) mesh.totalMeasure += c.measure;
  mesh.regularity = compute_regularity(mesh);
  return mesh;
}

std::vector<std::string> validate(const Mesh& mesh) {
  std::vector<std::string> out;
  auto report = [&](const std::string& what) { out.push_back(what); };

  if (mesh.dimension != 1 && mesh.dimension != 2) report("mesh: dimension must be 1 or 2");

  double sum = 0.0;
  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    const auto& c = mesh.cells[k];
    if (c.index != k) report("cell " + std::to_string(k) + ": index mismatch");
    if (!(c.measure > 0.0)) report("cell " + std::to_string(k) + ": measure must be positive");
    if (c.center.size() != mesh.dimension) report("cell " + std::to_string(k) + ": center has wrong dimension");
    sum += c.measure;
  }
  if (!close_rel(sum, mesh.totalMeasure)) report("mesh: sum of cell measures differs from totalMeasure");

  const double d = mesh.dimension;
  std::vector<double> halfDiamonds(mesh.cells.size(), 0.0);
  for (std::size_t s = 0; s < mesh.interiorEdges.size(); ++s) {
    const auto& e = mesh.interiorEdges[s];
    const std::string tag = "interior edge " + std::to_string(s) + ": ";
    if (e.cellK >= mesh.cells.size() || e.cellL >= mesh.cells.size() || e.cellK == e.cellL) {
      report(tag + "invalid cell indices");
      continue;
    }
    if (!(e.measure > 0.0) || !(e.distance > 0.0) || !(e.distK > 0.0) || !(e.distL > 0.0))
      report(tag + "measure and distances must be positive");
    const Eigen::VectorXd delta = mesh.cells[e.cellL].center - mesh.cells[e.cellK].center;
    if (!close_rel(delta.norm(), e.distance)) report(tag + "distance differs from |x_L - x_K|");
    if (!close_rel(e.distK + e.distL, e.distance)) report(tag + "distK + distL differs from distance");
    if (!close_rel(e.transmissibility, e.measure / e.distance))
      report(tag + "transmissibility differs from measure/distance");
    if (e.normalKtoL.size() != mesh.dimension || std::abs(e.normalKtoL.norm() - 1.0) > kRelTol) {
      report(tag + "normal is not a unit vector");
    } else {
      const Eigen::VectorXd expected = delta / e.distance;
      if ((e.normalKtoL - expected).cwiseAbs().maxCoeff() > kRelTol)
        report(tag + "orthogonality: normal differs from (x_L - x_K)/distance");
      if (!close_rel(e.normalKtoL.dot(delta), e.distance))
        report(tag + "orthogonality: normal . (x_L - x_K) differs from distance");
    }
    if (!close_rel(e.diamondMeasure, e.measure * e.distance / d))
      report(tag + "diamond measure differs from measure*distance/dimension");
    halfDiamonds[e.cellK] += half_diamond_measure(mesh, e.measure, e.distK);
    halfDiamonds[e.cellL] += half_diamond_measure(mesh, e.measure, e.distL);
  }
  for (std::size_t s = 0; s < mesh.boundaryEdges.size(); ++s) {
    const auto& b = mesh.boundaryEdges[s];
    const std::string tag = "boundary edge " + std::to_string(s) + ": ";
    if (b.cellK >= mesh.cells.size()) {
      report(tag + "invalid cell index");
      continue;
    }
    if (!(b.measure > 0.0) || !(b.distance > 0.0)) report(tag + "measure and distance must be positive");
    if (b.normal.size() != mesh.dimension || std::abs(b.normal.norm() - 1.0) > kRelTol)
      report(tag + "normal is not a unit vector");
    halfDiamonds[b.cellK] += half_diamond_measure(mesh, b.measure, b.distance);
  }
  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    if (!close_rel(halfDiamonds[k], mesh.cells[k].measure))
      report("cell " + std::to_string(k) + ": half-diamond measures do not sum to the cell measure");
  }
  if (!(mesh.regularity > 0.0)) report("mesh: regularity must be positive");
  if (!mesh.cells.empty() && !close_rel(compute_regularity(mesh), mesh.regularity))
    report("mesh: regularity differs from recomputed value");
  return out;
}

void write_mesh_csv(const Mesh& mesh, std::ostream& os) {
  using csv::format;
  os << "entity,index,K,L,x,y,measure,m_sigma,d_sigma,tau_sigma\n";
  for (const auto& c : mesh.cells) {
    os << "cell," << c.index << ",,," << format(c.center(0)) << ','
       << (mesh.dimension > 1 ? format(c.center(1)) : std::string()) << ',' << format(c.measure) << ",,,\n";
  }
  for (std::size_t s = 0; s < mesh.interiorEdges.size(); ++s) {
    const auto& e = mesh.interiorEdges[s];
    os << "interior," << s << ',' << e.cellK << ',' << e.cellL << ",,,," << format(e.measure) << ','
       << format(e.distance) << ',' << format(e.transmissibility) << '\n';
  }
  for (std::size_t s = 0; s < mesh.boundaryEdges.size(); ++s) {
    const auto& b = mesh.boundaryEdges[s];
    os << "boundary," << s << ',' << b.cellK << ",,,,," << format(b.measure) << ',' << format(b.distance)
       << ',' << format(b.measure / b.distance) << '\n';
  }
}

}  // namespace msfv
