#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace msfv {

struct Cell {
  std::size_t index = 0;
  Eigen::VectorXd center;
  double measure = 0.0;
};

/// Face shared by two cells. Orientation is from cellK to cellL.
struct InteriorEdge {
  std::size_t cellK = 0;
  std::size_t cellL = 0;
  double measure = 0.0;          ///< (d-1)-dimensional measure, 1 in 1D
  double distance = 0.0;         ///< |x_K - x_L|
  double distK = 0.0;            ///< dist(x_K, face)
  double distL = 0.0;            ///< dist(x_L, face)
  double transmissibility = 0.0; ///< measure / distance
  Eigen::VectorXd normalKtoL;
  double diamondMeasure = 0.0;   ///< measure * distance / d
};

/// Face on the domain boundary. Fluxes through it are zero.
struct BoundaryEdge {
  std::size_t cellK = 0;
  double measure = 0.0;
  double distance = 0.0; ///< |x_K - x_face|
  Eigen::VectorXd normal;
};

/// Structured-grid descriptor kept by the uniform constructors; cells are
/// numbered row-major, `index = j * nx + i`.
struct GridShape {
  std::size_t nx = 1;
  std::size_t ny = 1;
};

/// Admissible two-point-flux mesh. Immutable after construction.
struct Mesh {
  int dimension = 1;
  std::vector<Cell> cells;
  std::vector<InteriorEdge> interiorEdges;
  std::vector<BoundaryEdge> boundaryEdges;
  double meshSize = 0.0;     ///< max cell diameter
  double regularity = 0.0;   ///< min over cells/faces of dist(x_K, face) / d_face
  double totalMeasure = 0.0;
  std::optional<GridShape> shape;

  std::size_t num_cells() const { return cells.size(); }
  std::size_t num_interior_edges() const { return interiorEdges.size(); }
};

/// Uniform partition of (0,1) into N cells. Throws std::invalid_argument for N = 0.
Mesh uniform_interval(std::size_t N);

/// Uniform Cartesian partition of (0,1)^2 into Nx * Ny cells.
/// Interior edges are ordered x-direction faces first, then y-direction,
/// each group by increasing cellK.
Mesh uniform_rectangle(std::size_t Nx, std::size_t Ny);

/// Checks every geometric invariant of an admissible mesh at 1e-12 relative
/// tolerance. Returns one human-readable message per violation.
std::vector<std::string> validate(const Mesh& mesh);

/// Half-diamond measure m_sigma * d_{K sigma} / d.
inline double half_diamond_measure(const Mesh& mesh, double faceMeasure, double distToFace) {
  return faceMeasure * distToFace / mesh.dimension;
}

/// Writes one row per cell and one per face:
/// entity,index,K,L,x,y,measure,m_sigma,d_sigma,tau_sigma
void write_mesh_csv(const Mesh& mesh, std::ostream& os);

}  // namespace msfv
