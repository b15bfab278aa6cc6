#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msfv/mesh.hpp"
#include "msfv/model.hpp"
#include "msfv/scheme.hpp"

namespace msfv {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };
  ConfigError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct MeshConfig {
  int dimension = 1;
  std::size_t N = 0;   ///< 1D cell count
  std::size_t Nx = 0;  ///< 2D subdivisions
  std::size_t Ny = 0;
};

/// Axis-aligned indicator block assigning volume fraction 1 to one species.
struct Block {
  int species = 0;  ///< 0-based
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

struct InitialConfig {
  /// "smooth1d" | "nonsmooth1d" | "blocks2d" | "uniform" | "table"
  std::string preset = "uniform";
  Vector uniformValues;       ///< preset "uniform"
  std::vector<Block> blocks;  ///< preset "blocks2d"
  Matrix table;               ///< preset "table": n x |T|
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<double> snapshotTimes;
  int diagnosticsEvery = 1;
};

struct RunConfig {
  MeshConfig mesh;
  Matrix c;  ///< species friction coefficients
  InitialConfig initial;
  double dt = 0.0;
  double T = 0.0;
  SolverConfig solver;
  OutputConfig output;

  int n() const { return static_cast<int>(c.rows()); }
};

/// Parses and validates a JSON run configuration (comments allowed).
/// Throws ConfigError: Kind::Parse for malformed text, Kind::Validation with
/// a message naming the offending field otherwise.
RunConfig load_config(std::string_view document);
RunConfig load_config_file(const std::filesystem::path& path);

/// Runs every load-time check on an already populated config.
void validate_config(const RunConfig& cfg);

std::shared_ptr<const Mesh> build_mesh(const MeshConfig& cfg);

/// Cell values of the initial profile on `mesh`:
///  smooth1d    u1 = u2 = 1/4 + 1/4 cos(pi x), u3 = 1 - u1 - u2 (midpoint rule)
///  nonsmooth1d u1 = 1 on [3/8,5/8], u2 = 1 on (1/8,3/8) U (5/8,7/8), u3 = rest (exact averages)
///  blocks2d    each block's overlap fraction goes to its species, the remainder to the last one
///  uniform     constant composition
///  table       explicit per-cell values
/// Throws std::invalid_argument on a preset/mesh mismatch.
StateField preset_initial(const InitialConfig& init, std::shared_ptr<const Mesh> mesh, int n);

/// Default blocks2d layout for three species.
std::vector<Block> default_blocks();

/// Coefficients used for the one-dimensional experiments
/// (c12 = 0.2, c13 = 1, c23 = 0.1).
Matrix coefficients_1d();
/// Coefficients used for the two-dimensional experiment
/// (c12 = 0.1, c13 = 0.2, c23 = 2).
Matrix coefficients_2d();

/// Three-species 1D config on N cells with the 1D coefficients.
RunConfig make_1d_config(const std::string& preset, std::size_t N, double dt, double T);
/// Three-species blocks2d config on an N x N grid with the 2D coefficients.
RunConfig make_2d_config(std::size_t N, double dt, double T);

}  // namespace msfv
