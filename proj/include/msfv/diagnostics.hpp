#pragma once

#include <memory>
#include <vector>

#include "msfv/mesh.hpp"
#include "msfv/model.hpp"
#include "msfv/scheme.hpp"

namespace msfv {

struct DiagnosticsRecord {
  double time = 0.0;
  double entropy = 0.0;          ///< E_T(u)
  double dissipation = 0.0;      ///< D^p, zero for the initial state
  double relativeEntropy = 0.0;  ///< H_T(u | m)
  Vector masses;
  double minFraction = 0.0;
  double maxSumDeviation = 0.0;      ///< after projection
  double maxFluxSumDeviation = 0.0;  ///< max_sigma |sum_i J_{i,K sigma}|
  int newtonIterations = 0;
  double preProjectionSumDeviation = 0.0;
};

/// sum_i sum_K m_K u log u, with 0 log 0 = 0. Throws std::domain_error on a negative entry.
double entropy(const Mesh& mesh, const StateField& u);

/// sum over interior edges of (c*/2) m_sigma d_sigma |J|^2 + (alpha/2) tau_sigma |D sqrt(u)|^2.
double dissipation(const SpeciesSystem& sys, const Mesh& mesh, const StateField& u, const FluxField& J);

/// Spatially uniform state with the same species masses: M_i / m_Omega.
Vector equilibrium_state(const Mesh& mesh, const Vector& masses);

/// sum_{K,i} m_K u log(u / m_i). Throws std::domain_error when some m_i <= 0.
double relative_entropy(const Mesh& mesh, const StateField& u, const Vector& m);

/// Piecewise-constant vector field on diamonds. Columns are the interior
/// edges followed by the boundary edges, in mesh order.
struct DiamondField {
  Matrix values;  ///< d x (|E_int| + |E_ext|)
};

/// Sum over diamonds of m_Delta |value|^2; boundary diamonds have measure m_sigma d_sigma / d.
double squared_norm(const Mesh& mesh, const DiamondField& field);

/// d * (v_L - v_K) / d_sigma * n_{K sigma} on each interior diamond; zero on boundary diamonds.
DiamondField reconstruct_gradient(const Mesh& mesh, const Vector& cellValues);

struct FluxReconstruction {
  std::vector<DiamondField> perSpecies;  ///< d * J_{i,K sigma} n_{K sigma}
  double squaredNorm = 0.0;              ///< sum_i sum_sigma m_Delta d^2 |J_i|^2
};

FluxReconstruction reconstruct_flux_field(const Mesh& mesh, const FluxField& J);

/// Time samples of one run. Sample p holds u^p on (t_{p-1}, t_p], with t_0 = 0.
struct SampledRun {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> times;
  std::vector<Matrix> states;
};

/// Exact cell averages of a piecewise-constant field on a nested finer grid.
/// Throws std::invalid_argument unless both meshes are uniform grids of the
/// same dimension whose subdivisions nest.
Matrix restrict_to_coarse(const Mesh& fine, const Matrix& fineValues, const Mesh& coarse);

/// sum_p dt_p sum_i sum_K m_K |u_coarse - restrict(u_ref)| over shared sample times.
double l1_space_time_error(const SampledRun& coarse, const SampledRun& reference);

/// Streaming form of l1_space_time_error for runs that are too large to keep in memory.
class L1ErrorAccumulator {
 public:
  L1ErrorAccumulator(std::shared_ptr<const Mesh> coarse, std::shared_ptr<const Mesh> reference);
  void add(double dt, const Matrix& coarseValues, const Matrix& referenceValues);
  double value() const { return total_; }

 private:
  std::shared_ptr<const Mesh> coarse_;
  std::shared_ptr<const Mesh> reference_;
  double total_ = 0.0;
};

/// Builds the record for a state and its fluxes. `initialMasses` defines the
/// equilibrium used for the relative entropy.
DiagnosticsRecord make_record(const SpeciesSystem& sys, double time, const StateField& u, const FluxField* J,
                              const Vector& initialMasses, int newtonIterations = 0,
                              double preProjectionSumDeviation = 0.0);

}  // namespace msfv
