#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "msfv/mesh.hpp"
#include "msfv/model.hpp"

namespace msfv {

/// Volume fractions u_{i,K}, one column per cell.
struct StateField {
  std::shared_ptr<const Mesh> mesh;
  Matrix values;  ///< n x |T|

  int n() const { return static_cast<int>(values.rows()); }
  /// M_i = sum_K m_K u_{i,K}
  Vector masses() const;
};

/// Oriented fluxes J_{i,K sigma} on interior edges (K -> L), one column per edge.
/// Boundary fluxes are zero and not stored.
struct FluxField {
  std::shared_ptr<const Mesh> mesh;
  Matrix values;  ///< n x |E_int|
};

struct SolverConfig {
  double newtonTol = 1e-12;  ///< sup-norm of the Newton update
  int maxNewtonIters = 50;
  int maxDampingHalvings = 30;
  double projectionFloor = 1e-12;
  double logMeanEqualityThreshold = 1e-14;  ///< relative

  /// Throws std::invalid_argument naming the first non-positive field.
  void validate() const;
};

/// Thrown when the Newton iteration exhausts its budget. `step` is the
/// 1-based time step index when raised from run(), 0 otherwise.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::size_t step, int iterations)
      : std::runtime_error(what), step_(step), iterations_(iterations) {}
  std::size_t step() const { return step_; }
  int iterations() const { return iterations_; }

 private:
  std::size_t step_;
  int iterations_;
};

struct StepResult {
  StateField state;   ///< projected solution
  FluxField fluxes;   ///< recomputed from the projected solution
  int iterations = 0;
  double preProjectionSumDeviation = 0.0;  ///< max_K |sum_i u_{i,K} - 1| at Newton exit
  double preProjectionMin = 0.0;           ///< min_{i,K} u_{i,K} at Newton exit
};

// ---- edge quantities ---------------------------------------------------------

/// Logarithmic mean: 0 if min(a,b) <= 0, the midpoint when a and b agree to
/// `equalityThreshold` relative, (a - b) / (log a - log b) otherwise.
double log_mean(double a, double b, double equalityThreshold = 1e-14);

struct LogMeanPartials {
  double da = 0.0;
  double db = 0.0;
};

/// Partial derivatives of log_mean, consistent with its branches
/// (1/2 on the midpoint branch, 0 when min(a,b) <= 0).
LogMeanPartials log_mean_partials(double a, double b, double equalityThreshold = 1e-14);

/// Componentwise log_mean of two cell compositions.
Vector edge_fractions(const Vector& uK, const Vector& uL, double equalityThreshold = 1e-14);

/// Solves (c* I + Abar(uSigma)) J = -Du / dSigma.
Vector edge_flux(const SpeciesSystem& sys, const Vector& uSigma, const Vector& Du, double dSigma);

/// Fluxes on every interior edge for the given state.
FluxField compute_fluxes(const SpeciesSystem& sys, const StateField& u, double equalityThreshold = 1e-14);

// ---- implicit step -------------------------------------------------------------

/// Backward Euler residual, n x |T|:
/// R_{i,K} = m_K (uNew - uOld)_{i,K} / dt + sum_{sigma in E_K,int} m_sigma J_{i,K sigma}.
Matrix residual(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uNew, const StateField& uOld,
                double dt, double equalityThreshold = 1e-14);

/// Exact derivative of residual() with respect to uNew. Unknown (i, K) has
/// index K * n + i, so the matrix is block-sparse with n x n blocks.
Eigen::SparseMatrix<double> jacobian(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uNew,
                                     const StateField& uOld, double dt, double equalityThreshold = 1e-14);

/// Floors every component at `floor` and renormalizes to unit sum.
Vector project_simplex(const Vector& u, double floor);

/// Reusable Newton solver for one mesh and species system. Keeps the sparse
/// factorization's symbolic analysis across steps.
class ImplicitStepper {
 public:
  ImplicitStepper(SpeciesSystem sys, std::shared_ptr<const Mesh> mesh, SolverConfig cfg);
  ~ImplicitStepper();
  ImplicitStepper(const ImplicitStepper&) = delete;
  ImplicitStepper& operator=(const ImplicitStepper&) = delete;

  /// One implicit step from uOld: damped Newton from the warm start uOld,
  /// stopped when the update sup-norm drops below newtonTol, then projected.
  /// Throws NonConvergence.
  StepResult step(const StateField& uOld, double dt);

  const SpeciesSystem& system() const { return sys_; }
  const Mesh& mesh() const { return *mesh_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  struct Impl;
  SpeciesSystem sys_;
  std::shared_ptr<const Mesh> mesh_;
  SolverConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

StepResult newton_solve(const SpeciesSystem& sys, const Mesh& mesh, const StateField& uOld, double dt,
                        const SolverConfig& cfg = {});

/// Called after every step with (p, t_p, result).
using StepSink = std::function<void(std::size_t, double, const StepResult&)>;

/// Number of steps of size dt needed to reach T.
std::size_t step_count(double dt, double T);

/// Runs step_count(dt, T) implicit steps from u0. NonConvergence is rethrown
/// carrying the failing step index.
StateField run(const SpeciesSystem& sys, const Mesh& mesh, const StateField& u0, double dt, double T,
               const SolverConfig& cfg, const StepSink& sink = {});

}  // namespace msfv
