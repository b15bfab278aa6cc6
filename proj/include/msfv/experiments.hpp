#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "msfv/config.hpp"
#include "msfv/diagnostics.hpp"
#include "msfv/properties.hpp"

namespace msfv {

/// Running maxima of the per-step invariants of one simulation.
struct InvariantMonitor {
  std::size_t steps = 0;
  std::size_t entropyViolations = 0;
  double worstEntropyExcess = -std::numeric_limits<double>::infinity();  ///< max of E_p + dt D_p - E_{p-1} - slack
  double maxMassDrift = 0.0;             ///< relative, over species and steps
  double maxPreProjectionSumDev = 0.0;
  double maxPostProjectionSumDev = 0.0;
  double minFraction = std::numeric_limits<double>::infinity();  ///< over computed steps only
  double maxFluxSum = 0.0;
  std::size_t relativeEntropyIncreases = 0;

  void observe_initial(const DiagnosticsRecord& r0);
  void observe(double dt, const DiagnosticsRecord& prev, const DiagnosticsRecord& cur);

 private:
  Vector initialMasses_;
};

/// Called after every step with (p, dt_p, result, record).
using RecordSink = std::function<void(std::size_t, double, const StepResult&, const DiagnosticsRecord&)>;

struct SimulationOutcome {
  std::shared_ptr<const Mesh> mesh;
  DiagnosticsRecord initial;
  std::vector<DiagnosticsRecord> records;  ///< one per step, p = 1..P
  InvariantMonitor monitor;
  StateField final;
};

/// Runs `cfg` from its initial preset, building diagnostics on every step.
SimulationOutcome simulate(const RunConfig& cfg, const RecordSink& sink = {});

/// Writes diagnostics.csv and the snapshot files into `outDir`.
SimulationOutcome cmd_run(const RunConfig& cfg, const std::filesystem::path& outDir);

struct ConvergenceRow {
  std::size_t N = 0;
  double error = 0.0;
  double order = 0.0;  ///< NaN for the first row
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<InvariantMonitor> monitors;  ///< coarse grids in order, then the reference
};

/// Runs each coarse grid and the reference on `cfg` with the mesh resolution
/// overridden (N for 1D, Nx = Ny = N for 2D). Writes convergence.csv when
/// `outDir` is non-empty. Throws std::invalid_argument unless refN is a
/// multiple of every grid.
ConvergenceResult cmd_convergence(const RunConfig& cfg, const std::vector<std::size_t>& grids, std::size_t refN,
                                  const std::filesystem::path& outDir);

struct DecayFit {
  std::string status;  ///< "ok", "already at equilibrium" or "insufficient data"
  double slope = 0.0;
  double intercept = 0.0;
  double rSquared = 0.0;
  std::size_t rows = 0;
};

/// Least-squares fit of log H against t over rows with t >= tMin and H > 1e-15.
DecayFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& H, double tMin);

struct DecayResult {
  std::vector<double> times;
  std::vector<double> H;
  DecayFit fit;
  InvariantMonitor monitor;
};

/// Writes entropy.csv (t,H) and entropy_fit.csv into `outDir` when non-empty.
DecayResult cmd_entropy_decay(const RunConfig& cfg, const std::filesystem::path& outDir);

/// Runs the property suite and writes check.csv into `outDir` when non-empty.
std::vector<PropertyResult> cmd_check(const PropertyOptions& opt, const std::filesystem::path& outDir);

}  // namespace msfv
