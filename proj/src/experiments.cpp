#include "msfv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "msfv/csv.hpp"

namespace msfv {
namespace {

double entropy_slack(double E) { return 1e-10 * (1.0 + std::abs(E)); }

void write_diagnostics_header(std::ostream& os, int n) {
  os << "t,E,D,H";
  for (int i = 1; i <= n; ++i) os << ",mass_" << i;
  os << ",min_u,max_sum_dev,max_fluxsum_dev,newton_iters\n";
}

void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r) {
  os << csv::format(r.time) << ',' << csv::format(r.entropy) << ',' << csv::format(r.dissipation) << ','
     << csv::format(r.relativeEntropy);
  for (Eigen::Index i = 0; i < r.masses.size(); ++i) os << ',' << csv::format(r.masses(i));
  os << ',' << csv::format(r.minFraction) << ',' << csv::format(r.maxSumDeviation) << ','
     << csv::format(r.maxFluxSumDeviation) << ',' << r.newtonIterations << '\n';
}

void write_snapshot(const std::filesystem::path& path, const StateField& u) {
  const Mesh& mesh = *u.mesh;
  auto os = csv::open_output(path);
  os << "cell,x";
  if (mesh.dimension == 2) os << ",y";
  for (int i = 1; i <= u.n(); ++i) os << ",u_" << i;
  os << '\n';
  for (std::size_t K = 0; K < mesh.num_cells(); ++K) {
    os << K;
    for (int k = 0; k < mesh.dimension; ++k) os << ',' << csv::format(mesh.cells[K].center(k));
    for (int i = 0; i < u.n(); ++i) os << ',' << csv::format(u.values(i, K));
    os << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

RunConfig with_resolution(RunConfig cfg, std::size_t N) {
  if (cfg.mesh.dimension == 1) {
    cfg.mesh.N = N;
  } else {
    cfg.mesh.Nx = N;
    cfg.mesh.Ny = N;
  }
  return cfg;
}

}  // namespace

void InvariantMonitor::observe_initial(const DiagnosticsRecord& r0) {
  initialMasses_ = r0.masses;
}

void InvariantMonitor::observe(double dt, const DiagnosticsRecord& prev, const DiagnosticsRecord& cur) {
  ++steps;
  const double excess = cur.entropy + dt * cur.dissipation - prev.entropy - entropy_slack(prev.entropy);
  worstEntropyExcess = std::max(worstEntropyExcess, excess);
  if (excess > 0.0) ++entropyViolations;
  for (Eigen::Index i = 0; i < cur.masses.size(); ++i) {
    const double drift = std::abs(cur.masses(i) - initialMasses_(i)) / initialMasses_(i);
    maxMassDrift = std::max(maxMassDrift, drift);
  }
  maxPreProjectionSumDev = std::max(maxPreProjectionSumDev, cur.preProjectionSumDeviation);
  maxPostProjectionSumDev = std::max(maxPostProjectionSumDev, cur.maxSumDeviation);
  minFraction = std::min(minFraction, cur.minFraction);
  maxFluxSum = std::max(maxFluxSum, cur.maxFluxSumDeviation);
  if (cur.relativeEntropy > prev.relativeEntropy) ++relativeEntropyIncreases;
}

SimulationOutcome simulate(const RunConfig& cfg, const RecordSink& sink) {
  validate_config(cfg);
  SimulationOutcome out;
  out.mesh = build_mesh(cfg.mesh);
  const SpeciesSystem sys = build_system(cfg.c);
  const StateField u0 = preset_initial(cfg.initial, out.mesh, sys.n());
  const Vector M0 = u0.masses();

  out.initial = make_record(sys, 0.0, u0, nullptr, M0);
  out.monitor.observe_initial(out.initial);
  out.records.reserve(step_count(cfg.dt, cfg.T));

  out.final = run(sys, *out.mesh, u0, cfg.dt, cfg.T, cfg.solver, [&](std::size_t p, double t, const StepResult& res) {
    DiagnosticsRecord rec =
        make_record(sys, t, res.state, &res.fluxes, M0, res.iterations, res.preProjectionSumDeviation);
    const DiagnosticsRecord& prev = out.records.empty() ? out.initial : out.records.back();
    out.monitor.observe(cfg.dt, prev, rec);
    out.records.push_back(std::move(rec));
    if (sink) sink(p, cfg.dt, res, out.records.back());
  });
  return out;
}

SimulationOutcome cmd_run(const RunConfig& cfg, const std::filesystem::path& outDir) {
  validate_config(cfg);
  std::vector<double> pending = cfg.output.snapshotTimes;
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  std::size_t next = 0;
  const double timeTol = 1e-9 * cfg.dt;

  auto diag = csv::open_output(outDir / "diagnostics.csv");
  write_diagnostics_header(diag, cfg.n());

  // The initial state is needed before the first step for t = 0 output.
  {
    auto mesh = build_mesh(cfg.mesh);
    const StateField u0 = preset_initial(cfg.initial, mesh, cfg.n());
    const SpeciesSystem sys = build_system(cfg.c);
    write_diagnostics_row(diag, make_record(sys, 0.0, u0, nullptr, u0.masses()));
    while (next < pending.size() && pending[next] <= timeTol) {
      write_snapshot(outDir / ("u_t" + csv::format_short(pending[next]) + ".csv"), u0);
      ++next;
    }
  }

  const std::size_t steps = step_count(cfg.dt, cfg.T);
  const auto every = static_cast<std::size_t>(cfg.output.diagnosticsEvery);
  SimulationOutcome out = simulate(cfg, [&](std::size_t p, double, const StepResult& res, const DiagnosticsRecord& rec) {
    if (p % every == 0 || p == steps) write_diagnostics_row(diag, rec);
    while (next < pending.size() && rec.time >= pending[next] - timeTol) {
      write_snapshot(outDir / ("u_t" + csv::format_short(pending[next]) + ".csv"), res.state);
      ++next;
    }
  });
  for (; next < pending.size(); ++next)
    write_snapshot(outDir / ("u_t" + csv::format_short(pending[next]) + ".csv"), out.final);
  diag.flush();
  if (!diag) throw std::runtime_error("failed writing diagnostics.csv");
  return out;
}

ConvergenceResult cmd_convergence(const RunConfig& cfg, const std::vector<std::size_t>& grids, std::size_t refN,
                                  const std::filesystem::path& outDir) {
  if (grids.empty()) throw std::invalid_argument("convergence: empty grid list");
  for (std::size_t N : grids)
    if (N == 0 || refN % N != 0)
      throw std::invalid_argument("convergence: reference resolution " + std::to_string(refN) +
                                  " is not a multiple of " + std::to_string(N));

  ConvergenceResult result;
  std::vector<std::shared_ptr<const Mesh>> meshes;
  std::vector<std::vector<Matrix>> samples;
  for (std::size_t N : grids) {
    std::vector<Matrix> states;
    SimulationOutcome o = simulate(with_resolution(cfg, N), [&](std::size_t, double, const StepResult& res,
                                                                const DiagnosticsRecord&) {
      states.push_back(res.state.values);
    });
    meshes.push_back(o.mesh);
    samples.push_back(std::move(states));
    result.monitors.push_back(o.monitor);
  }

  const RunConfig refCfg = with_resolution(cfg, refN);
  const auto refMesh = build_mesh(refCfg.mesh);
  std::vector<L1ErrorAccumulator> acc;
  for (const auto& m : meshes) acc.emplace_back(m, refMesh);
  SimulationOutcome ref = simulate(refCfg, [&](std::size_t p, double dt, const StepResult& res,
                                               const DiagnosticsRecord&) {
    // simulate() builds its own mesh; only the geometry matters for the accumulators.
    for (std::size_t g = 0; g < acc.size(); ++g) acc[g].add(dt, samples[g][p - 1], res.state.values);
  });
  result.monitors.push_back(ref.monitor);

  for (std::size_t g = 0; g < grids.size(); ++g) {
    ConvergenceRow row{grids[g], acc[g].value(), std::numeric_limits<double>::quiet_NaN()};
    if (g > 0) {
      const auto& prev = result.rows.back();
      row.order = std::log(prev.error / row.error) / std::log(static_cast<double>(row.N) / static_cast<double>(prev.N));
    }
    result.rows.push_back(row);
  }

  if (!outDir.empty()) {
    auto os = csv::open_output(outDir / "convergence.csv");
    os << "N,error,order\n";
    for (const auto& row : result.rows) {
      os << row.N << ',' << csv::format(row.error) << ',';
      if (!std::isnan(row.order)) os << csv::format(row.order);
      os << '\n';
    }
    if (!os) throw std::runtime_error("failed writing convergence.csv");
  }
  return result;
}

DecayFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& H, double tMin) {
  DecayFit fit;
  if (std::all_of(H.begin(), H.end(), [](double h) { return h <= 1e-15; })) {
    fit.status = "already at equilibrium";
    return fit;
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size() && k < H.size(); ++k) {
    if (t[k] >= tMin && H[k] > 1e-15) {
      xs.push_back(t[k]);
      ys.push_back(std::log(H[k]));
    }
  }
  fit.rows = xs.size();
  if (xs.size() < 2) {
    fit.status = "insufficient data";
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssRes = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (fit.intercept + fit.slope * xs[k]);
    ssRes += e * e;
  }
  fit.rSquared = syy > 0.0 ? 1.0 - ssRes / syy : 1.0;
  fit.status = "ok";
  return fit;
}

DecayResult cmd_entropy_decay(const RunConfig& cfg, const std::filesystem::path& outDir) {
  DecayResult result;
  SimulationOutcome o = simulate(cfg);
  result.times.push_back(0.0);
  result.H.push_back(o.initial.relativeEntropy);
  for (const auto& r : o.records) {
    result.times.push_back(r.time);
    result.H.push_back(r.relativeEntropy);
  }
  result.fit = fit_log_decay(result.times, result.H, 0.5 * cfg.T);
  result.monitor = o.monitor;

  if (!outDir.empty()) {
    auto os = csv::open_output(outDir / "entropy.csv");
    os << "t,H\n";
    for (std::size_t k = 0; k < result.times.size(); ++k)
      os << csv::format(result.times[k]) << ',' << csv::format(result.H[k]) << '\n';
    if (!os) throw std::runtime_error("failed writing entropy.csv");
    auto fs = csv::open_output(outDir / "entropy_fit.csv");
    fs << "status,slope,intercept,r_squared,rows\n";
    fs << result.fit.status << ',' << csv::format(result.fit.slope) << ',' << csv::format(result.fit.intercept)
       << ',' << csv::format(result.fit.rSquared) << ',' << result.fit.rows << '\n';
    if (!fs) throw std::runtime_error("failed writing entropy_fit.csv");
  }
  return result;
}

std::vector<PropertyResult> cmd_check(const PropertyOptions& opt, const std::filesystem::path& outDir) {
  auto results = run_property_suite(opt);
  if (!outDir.empty()) write_property_report(outDir / "check.csv", results);
  return results;
}

}  // namespace msfv
