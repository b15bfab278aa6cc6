// Command-line driver: run, convergence, entropy-decay, check.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msfv/csv.hpp"
#include "msfv/experiments.hpp"

namespace fs = std::filesystem;

namespace {

msfv::RunConfig load(const std::string& path, const std::string& outOverride, fs::path& outDir) {
  msfv::RunConfig cfg = msfv::load_config_file(path);
  outDir = outOverride.empty() ? fs::path(cfg.output.directory) : fs::path(outOverride);
  return cfg;
}

void print_monitor(const msfv::InvariantMonitor& m) {
  std::cout << "steps " << m.steps << ", entropy violations " << m.entropyViolations << ", mass drift "
            << m.maxMassDrift << ", min u " << m.minFraction << ", max flux sum " << m.maxFluxSum << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for Maxwell-Stefan diffusion"};
  app.require_subcommand(1);

  std::string configPath, outDir;
  std::uint64_t seed = msfv::PropertyOptions{}.seed;
  std::vector<std::size_t> grids;
  std::size_t refN = 0;

  auto* run = app.add_subcommand("run", "Single simulation with diagnostics and snapshots");
  run->add_option("--config", configPath, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", outDir, "Output directory (overrides output.directory)");

  auto* conv = app.add_subcommand("convergence", "Spatial convergence study against a nested reference");
  conv->add_option("--config", configPath, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", outDir, "Output directory");
  conv->add_option("--grids", grids, "Coarse resolutions")->delimiter(',');
  conv->add_option("--ref", refN, "Reference resolution");

  auto* decay = app.add_subcommand("entropy-decay", "Relative entropy history and exponential fit");
  decay->add_option("--config", configPath, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  decay->add_option("--out", outDir, "Output directory");

  auto* check = app.add_subcommand("check", "Randomized property suite");
  check->add_option("--seed", seed, "Random seed");
  check->add_option("--out", outDir, "Output directory")->default_str(".");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::path dir;
    if (*run) {
      const auto cfg = load(configPath, outDir, dir);
      const auto out = msfv::cmd_run(cfg, dir);
      print_monitor(out.monitor);
      std::cout << "wrote " << (dir / "diagnostics.csv").string() << '\n';
    } else if (*conv) {
      const auto cfg = load(configPath, outDir, dir);
      if (grids.empty()) grids = {16, 32, 64, 128};
      if (refN == 0) refN = 1024;
      const auto res = msfv::cmd_convergence(cfg, grids, refN, dir);
      for (const auto& row : res.rows)
        std::cout << "N=" << row.N << " error=" << msfv::csv::format(row.error) << " order=" << row.order << '\n';
    } else if (*decay) {
      const auto cfg = load(configPath, outDir, dir);
      const auto res = msfv::cmd_entropy_decay(cfg, dir);
      std::cout << "fit: " << res.fit.status << ", slope " << res.fit.slope << ", R^2 " << res.fit.rSquared << '\n';
    } else if (*check) {
      msfv::PropertyOptions opt;
      opt.seed = seed;
      const auto results = msfv::cmd_check(opt, outDir.empty() ? fs::path(".") : fs::path(outDir));
      bool all = true;
      for (const auto& r : results) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " worst=" << r.worst << '\n';
        all = all && r.passed();
      }
      return all ? 0 : 1;
    }
  } catch (const msfv::NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
