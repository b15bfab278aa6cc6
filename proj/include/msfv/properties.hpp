#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "msfv/model.hpp"

namespace msfv {

struct PropertyResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst = 0.0;  ///< worst measured deviation (or most negative eigenvalue for PSD checks)
  double tolerance = 0.0;

  bool passed() const { return failures == 0; }
};

using AbarAssembly = std::function<Matrix(const SpeciesSystem&, const Vector&)>;

struct PropertyOptions {
  std::uint64_t seed = 20240611;
  int matrixInstances = 1000;
  int jacobianInstances = 100;
  int fluxInstances = 500;
  /// Replaceable for defect-injection tests.
  AbarAssembly abar = [](const SpeciesSystem& s, const Vector& v) { return mat_Abar(s, v); };
};

/// Random system with n species and off-diagonal coefficients in [0.05, 2].
SpeciesSystem random_system(std::mt19937_64& rng, int n);
/// Uniform sample of the open simplex with every component >= lo.
Vector random_composition(std::mt19937_64& rng, int n, double lo = 0.0);

PropertyResult check_abar_psd(const PropertyOptions& opt);         // M^{-1} Abar symmetric PSD
/// The two upper bounds are sampled on {v > 0, <1,v> <= 1}; on the whole cube
/// (0,1]^n they can fail.
PropertyResult check_abar_upper_bound(const PropertyOptions& opt); // 2 cbar M^{-1} - M^{-1} Abar PSD
PropertyResult check_identity(const PropertyOptions& opt);         // A = c* <1,v> I - c* C + Abar, v >= 0
PropertyResult check_newid(const PropertyOptions& opt);            // A = c* I - c* C + Abar on the simplex
PropertyResult check_abar_kernel_range(const PropertyOptions& opt);
PropertyResult check_a_column_sums(const PropertyOptions& opt);
PropertyResult check_a_rank(const PropertyOptions& opt);
PropertyResult check_b_lower_bound(const PropertyOptions& opt);    // B symmetric, lambda_min >= c*
PropertyResult check_b_inverse_bound(const PropertyOptions& opt);  // B^{-1} - M/(c* + 2 cbar) PSD
PropertyResult check_jacobian_fd(const PropertyOptions& opt);
PropertyResult check_flux_equivalence(const PropertyOptions& opt);

std::vector<PropertyResult> run_property_suite(const PropertyOptions& opt);

/// check.csv: property,instances,failures,worst,tolerance,pass
void write_property_report(const std::filesystem::path& path, const std::vector<PropertyResult>& results);

}  // namespace msfv
