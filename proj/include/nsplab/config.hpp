#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nsplab/fluid_model.hpp"
#include "nsplab/noise.hpp"
#include "nsplab/solvers.hpp"

namespace nsp {

enum class KappaRule { EpsScaled, Fixed };  // kappa = eps^(2 delta beta / 5) or the configured kappa

// Full experiment parameterization. Every field maps to one key of the flat config file
// (see config_keys()); params.epsilon is a placeholder overwritten per sweep point.
struct RunConfig {
  int n = 32;
  double L = 6.283185307179586;
  PhysParams params;
  std::vector<double> epsilon_list{0.1, 0.07071067811865475, 0.05, 0.035355339059327376, 0.025};
  double T = 0.5;
  double dt_fraction = 0.5;  // dt = dt_fraction * eps^(beta+1) / omega_max at the smallest eps
  Splitting splitting = Splitting::AcousticExponential;
  bool dealias = true;
  double cfl = 0.5;
  int max_retries = 5;
  bool noise = true;
  NoiseSpec noise_spec;
  int paths = 8;
  KappaRule kappa_rule = KappaRule::EpsScaled;
  double kappa = 0.5;  // used by the fixed rule and by the fixed-kappa companion metric
  std::uint64_t seed = 1;
  std::string output_dir = "nsplab_out";
  double M = 1.0;  // ||sigma0||_inf
  InitialDataOptions initial;
  int threads = 1;

  // Throws InvalidArgument on a violated invariant.
  void validate() const;
  PhysParams params_for(double epsilon) const;
  // kappa of the mollified gradient-part metric at this eps.
  double kappa_for(double epsilon) const;
};

// Keys in serialization order.
const std::vector<std::string>& config_keys();

// Parses flat `key = value` text ('#' starts a comment). Unknown or repeated keys and
// malformed values are errors (InvalidArgument naming the line). Missing keys keep defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const RunConfig& cfg);

// Environment variable naming the root directory for relative output_dir values.
constexpr const char* kOutputRootEnv = "NSPLAB_OUTPUT_ROOT";
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

}  // namespace nsp
