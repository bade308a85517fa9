#pragma once

#include "ivlab/io.hpp"
#include "ivlab/spectrum.hpp"

namespace ivlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  enum class Kind { variation_identity, concentration, limit_formula, spectrum_index };
  Kind kind = Kind::variation_identity;
  Model model = Model::gl;
  TorusDomain domain;
  std::vector<Real> epsilons;
  std::vector<TorusDomain> grids;  // optional, one per ladder stage

  // vector-field family (named, deterministic given the seed)
  std::string field_family = "fourier";
  Real field_amplitude = 1.0;
  int field_max_mode = 2;

  Varifold gamma;
  SolveConfig solver;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  // variation_identity
  int states = 10;
  int probes = 5;
  Real tau = 1e-2;
  Real first_tol = 1e-3;
  Real second_tol = 5e-3;

  // concentration
  Real delta = 0.5;
  std::vector<Real> radii{0.05, 0.1, 0.2, 0.4};
  int degree = 1;

  // spectrum_index
  int count_p = 4;
  GaugeHandling gauge = GaugeHandling::projected;
  MassPairing pairing = MassPairing::eps_weighted;
  int extrude_sites = 16;
  Real extrude_period = 0.25;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 failed checks, 3 solver abort
  bool checks_passed = true;
  std::vector<std::string> files;
  std::string message;
};

RunResult run_experiment(const ExperimentConfig& cfg);

std::vector<std::string> list_experiments();
/// Human-readable description of a kind and its configuration schema; throws
/// ConfigError for unknown kinds.
std::string describe_experiment(const std::string& kind);

}  // namespace ivlab
