#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "snls/coefficients.hpp"
#include "snls/control_grid.hpp"
#include "snls/dynamics.hpp"
#include "snls/levy.hpp"
#include "snls/spectral.hpp"

namespace snls {

/// Carries every violation found during validation, not just the first.
struct ConfigError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ConfigError(std::vector<std::string> v);
};

/// Flat experiment description parsed from sectioned key = value text.
/// Fields default to the standard desk-scale fixture; builders hand out the
/// validated domain objects.
struct ExperimentConfig {
  // [grid]
  int dim = 1;
  int n = 256;
  double length = 40.0;

  // [coefficients]
  double lambda = 1.0;
  double sigma = 1.0;
  int channels = 1;
  Profile profile = Profile::Saturating;
  double rho = 1.0;

  // [measure]  (discrete atoms by default, optional radial density)
  std::vector<double> atom_components{0.25, -0.25, 0.75, -0.75};  // `channels` per atom
  std::vector<double> weights{0.5, 0.5, 0.5, 0.5};
  bool radial = false;
  double radial_c = 1.0;
  double radial_alpha = 0.5;
  double radial_rmin = 0.1;
  double radial_rmax = 1.0;

  // [initial]  (centered Gaussian profile)
  double amplitude = 0.5;
  double width = 3.0;

  // [solver]
  double dt = 1e-3;
  int snapshot_stride = 50;
  bool dealias = false;
  double blowup_guard = 1e6;
  int yosida_substeps = 4;
  std::vector<double> mu_list{10.0, 100.0, 1000.0, 10000.0};

  // [control]
  int control_bins = 4;
  int control_columns = 1;
  std::vector<double> control_values;  // empty: unit tilt everywhere

  // [experiment]
  double horizon = 1.0;
  std::vector<double> eps_list{0.1};
  double delta = 0.2;
  int samples = 100;
  double level = 0.1;
  std::vector<double> scales{2.0, 4.0, 8.0, 16.0};
  std::vector<int> meshes{8, 16, 32, 64, 128, 256};
  int wz_paths = 20;

  std::uint64_t seed = 1;
  int workers = 1;

  // domain-object builders (config must already be validated)
  std::shared_ptr<const SpectralGrid> make_grid() const;
  NonlinearitySpec make_spec() const;
  SaturableFamily make_family() const;
  LevyMeasure make_measure() const;
  SolverConfig make_solver() const;
  Control make_control() const;
  ComplexField make_initial(const std::shared_ptr<const SpectralGrid>& grid) const;
};

/// Parses and validates; throws ConfigError listing every violation with its
/// section.key path.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Sectioned text with every field spelled out; parses back to the same
/// config.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace snls
