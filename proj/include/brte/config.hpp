#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "brte/kernel.hpp"
#include "brte/oracle.hpp"
#include "brte/transport.hpp"

namespace brte {

struct InitialCondition {
  std::string type = "uniform";  // uniform | gaussian_q | shell
  int band = 0;
  double amplitude = 1.0;
  double energy = 0.0;      // shell center
  double width = 0.1;       // shell energy width or gaussian_q width
  double anisotropy = 0.0;  // shell: odd-in-velocity admixture
  std::vector<double> center;  // gaussian_q center
};

struct EvolutionConfig {
  double dt = 0.0;
  double t_final = 0.0;
  TimeMethod method = TimeMethod::rk4;
  Stencil stencil = Stencil::upwind;
  int snapshot_every = 0;
  bool allow_cfl_violation = false;
  double rebuild_threshold = -1.0;
  InitialCondition initial;
};

struct UnitScales {
  std::string system = "internal";
  double energy = 1.0;
  double length = 1.0;
  double time = 1.0;
};

/// Parsed and validated run configuration. Unknown keys anywhere are errors.
struct RunConfig {
  uint64_t seed = 0;

  int dimension = 1;
  std::vector<RVec> basis;

  PeriodicPotential potential;
  CellVectorPotential a_static;
  RVec e_field;
  RVec b_field;

  CorrelationModel disorder;

  int bz_points = 1;
  double pw_cutoff = 0.0;
  int n_bands = 1;
  int spatial_points = 1;
  double box_length = 1.0;

  KernelOptions kernel;
  double window_radius = -1.0;  // <= 0: same as pw_cutoff

  EvolutionConfig evolution;
  OracleSettings oracle;
  bool has_oracle = false;

  UnitScales units;
  bool validate_include_oracle = true;

  nlohmann::json raw;
  std::string content_hash;
};

nlohmann::json load_json_file(const std::string& path);

/// Dotted-path override, value parsed as JSON when possible, else a string.
void apply_override(nlohmann::json& j, const std::string& key, const std::string& value);

RunConfig parse_config(const nlohmann::json& j);

std::string config_hash(const nlohmann::json& j);

}  // namespace brte
