#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bernquant/functions.h"
#include "bernquant/quad_builder.h"

namespace bernquant {

enum class Region {
  kInterior,  // [1/4, 3/4]^d, where the error envelope is bounded
  kFull,      // [0, 1]^d
};

const char* region_name(Region r);
Region parse_region(const std::string& name);

struct FunctionConfig {
  std::string builtin;      // one of builtin_names(), or empty
  BuiltinParams params;
  std::string sample_file;  // tensor file of f(k/n), or empty
};

struct Config {
  int schema_version = 1;
  FunctionConfig function;
  int d = 1;
  int s = 2;
  double mu = 0.5;
  std::vector<int> n_values;  // a single n or a strictly increasing sweep
  int ell = 1;
  std::string activation = "quad";  // "quad" or "relu"
  std::optional<double> eps;        // ReLU accuracy override
  int grid_resolution = 401;
  Region region = Region::kInterior;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  long long max_outputs = kDefaultOutputCap;
  int max_d = 4;
  double u_bound = 50.0;
  // Upper bound on (nodes + edges) x evaluation points for one network sweep.
  double eval_budget = 2e10;
};

// Default grid points per axis: 401 for d <= 2, 51 otherwise.
int default_grid_resolution(int d);

// Parses and validates; every problem is reported as a ValidationError whose
// message names the offending field. Relative sample-file paths are resolved
// against `base_dir`.
Config parse_config_json(const nlohmann::json& j, const std::string& base_dir = ".");
Config parse_config(const std::string& path);

// Re-checks the cross-field constraints (after command-line overrides).
void validate_config(Config& c);

nlohmann::json config_to_json(const Config& c);

// The configured target function; sampled functions are loaded from file.
TargetFunction make_target(const Config& c);

}  // namespace bernquant
