#include "bernquant/config.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "bernquant/errors.h"
#include "bernquant/tensor_io.h"

namespace bernquant {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ValidationError("config." + field + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& prefix,
                    const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) fail(prefix + key, "unknown field");
}

double get_number(const json& obj, const std::string& key, const std::string& field) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(field, "expected a number, got " + v.dump());
  return v.get<double>();
}

long long get_integer(const json& obj, const std::string& key, const std::string& field) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(field, "expected an integer, got " + v.dump());
  return v.get<long long>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& field) {
  const json& v = obj.at(key);
  if (!v.is_string()) fail(field, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

void check_sample_shape(const Config& c) {
  const Tensor t = load_tensor(c.function.sample_file);
  const std::size_t expected_rank = static_cast<std::size_t>(c.d);
  const std::string want =
      c.n_values.empty()
          ? "a cube of rank " + std::to_string(c.d)
          : "(n+1)^d = " + std::to_string(c.n_values[0] + 1) + "^" + std::to_string(c.d);
  bool ok = t.rank() == expected_rank && t.is_cube();
  if (ok && !c.n_values.empty())
    ok = t.extent(0) == static_cast<std::size_t>(c.n_values[0] + 1);
  if (!ok) {
    std::string got;
    for (std::size_t e : t.extents()) got += (got.empty() ? "" : "x") + std::to_string(e);
    fail("function.sample_file", "tensor has shape " + got + ", expected " + want);
  }
}

}  // namespace

const char* region_name(Region r) {
  return r == Region::kInterior ? "interior" : "full";
}

Region parse_region(const std::string& name) {
  if (name == "interior") return Region::kInterior;
  if (name == "full") return Region::kFull;
  throw ValidationError("region must be 'interior' or 'full', got '" + name + "'");
}

int default_grid_resolution(int d) { return d <= 2 ? 401 : 51; }

void validate_config(Config& c) {
  if (c.schema_version != 1)
    fail("schema_version", "unsupported version " + std::to_string(c.schema_version));
  if (c.max_d < 1) fail("caps.max_d", "must be >= 1");
  if (c.d < 1 || c.d > c.max_d)
    fail("d", "must lie in [1, " + std::to_string(c.max_d) + "], got " + std::to_string(c.d));
  if (c.s < 1) fail("s", "must be >= 1, got " + std::to_string(c.s));
  if (!(c.mu > 0.0 && c.mu < 1.0)) fail("mu", "must lie in (0,1), got " + json(c.mu).dump());
  if (c.ell < 1 || c.ell > c.d)
    fail("ell", "must lie in [1, d], got " + std::to_string(c.ell));
  if (c.activation != "quad" && c.activation != "relu")
    fail("activation", "must be 'quad' or 'relu', got '" + c.activation + "'");
  if (c.eps && !(*c.eps > 0.0 && *c.eps < 1.0)) fail("eps", "must lie in (0,1)");
  if (c.grid_resolution < 2) fail("grid_resolution", "must be >= 2");
  if (c.max_outputs < 1) fail("caps.max_outputs", "must be >= 1");
  if (!(c.u_bound > 0.0)) fail("caps.u_bound", "must be positive");
  if (!(c.eval_budget > 0.0)) fail("caps.eval_budget", "must be positive");
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (c.n_values[i] < 1) fail("n", "degrees must be >= 1");
    if (i > 0 && c.n_values[i] <= c.n_values[i - 1])
      fail("n_sweep", "must be strictly increasing");
  }
  const bool has_builtin = !c.function.builtin.empty();
  const bool has_samples = !c.function.sample_file.empty();
  if (has_builtin == has_samples)
    fail("function", "exactly one of 'builtin' and 'sample_file' is required");
  if (has_builtin) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), c.function.builtin) == names.end())
      fail("function.builtin", "unknown function '" + c.function.builtin + "'");
    if (!std::isfinite(c.function.params.scale)) fail("function.scale", "must be finite");
    if (c.n_values.empty()) fail("n", "one of 'n' and 'n_sweep' is required");
  } else {
    if (c.n_values.size() > 1)
      fail("n_sweep", "a sample file fixes a single degree");
    check_sample_shape(c);
    if (c.n_values.empty())
      c.n_values = {load_tensor(c.function.sample_file).degree()};
  }
}

Config parse_config_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  reject_unknown(j, "", {"schema_version", "function", "d", "s", "mu", "n", "n_sweep",
                         "ell", "activation", "eps", "grid_resolution", "region",
                         "output_dir", "seed", "caps"});
  Config c;
  if (j.contains("schema_version"))
    c.schema_version = static_cast<int>(get_integer(j, "schema_version", "schema_version"));

  if (!j.contains("function")) fail("function", "missing");
  const json& fn = j.at("function");
  if (!fn.is_object()) fail("function", "expected an object");
  reject_unknown(fn, "function.", {"builtin", "scale", "freq", "width", "sample_file"});
  if (fn.contains("builtin")) c.function.builtin = get_string(fn, "builtin", "function.builtin");
  if (fn.contains("scale")) c.function.params.scale = get_number(fn, "scale", "function.scale");
  if (fn.contains("freq")) c.function.params.freq = get_number(fn, "freq", "function.freq");
  if (fn.contains("width")) c.function.params.width = get_number(fn, "width", "function.width");
  if (fn.contains("sample_file")) {
    std::filesystem::path p = get_string(fn, "sample_file", "function.sample_file");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.function.sample_file = p.string();
  }

  if (j.contains("d")) c.d = static_cast<int>(get_integer(j, "d", "d"));
  if (j.contains("s")) c.s = static_cast<int>(get_integer(j, "s", "s"));
  if (j.contains("mu")) c.mu = get_number(j, "mu", "mu");
  if (j.contains("n") && j.contains("n_sweep")) fail("n", "give either 'n' or 'n_sweep', not both");
  if (j.contains("n")) c.n_values = {static_cast<int>(get_integer(j, "n", "n"))};
  if (j.contains("n_sweep")) {
    const json& sw = j.at("n_sweep");
    if (!sw.is_array() || sw.empty()) fail("n_sweep", "expected a non-empty array");
    for (const auto& v : sw) {
      if (!v.is_number_integer()) fail("n_sweep", "entries must be integers");
      c.n_values.push_back(v.get<int>());
    }
  }
  if (j.contains("ell")) c.ell = static_cast<int>(get_integer(j, "ell", "ell"));
  if (j.contains("activation")) c.activation = get_string(j, "activation", "activation");
  if (j.contains("eps")) c.eps = get_number(j, "eps", "eps");
  if (j.contains("region")) {
    const std::string r = get_string(j, "region", "region");
    if (r != "interior" && r != "full") fail("region", "must be 'interior' or 'full', got '" + r + "'");
    c.region = parse_region(r);
  }
  if (j.contains("output_dir")) c.output_dir = get_string(j, "output_dir", "output_dir");
  if (j.contains("seed")) {
    const long long seed = get_integer(j, "seed", "seed");
    if (seed < 0) fail("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("caps")) {
    const json& caps = j.at("caps");
    if (!caps.is_object()) fail("caps", "expected an object");
    reject_unknown(caps, "caps.", {"max_outputs", "max_d", "u_bound", "eval_budget"});
    if (caps.contains("max_outputs")) c.max_outputs = get_integer(caps, "max_outputs", "caps.max_outputs");
    if (caps.contains("max_d")) c.max_d = static_cast<int>(get_integer(caps, "max_d", "caps.max_d"));
    if (caps.contains("u_bound")) c.u_bound = get_number(caps, "u_bound", "caps.u_bound");
    if (caps.contains("eval_budget")) c.eval_budget = get_number(caps, "eval_budget", "caps.eval_budget");
  }
  c.grid_resolution = j.contains("grid_resolution")
                          ? static_cast<int>(get_integer(j, "grid_resolution", "grid_resolution"))
                          : default_grid_resolution(c.d);
  validate_config(c);
  return c;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config_json(j, dir.empty() ? "." : dir.string());
}

json config_to_json(const Config& c) {
  json fn = json::object();
  if (!c.function.builtin.empty()) {
    fn["builtin"] = c.function.builtin;
    fn["scale"] = c.function.params.scale;
    fn["freq"] = c.function.params.freq;
    fn["width"] = c.function.params.width;
  } else {
    fn["sample_file"] = c.function.sample_file;
  }
  json j = {{"schema_version", c.schema_version},
            {"function", fn},
            {"d", c.d},
            {"s", c.s},
            {"mu", c.mu},
            {"ell", c.ell},
            {"activation", c.activation},
            {"grid_resolution", c.grid_resolution},
            {"region", region_name(c.region)},
            {"output_dir", c.output_dir},
            {"seed", c.seed},
            {"caps",
             {{"max_outputs", c.max_outputs},
              {"max_d", c.max_d},
              {"u_bound", c.u_bound},
              {"eval_budget", c.eval_budget}}}};
  if (c.n_values.size() == 1)
    j["n"] = c.n_values[0];
  else
    j["n_sweep"] = c.n_values;
  if (c.eps) j["eps"] = *c.eps;
  return j;
}

TargetFunction make_target(const Config& c) {
  if (!c.function.builtin.empty())
    return make_builtin(c.function.builtin, c.d, c.function.params);
  const Tensor t = load_tensor(c.function.sample_file);
  return from_samples(GridSamples{t}, std::filesystem::path(c.function.sample_file).filename().string());
}

}  // namespace bernquant
