#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

#include "bernquant/config.h"
#include "bernquant/errors.h"
#include "bernquant/tensor_io.h"

using namespace bernquant;
using nlohmann::json;

namespace {

json minimal() { return {{"function", {{"builtin", "sine"}}}, {"n", 32}}; }

std::string error_of(const json& j, const std::string& base = ".") {
  try {
    parse_config_json(j, base);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const Config c = parse_config_json(minimal());
  CHECK(c.ell == 1);
  CHECK(c.region == Region::kInterior);
  CHECK(c.grid_resolution == 401);
  CHECK(c.d == 1);
  CHECK(c.s == 2);
  CHECK(c.mu == 0.5);
  CHECK(c.activation == "quad");
  CHECK(c.n_values == std::vector<int>{32});
  CHECK(c.function.params.scale == 1.0);
  auto j = minimal();
  j["d"] = 3;
  CHECK(parse_config_json(j).grid_resolution == 51);
}

TEST_CASE("field-level validation errors") {
  auto with = [](const std::string& key, json v) {
    json j = minimal();
    j[key] = v;
    return j;
  };
  CHECK(error_of(with("mu", 1.2)).find("config.mu") != std::string::npos);
  CHECK(error_of(with("mu", 0.0)).find("config.mu") != std::string::npos);
  CHECK(error_of(with("d", 5)).find("config.d") != std::string::npos);
  CHECK(error_of(with("s", "two")).find("config.s: expected an integer") != std::string::npos);
  CHECK(error_of(with("ell", 2)).find("config.ell") != std::string::npos);
  CHECK(error_of(with("activation", "tanh")).find("config.activation") != std::string::npos);
  CHECK(error_of(with("region", "edge")).find("config.region") != std::string::npos);
  CHECK(error_of(with("colour", 1)).find("config.colour: unknown field") != std::string::npos);
  CHECK(error_of(with("n_sweep", json::array({16, 8}))).find("config.n") != std::string::npos);
  CHECK(error_of(with("eps", 2.0)).find("config.eps") != std::string::npos);
  CHECK(error_of(with("seed", -1)).find("config.seed") != std::string::npos);
  CHECK(error_of(with("caps", {{"max_d", 2}, {"bogus", 1}})).find("config.caps.bogus") !=
        std::string::npos);
  json j = minimal();
  j["d"] = 5;
  j["caps"] = {{"max_d", 6}};
  CHECK(error_of(j).empty());
  j = minimal();
  j["function"]["builtin"] = "cosine";
  CHECK(error_of(j).find("config.function.builtin") != std::string::npos);
  j = minimal();
  j.erase("n");
  CHECK(error_of(j).find("config.n") != std::string::npos);
  CHECK(error_of(json::array()).find("top level") != std::string::npos);
}

TEST_CASE("sample files") {
  const auto dir = std::filesystem::temp_directory_path() / "bernquant_test_config";
  std::filesystem::create_directories(dir);
  save_tensor(Tensor::cube(8, 2, 0.25), (dir / "f.bqt").string());

  json j = {{"function", {{"sample_file", "f.bqt"}}}, {"d", 2}};
  Config c = parse_config_json(j, dir.string());
  CHECK(c.n_values == std::vector<int>{8});
  const TargetFunction f = make_target(c);
  CHECK(f.norms_estimated);
  CHECK(f(std::vector<double>{0.3, 0.6}) == doctest::Approx(0.25));

  j["n"] = 16;
  const std::string msg = error_of(j, dir.string());
  CHECK(msg.find("config.function.sample_file") != std::string::npos);
  CHECK(msg.find("(n+1)^d = 17^2") != std::string::npos);
  CHECK(msg.find("9x9") != std::string::npos);

  j.erase("n");
  j["d"] = 1;
  CHECK(error_of(j, dir.string()).find("expected a cube of rank 1") != std::string::npos);

  j["function"]["builtin"] = "sine";
  CHECK(error_of(j, dir.string()).find("exactly one") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config files and serialization") {
  const auto dir = std::filesystem::temp_directory_path() / "bernquant_test_config2";
  std::filesystem::create_directories(dir);
  json j = minimal();
  j["n_sweep"] = {16, 32, 64};
  j.erase("n");
  j["eps"] = 0.01;
  j["activation"] = "relu";
  j["seed"] = 7;
  j["function"]["scale"] = 0.4;
  {
    std::ofstream out(dir / "c.json");
    out << j.dump(2);
  }
  const Config c = parse_config((dir / "c.json").string());
  CHECK(c.n_values == std::vector<int>{16, 32, 64});
  CHECK(*c.eps == 0.01);
  CHECK(c.seed == 7);
  const Config back = parse_config_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(parse_config((dir / "bad.json").string()), ValidationError);
  CHECK_THROWS_AS(parse_config((dir / "none.json").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("regions") {
  CHECK(parse_region("full") == Region::kFull);
  CHECK(std::string(region_name(Region::kInterior)) == "interior");
  CHECK_THROWS_AS(parse_region("half"), ValidationError);
}
