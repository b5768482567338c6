#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/spec_io.hpp"

using namespace levyx;
using nlohmann::json;

namespace {

const std::filesystem::path kData = LEVYX_TEST_DATA;

std::string field_error(const json& j) {
  try {
    parse_run_spec(j);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

json base_spec() {
  return json::parse(R"({
    "model": {"kind": "gaussian", "params": {"sigma": 0.2}, "r": 0.05},
    "spot": 100,
    "contract": {"type": "forward_start", "t1": 0.5, "t2": 1.0}
  })");
}

}  // namespace

TEST_CASE("every fixture round-trips") {
  for (const auto& entry : std::filesystem::directory_iterator(kData)) {
    if (entry.path().filename() == "bad_field.json") continue;
    RunSpec spec = load_run_spec(entry.path().string());
    json once = to_json(spec);
    json twice = to_json(parse_run_spec(once));
    CHECK_MESSAGE(once == twice, entry.path().filename().string());
  }
}

TEST_CASE("all contract types round-trip") {
  std::vector<ContractSpec> contracts = {
      ForwardStart{0.1, 0.5, 1.0, -1},
      AsianGeometric{{0.0, {0.5, 1.0}}, 95.0, 1, {1.0, 2.0}},
      AsianContinuous{0.0, 0.2, 1.0, 100.0, -1},
      LookbackFixed{{0.0, {0.5, 1.0}}, 100.0, -1},
      Chooser{0.0, 0.5, 1.0, 100.0},
      Compound{0.0, {{0.5, 4.0, -1}, {1.0, 100.0, 1}}},
      BarrierDownOutCall{{0.0, {0.5, 1.0}}, 80.0, 100.0},
  };
  for (const auto& c : contracts) {
    json j = base_spec();
    j["contract"] = to_json(c);
    CHECK(to_json(parse_run_spec(j)) == to_json(parse_run_spec(to_json(parse_run_spec(j)))));
    CHECK(to_json(parse_run_spec(j))["contract"] == to_json(c));
  }
}

TEST_CASE("output keys are sorted") {
  std::string text = to_json(parse_run_spec(base_spec())).dump();
  CHECK(text.find("\"contract\"") < text.find("\"model\""));
  CHECK(text.find("\"model\"") < text.find("\"pricing\""));
  CHECK(text.find("\"pricing\"") < text.find("\"spot\""));
}

TEST_CASE("errors name the field") {
  json j = base_spec();
  j["model"]["params"]["sigma"] = "wide";
  CHECK(field_error(j).find("model.params.sigma") != std::string::npos);

  j = base_spec();
  j["contract"].erase("t1");
  CHECK(field_error(j).find("contract.t1") != std::string::npos);

  j = base_spec();
  j["contract"]["type"] = "rainbow";
  CHECK(field_error(j).find("contract.type") != std::string::npos);

  j = base_spec();
  j["pricing"] = {{"method", "lattice"}};
  CHECK(field_error(j).find("pricing.method") != std::string::npos);

  j = base_spec();
  j["contract"] = {{"type", "compound"}, {"legs", {{{"expiry", 1.0}, {"strike", 100}, {"w", 2}}}}};
  CHECK(field_error(j).find("contract.legs[0].w") != std::string::npos);

  j = base_spec();
  j.erase("spot");
  CHECK(field_error(j).find("spot") != std::string::npos);
}

TEST_CASE("historic drift builds a risk-neutral model") {
  json j = base_spec();
  j["model"]["historic_drift"] = 0.1;
  RunSpec s = parse_run_spec(j);
  LevyModel m = s.model.build();
  CHECK(m.emm_residual() < 1e-12);
  CHECK(std::abs(m.mu() - (0.05 - 0.02)) < 1e-12);
}
