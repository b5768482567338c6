#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "levyx/errors.hpp"
#include "levyx/exotic_contracts.hpp"

namespace levyx {

struct ModelSpec {
  ModelParams params;
  double r = 0.0;
  /// When set, the model is the Esscher transform of a physical model with
  /// this drift instead of the mean-corrected one.
  std::optional<double> historic_drift;

  LevyModel build() const;
};

enum class Method { fourier, mc, closed_form };

struct PricingSpec {
  Method method = Method::fourier;
  double tol = 0.0;  // 0 selects the engine default
  std::int64_t paths = 1'000'000;
  std::uint64_t seed = 1;
};

struct RunSpec {
  ModelSpec model;
  ContractSpec contract;
  double spot = 0.0;
  PricingSpec pricing;
};

const char* method_name(Method m);
Method parse_method(const std::string& name);

/// Throws SpecError naming the offending field.
RunSpec parse_run_spec(const nlohmann::json& j);
RunSpec load_run_spec(const std::string& path);

nlohmann::json to_json(const ModelSpec& m);
nlohmann::json to_json(const ContractSpec& c);
nlohmann::json to_json(const RunSpec& s);

}  // namespace levyx
