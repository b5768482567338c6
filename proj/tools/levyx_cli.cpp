// levyx command line: price, validate, convergence.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include "levyx/gaussian_reference.hpp"
#include "levyx/mc_oracle.hpp"
#include "levyx/spec_io.hpp"
#include "levyx/validation.hpp"

namespace {

using levyx::Method;
using nlohmann::json;

enum Exit { kOk = 0, kValidateFailed = 1, kSpecError = 2, kPricingError = 3, kUnsupported = 4 };

struct Overrides {
  std::optional<std::string> method;
  std::optional<double> tol;
  std::optional<std::int64_t> paths;
  std::optional<std::uint64_t> seed;
};

levyx::RunSpec load(const std::string& path, const Overrides& o) {
  levyx::RunSpec spec = levyx::load_run_spec(path);
  if (o.method) spec.pricing.method = levyx::parse_method(*o.method);
  if (o.tol) {
    if (*o.tol < 0) throw levyx::SpecError("--tol: must be non-negative");
    spec.pricing.tol = *o.tol;
  }
  if (o.paths) {
    if (*o.paths <= 0) throw levyx::SpecError("--paths: must be positive");
    spec.pricing.paths = *o.paths;
  }
  if (o.seed) spec.pricing.seed = *o.seed;
  return spec;
}

// Method/model pairings the engine refuses before doing any work.
void check_pairing(const levyx::RunSpec& spec) {
  bool gaussian = std::holds_alternative<levyx::GaussianParams>(spec.model.params);
  bool cgmy = std::holds_alternative<levyx::CgmyParams>(spec.model.params);
  if (spec.pricing.method == Method::closed_form && !gaussian) {
    throw levyx::UnsupportedModel("closed_form pricing needs the gaussian model");
  }
  if (spec.pricing.method == Method::mc && cgmy) {
    throw levyx::UnsupportedModel("Monte Carlo supports the gaussian and nig models only");
  }
}

levyx::PricingOptions engine_options(const levyx::RunSpec& spec) {
  levyx::PricingOptions o;
  o.tol = spec.pricing.tol;
  return o;
}

json price_report(const levyx::RunSpec& spec) {
  check_pairing(spec);
  levyx::LevyModel model = spec.model.build();
  json out;
  out["method"] = levyx::method_name(spec.pricing.method);
  out["model"] = levyx::to_json(spec.model);
  out["contract"] = levyx::to_json(spec.contract);
  switch (spec.pricing.method) {
    case Method::fourier: {
      levyx::PriceResult p = levyx::price_contract(spec.contract, model, spec.spot, engine_options(spec));
      out["price"] = p.value;
      out["error_estimate"] = p.quadrature_error;
      const auto& w = p.offsets_used.omega;
      out["diagnostics"] = {{"dimensions", p.n},
                            {"evaluations", p.evaluations},
                            {"offsets", std::vector<double>(w.data(), w.data() + w.size())}};
      break;
    }
    case Method::mc: {
      levyx::MCResult r = levyx::mc_price(spec.contract, model, spec.spot, spec.pricing.paths,
                                          spec.pricing.seed);
      out["price"] = r.estimate;
      out["stderr"] = r.std_error;
      out["diagnostics"] = {{"paths", r.n_paths}, {"seed", r.seed}};
      break;
    }
    case Method::closed_form: {
      // an Esscher-tilted Gaussian model has the same sigma, so historic_drift
      // does not change the price
      double sigma = std::get<levyx::GaussianParams>(spec.model.params).sigma;
      out["price"] = levyx::closed_form_price(spec.contract, sigma, spec.model.r, spec.spot);
      out["error_estimate"] = 0.0;
      break;
    }
  }
  return out;
}

// Runs body and maps failures to exit codes; messages go to stderr.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const levyx::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  } catch (const levyx::UnsupportedModel& e) {
    std::cerr << e.what() << "\n";
    return kUnsupported;
  } catch (const levyx::UnsupportedContract& e) {
    std::cerr << e.what() << "\n";
    return kUnsupported;
  } catch (const levyx::NestingTooDeep& e) {
    std::cerr << e.what() << "\n";
    return kUnsupported;
  } catch (const levyx::Error& e) {
    std::cerr << e.what() << "\n";
    return kPricingError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPricingError;
  }
}

int cmd_price(const std::string& path, const Overrides& o) {
  return guarded([&] {
    levyx::RunSpec spec = load(path, o);
    json report = price_report(spec);
    std::cout << report.dump(2) << "\n";
    return int(kOk);
  });
}

int cmd_validate(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = levyx::suite_names();
  } else {
    names = {suite};
  }
  for (const auto& n : names) {
    if (std::find(levyx::suite_names().begin(), levyx::suite_names().end(), n) ==
        levyx::suite_names().end()) {
      std::cerr << "error: unknown suite '" << suite << "'\n";
      return kSpecError;
    }
  }
  json reports = json::array();
  bool ok = true;
  for (const auto& n : names) {
    levyx::SuiteReport r = levyx::run_suite(n);
    std::cerr << n << ": " << r.passed << "/" << r.cases << " passed\n";
    if (!r.ok()) {
      if (ok && !r.first_failure.is_null())
        std::cerr << "first failing case: " << r.first_failure.dump() << "\n";
      ok = false;
    }
    reports.push_back(r.to_json());
  }
  std::cout << (names.size() == 1 ? reports[0] : reports).dump(2) << "\n";
  return ok ? kOk : kValidateFailed;
}

int cmd_convergence(const std::string& path, const std::string& axis, const Overrides& o) {
  return guarded([&] {
    levyx::RunSpec spec = load(path, o);
    if (axis == "paths") {
      spec.pricing.method = Method::mc;
    } else if (axis == "grid") {
      spec.pricing.method = Method::fourier;
    } else {
      throw levyx::SpecError("--axis: expected grid or paths");
    }
    check_pairing(spec);
    levyx::LevyModel model = spec.model.build();
    std::string table = "resolution,price,error,wall_time_ms\n";
    auto row = [&](long long resolution, double price, double error, double ms) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%lld,%.15g,%.6g,%.3f\n", resolution, price, error, ms);
      table += buf;
    };
    using clock = std::chrono::steady_clock;
    if (axis == "paths") {
      for (std::int64_t n = 10'000; n <= 1'280'000; n *= 2) {
        auto start = clock::now();
        levyx::MCResult r = levyx::mc_price(spec.contract, model, spec.spot, n, spec.pricing.seed);
        double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        row(n, r.estimate, r.std_error, ms);
      }
    } else {
      levyx::PricingOptions options = engine_options(spec);
      for (int panels = 16; panels <= (1 << 14); panels *= 2) {
        options.fixed_panels = panels;
        auto start = clock::now();
        levyx::PriceResult p;
        try {
          p = levyx::price_contract(spec.contract, model, spec.spot, options);
        } catch (const levyx::NoConvergence&) {
          break;  // the next grid exceeds the evaluation budget
        }
        double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        row(panels, p.value, p.quadrature_error, ms);
        // below this the estimate is rounding noise
        if (p.quadrature_error <= 1e-13 * std::max(1.0, std::abs(p.value))) break;
      }
    }
    std::cout << table;
    return int(kOk);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exotic option pricing under Levy models by contour integration"};
  app.require_subcommand(1);

  Overrides price_o, conv_o;
  std::string price_spec, conv_spec, axis, suite;

  auto* price = app.add_subcommand("price", "Price the contract described by a spec file");
  price->add_option("--spec", price_spec, "JSON spec file")->required();
  price->add_option("--method", price_o.method, "fourier, mc or closed_form");
  price->add_option("--tol", price_o.tol, "Quadrature tolerance");
  price->add_option("--paths", price_o.paths, "Monte Carlo paths");
  price->add_option("--seed", price_o.seed, "Monte Carlo seed");

  auto* validate = app.add_subcommand("validate", "Run a validation suite");
  validate->add_option("suite", suite, "lemma1, gaussian, parity, mc, offsets, limits, "
                                       "asian-limit, emm, linearity or all")
      ->required();

  auto* convergence = app.add_subcommand("convergence", "Price at doubling resolutions (CSV)");
  convergence->add_option("--spec", conv_spec, "JSON spec file")->required();
  convergence->add_option("--axis", axis, "grid or paths")->required();
  convergence->add_option("--tol", conv_o.tol, "Quadrature tolerance");
  convergence->add_option("--seed", conv_o.seed, "Monte Carlo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kSpecError;
  }

  if (price->parsed()) return cmd_price(price_spec, price_o);
  if (validate->parsed()) return cmd_validate(suite);
  return cmd_convergence(conv_spec, axis, conv_o);
}
