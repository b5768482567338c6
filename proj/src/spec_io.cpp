#include "levyx/spec_io.hpp"

#include <fstream>
#include <sstream>

namespace levyx {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw SpecError(field + ": " + what);
}

const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

double get_number_or(const json& j, const std::string& key, const std::string& path,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key, path);
}

int get_sign(const json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1))
    fail(join(path, key), "expected +1 or -1");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_array()) fail(join(path, key), "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

MonitoringSchedule get_schedule(const json& j, const std::string& path) {
  MonitoringSchedule s;
  s.t = get_number_or(j, "t", path, 0.0);
  s.dates = get_numbers(j, "dates", path);
  return s;
}

json schedule_fields(json out, const MonitoringSchedule& s) {
  out["t"] = s.t;
  out["dates"] = s.dates;
  return out;
}

ModelSpec parse_model(const json& j) {
  const std::string path = "model";
  ModelSpec m;
  const json& kind = member(j, "kind", path);
  if (!kind.is_string()) fail("model.kind", "expected a string");
  const json& params = member(j, "params", path);
  const std::string pp = "model.params";
  std::string k = kind.get<std::string>();
  if (k == "gaussian") {
    m.params = GaussianParams{get_number(params, "sigma", pp)};
  } else if (k == "nig") {
    m.params = NigParams{get_number(params, "alpha", pp), get_number(params, "beta", pp),
                         get_number(params, "delta", pp)};
  } else if (k == "cgmy") {
    m.params = CgmyParams{get_number(params, "c", pp), get_number(params, "g", pp),
                          get_number(params, "m", pp), get_number(params, "y", pp)};
  } else {
    fail("model.kind", "unknown model '" + k + "'");
  }
  m.r = get_number(j, "r", path);
  if (j.contains("historic_drift")) m.historic_drift = get_number(j, "historic_drift", path);
  return m;
}

ContractSpec parse_contract(const json& j) {
  const std::string path = "contract";
  const json& type = member(j, "type", path);
  if (!type.is_string()) fail("contract.type", "expected a string");
  std::string t = type.get<std::string>();

  if (t == "digital") {
    DigitalContract c;
    c.schedule = get_schedule(j, path);
    int m = c.schedule.size();
    auto gamma = get_numbers(j, "gamma", path);
    auto k_log = get_numbers(j, "k_log", path);
    const json& w = member(j, "w", path);
    const json& a = member(j, "a", path);
    if (gamma.size() != static_cast<std::size_t>(m)) fail("contract.gamma", "length must match dates");
    if (!w.is_array() || w.size() != k_log.size()) fail("contract.w", "length must match k_log");
    if (!a.is_array() || a.size() != k_log.size()) fail("contract.a", "one row per condition");
    int n = static_cast<int>(k_log.size());
    c.payoff.gamma = Eigen::Map<Eigen::VectorXd>(gamma.data(), m);
    c.payoff.k_log = Eigen::Map<Eigen::VectorXd>(k_log.data(), n);
    c.payoff.w.resize(n);
    c.payoff.a.resize(n, m);
    for (int i = 0; i < n; ++i) {
      std::string wi = "contract.w[" + std::to_string(i) + "]";
      if (!w[i].is_number_integer() || std::abs(w[i].get<int>()) != 1) fail(wi, "expected +1 or -1");
      c.payoff.w(i) = w[i].get<int>();
      std::string ai = "contract.a[" + std::to_string(i) + "]";
      if (!a[i].is_array() || a[i].size() != static_cast<std::size_t>(m))
        fail(ai, "length must match dates");
      for (int k = 0; k < m; ++k) {
        if (!a[i][k].is_number()) fail(ai + "[" + std::to_string(k) + "]", "expected a number");
        c.payoff.a(i, k) = a[i][k].get<double>();
      }
    }
    return c;
  }
  if (t == "forward_start") {
    return ForwardStart{get_number_or(j, "t", path, 0.0), get_number(j, "t1", path),
                        get_number(j, "t2", path), get_sign(j, "w", path, 1)};
  }
  if (t == "asian_geometric") {
    AsianGeometric c;
    c.schedule = get_schedule(j, path);
    c.strike = get_number(j, "strike", path);
    c.w = get_sign(j, "w", path, 1);
    if (j.contains("weights")) c.weights = get_numbers(j, "weights", path);
    return c;
  }
  if (t == "asian_continuous") {
    return AsianContinuous{get_number_or(j, "t", path, 0.0), get_number(j, "t_start", path),
                           get_number(j, "t_end", path), get_number(j, "strike", path),
                           get_sign(j, "w", path, 1)};
  }
  if (t == "lookback_fixed") {
    return LookbackFixed{get_schedule(j, path), get_number(j, "strike", path),
                         get_sign(j, "w", path, 1)};
  }
  if (t == "chooser") {
    return Chooser{get_number_or(j, "t", path, 0.0), get_number(j, "t1", path),
                   get_number(j, "t_expiry", path), get_number(j, "strike", path)};
  }
  if (t == "compound") {
    Compound c;
    c.t = get_number_or(j, "t", path, 0.0);
    const json& legs = member(j, "legs", path);
    if (!legs.is_array() || legs.empty()) fail("contract.legs", "expected a non-empty array");
    for (std::size_t i = 0; i < legs.size(); ++i) {
      std::string lp = "contract.legs[" + std::to_string(i) + "]";
      c.legs.push_back(CompoundLeg{get_number(legs[i], "expiry", lp),
                                   get_number(legs[i], "strike", lp),
                                   get_sign(legs[i], "w", lp, 1)});
    }
    return c;
  }
  if (t == "barrier_down_out_call") {
    return BarrierDownOutCall{get_schedule(j, path), get_number(j, "barrier", path),
                              get_number(j, "strike", path)};
  }
  fail("contract.type", "unknown contract '" + t + "'");
}

PricingSpec parse_pricing(const json& j) {
  const std::string path = "pricing";
  PricingSpec p;
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("method")) {
    if (!j["method"].is_string()) fail("pricing.method", "expected a string");
    try {
      p.method = parse_method(j["method"].get<std::string>());
    } catch (const SpecError&) {
      fail("pricing.method", "unknown method '" + j["method"].get<std::string>() + "'");
    }
  }
  p.tol = get_number_or(j, "tol", path, 0.0);
  if (p.tol < 0) fail("pricing.tol", "must be non-negative");
  if (j.contains("paths")) {
    if (!j["paths"].is_number_integer() || j["paths"].get<std::int64_t>() <= 0)
      fail("pricing.paths", "expected a positive integer");
    p.paths = j["paths"].get<std::int64_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("pricing.seed", "expected a non-negative integer");
    p.seed = j["seed"].get<std::uint64_t>();
  }
  return p;
}

}  // namespace

LevyModel ModelSpec::build() const {
  if (!historic_drift) return make_model(params, r);
  return esscher_calibrate(make_historic_model(params, *historic_drift, r), r).model;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::fourier: return "fourier";
    case Method::mc: return "mc";
    case Method::closed_form: return "closed_form";
  }
  return "";
}

Method parse_method(const std::string& name) {
  if (name == "fourier") return Method::fourier;
  if (name == "mc") return Method::mc;
  if (name == "closed_form") return Method::closed_form;
  throw SpecError("method: unknown method '" + name + "'");
}

RunSpec parse_run_spec(const json& j) {
  if (!j.is_object()) fail("(root)", "expected an object");
  RunSpec s;
  s.model = parse_model(member(j, "model", ""));
  s.contract = parse_contract(member(j, "contract", ""));
  s.spot = get_number(j, "spot", "");
  if (!(s.spot > 0)) fail("spot", "must be positive");
  if (j.contains("pricing")) s.pricing = parse_pricing(j["pricing"]);
  return s;
}

RunSpec load_run_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
  return parse_run_spec(j);
}

json to_json(const ModelSpec& m) {
  json out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianParams>) {
          out["kind"] = "gaussian";
          out["params"] = {{"sigma", p.sigma}};
        } else if constexpr (std::is_same_v<T, NigParams>) {
          out["kind"] = "nig";
          out["params"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta}};
        } else {
          out["kind"] = "cgmy";
          out["params"] = {{"c", p.c}, {"g", p.g}, {"m", p.m}, {"y", p.y}};
        }
      },
      m.params);
  out["r"] = m.r;
  if (m.historic_drift) out["historic_drift"] = *m.historic_drift;
  return out;
}

json to_json(const ContractSpec& c) {
  json out;
  out["type"] = contract_type_name(c);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DigitalContract>) {
          out = schedule_fields(out, x.schedule);
          const auto& p = x.payoff;
          out["gamma"] = std::vector<double>(p.gamma.data(), p.gamma.data() + p.gamma.size());
          out["k_log"] = std::vector<double>(p.k_log.data(), p.k_log.data() + p.k_log.size());
          out["w"] = std::vector<int>(p.w.data(), p.w.data() + p.w.size());
          json a = json::array();
          for (int i = 0; i < p.n(); ++i) {
            std::vector<double> row(p.m());
            for (int k = 0; k < p.m(); ++k) row[k] = p.a(i, k);
            a.push_back(row);
          }
          out["a"] = a;
        } else if constexpr (std::is_same_v<T, ForwardStart>) {
          out["t"] = x.t;
          out["t1"] = x.t1;
          out["t2"] = x.t2;
          out["w"] = x.w;
        } else if constexpr (std::is_same_v<T, AsianGeometric>) {
          out = schedule_fields(out, x.schedule);
          out["strike"] = x.strike;
          out["w"] = x.w;
          if (!x.weights.empty()) out["weights"] = x.weights;
        } else if constexpr (std::is_same_v<T, AsianContinuous>) {
          out["t"] = x.t;
          out["t_start"] = x.t_start;
          out["t_end"] = x.t_end;
          out["strike"] = x.strike;
          out["w"] = x.w;
        } else if constexpr (std::is_same_v<T, LookbackFixed>) {
          out = schedule_fields(out, x.schedule);
          out["strike"] = x.strike;
          out["w"] = x.w;
        } else if constexpr (std::is_same_v<T, Chooser>) {
          out["t"] = x.t;
          out["t1"] = x.t1;
          out["t_expiry"] = x.t_expiry;
          out["strike"] = x.strike;
        } else if constexpr (std::is_same_v<T, Compound>) {
          out["t"] = x.t;
          json legs = json::array();
          for (const auto& l : x.legs)
            legs.push_back({{"expiry", l.expiry}, {"strike", l.strike}, {"w", l.w}});
          out["legs"] = legs;
        } else {
          out = schedule_fields(out, x.schedule);
          out["barrier"] = x.barrier;
          out["strike"] = x.strike;
        }
      },
      c);
  return out;
}

json to_json(const RunSpec& s) {
  json out;
  out["model"] = to_json(s.model);
  out["contract"] = to_json(s.contract);
  out["spot"] = s.spot;
  out["pricing"] = {{"method", method_name(s.pricing.method)},
                    {"tol", s.pricing.tol},
                    {"paths", s.pricing.paths},
                    {"seed", s.pricing.seed}};
  return out;
}

}  // namespace levyx
