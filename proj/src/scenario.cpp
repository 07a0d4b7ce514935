#include "pcrbtrack/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace pcrbtrack {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

DerivedConstants derive_constants(const SystemParams& sys) {
  const double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
  DerivedConstants d;
  d.beta_r = sys.lambda * sys.lambda * sys.eps_rcs / (64.0 * pi3);
  d.gamma_r = static_cast<double>(sys.Nt) * static_cast<double>(sys.Nr) * sys.Pa * sys.Nsym *
              d.beta_r / sys.sigma2;
  return d;
}

namespace {

const char* convention_name(PcrbConvention c) {
  return c == PcrbConvention::kMatrixConsistent ? "matrix" : "swapped";
}

// One accessor per config key. Reads and writes go through the same table so
// the serializer can never drift from the parser.
struct Field {
  std::function<void(Scenario&, const json&)> read;
  std::function<json(const Scenario&)> write;
};

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError("key '" + key + "' must be an integer");
}

template <class Get>
Field real_field(std::string key, Get get) {
  return Field{[key, get](Scenario& s, const json& v) { get(s) = as_double(v, key); },
               [get](const Scenario& s) {
                 Scenario copy = s;
                 return json(get(copy));
               }};
}

template <class Get>
Field int_field(std::string key, Get get) {
  return Field{[key, get](Scenario& s, const json& v) {
                 const auto i = as_integer(v, key);
                 if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
                   throw ConfigError("key '" + key + "' out of integer range");
                 get(s) = static_cast<int>(i);
               },
               [get](const Scenario& s) {
                 Scenario copy = s;
                 return json(get(copy));
               }};
}

const std::map<std::string, Field>& field_table() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["P0"] = real_field("P0", [](Scenario& s) -> double& { return s.sys.P0; });
    t["Pi"] = real_field("Pi", [](Scenario& s) -> double& { return s.sys.Pi; });
    t["Utip"] = real_field("Utip", [](Scenario& s) -> double& { return s.sys.Utip; });
    t["vh"] = real_field("vh", [](Scenario& s) -> double& { return s.sys.vh; });
    t["chi"] = real_field("chi", [](Scenario& s) -> double& { return s.sys.chi; });
    t["Pa"] = real_field("Pa", [](Scenario& s) -> double& { return s.sys.Pa; });
    t["Nsym"] = real_field("Nsym", [](Scenario& s) -> double& { return s.sys.Nsym; });
    t["lambda"] = real_field("lambda", [](Scenario& s) -> double& { return s.sys.lambda; });
    t["sigma2"] = real_field("sigma2", [](Scenario& s) -> double& { return s.sys.sigma2; });
    t["Nt"] = int_field("Nt", [](Scenario& s) -> int& { return s.sys.Nt; });
    t["Nr"] = int_field("Nr", [](Scenario& s) -> int& { return s.sys.Nr; });
    t["eps_rcs"] = real_field("eps_rcs", [](Scenario& s) -> double& { return s.sys.eps_rcs; });
    t["a1"] = real_field("a1", [](Scenario& s) -> double& { return s.sys.a1; });
    t["a2"] = real_field("a2", [](Scenario& s) -> double& { return s.sys.a2; });
    t["a3"] = real_field("a3", [](Scenario& s) -> double& { return s.sys.a3; });
    t["H"] = real_field("H", [](Scenario& s) -> double& { return s.sys.H; });
    t["q_tilde"] = real_field("q_tilde", [](Scenario& s) -> double& { return s.sys.q_tilde; });

    t["x_I"] = real_field("x_I", [](Scenario& s) -> double& { return s.mission.x_I; });
    t["x_F"] = real_field("x_F", [](Scenario& s) -> double& { return s.mission.x_F; });
    t["N"] = int_field("N", [](Scenario& s) -> int& { return s.mission.N; });
    t["dT"] = real_field("dT", [](Scenario& s) -> double& { return s.mission.dT; });
    t["E_tot"] = real_field("E_tot", [](Scenario& s) -> double& { return s.mission.E_tot; });
    t["v_max"] = real_field("v_max", [](Scenario& s) -> double& { return s.mission.v_max; });
    t["alpha"] = real_field("alpha", [](Scenario& s) -> double& { return s.mission.alpha; });
    t["v_T0"] = real_field("v_T0", [](Scenario& s) -> double& { return s.mission.v_T0; });
    t["target_x0"] =
        real_field("target_x0", [](Scenario& s) -> double& { return s.mission.target_x0; });

    t["M0_x"] = real_field("M0_x", [](Scenario& s) -> double& { return s.init.M0_x; });
    t["M0_v"] = real_field("M0_v", [](Scenario& s) -> double& { return s.init.M0_v; });
    t["perturb_x"] = real_field("perturb_x", [](Scenario& s) -> double& { return s.init.perturb_x; });
    t["perturb_v"] = real_field("perturb_v", [](Scenario& s) -> double& { return s.init.perturb_v; });
    t["seed"] = Field{[](Scenario& s, const json& v) {
                        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                          throw ConfigError("key 'seed' must be a non-negative integer");
                        s.init.seed = v.get<std::uint64_t>();
                      },
                      [](const Scenario& s) { return json(s.init.seed); }};

    t["pcrb_convention"] =
        Field{[](Scenario& s, const json& v) {
                if (!v.is_string()) throw ConfigError("key 'pcrb_convention' must be a string");
                const auto name = v.get<std::string>();
                if (name == "matrix")
                  s.planner.convention = PcrbConvention::kMatrixConsistent;
                else if (name == "swapped")
                  s.planner.convention = PcrbConvention::kSwapped;
                else
                  throw ConfigError("key 'pcrb_convention' must be \"matrix\" or \"swapped\"");
              },
              [](const Scenario& s) { return json(convention_name(s.planner.convention)); }};
    t["dinkelbach_tol"] = real_field(
        "dinkelbach_tol", [](Scenario& s) -> double& { return s.planner.dinkelbach_tol; });
    t["dinkelbach_max_iter"] = int_field(
        "dinkelbach_max_iter", [](Scenario& s) -> int& { return s.planner.dinkelbach_max_iter; });
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_positive(double v, const char* key) {
  require(std::isfinite(v) && v > 0.0, std::string("key '") + key + "' must be positive and finite");
}

}  // namespace

void validate(const Scenario& s) {
  const auto& p = s.sys;
  require_positive(p.P0, "P0");
  require_positive(p.Pi, "Pi");
  require_positive(p.Utip, "Utip");
  require_positive(p.vh, "vh");
  require_positive(p.chi, "chi");
  require_positive(p.Pa, "Pa");
  require_positive(p.Nsym, "Nsym");
  require_positive(p.lambda, "lambda");
  require_positive(p.sigma2, "sigma2");
  require(p.Nt >= 1, "key 'Nt' must be an integer >= 1");
  require(p.Nr >= 1, "key 'Nr' must be an integer >= 1");
  require_positive(p.eps_rcs, "eps_rcs");
  require_positive(p.a1, "a1");
  require_positive(p.a2, "a2");
  require_positive(p.a3, "a3");
  require_positive(p.H, "H");
  require_positive(p.q_tilde, "q_tilde");

  const auto& m = s.mission;
  require(std::isfinite(m.x_I), "key 'x_I' must be finite");
  require(std::isfinite(m.x_F), "key 'x_F' must be finite");
  require(std::isfinite(m.v_T0), "key 'v_T0' must be finite");
  require(std::isfinite(m.target_x0), "key 'target_x0' must be finite");
  require(m.N >= 2, "key 'N' must be >= 2");
  require_positive(m.dT, "dT");
  require_positive(m.E_tot, "E_tot");
  require_positive(m.v_max, "v_max");
  require(m.alpha >= 0.0 && m.alpha <= 1.0, "alpha out of range: key 'alpha' must lie in [0, 1]");
  require(std::abs(m.x_F - m.x_I) <= m.N * m.v_max * m.dT,
          "keys 'x_I'/'x_F': final location unreachable within N * v_max * dT");

  require_positive(s.init.M0_x, "M0_x");
  require_positive(s.init.M0_v, "M0_v");
  require_positive(s.init.perturb_x, "perturb_x");
  require_positive(s.init.perturb_v, "perturb_v");

  require_positive(s.planner.dinkelbach_tol, "dinkelbach_tol");
  require(s.planner.dinkelbach_max_iter >= 1, "key 'dinkelbach_max_iter' must be >= 1");
}

Scenario load_scenario(std::string_view config_text) {
  json doc;
  const bool blank = config_text.find_first_not_of(" \t\r\n") == std::string_view::npos;
  if (!blank) {
    try {
      doc = json::parse(config_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config document must be a flat JSON object");
  } else {
    doc = json::object();
  }

  // The dBm aliases convert to watts at load time; giving both spellings is ambiguous.
  if (doc.contains("Pa") && doc.contains("Pa_dBm"))
    throw ConfigError("keys 'Pa' and 'Pa_dBm' are mutually exclusive");
  if (doc.contains("sigma2") && doc.contains("sigma2_dBm"))
    throw ConfigError("keys 'sigma2' and 'sigma2_dBm' are mutually exclusive");

  Scenario s;
  const auto& table = field_table();
  for (const auto& [key, value] : doc.items()) {
    if (key == "Pa_dBm") {
      s.sys.Pa = dbm_to_watts(as_double(value, key));
      continue;
    }
    if (key == "sigma2_dBm") {
      s.sys.sigma2 = dbm_to_watts(as_double(value, key));
      continue;
    }
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
    it->second.read(s, value);
  }
  validate(s);
  s.derived = derive_constants(s.sys);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc = json::object();
  for (const auto& [key, field] : field_table()) doc[key] = field.write(s);
  return doc.dump(2) + "\n";
}

}  // namespace pcrbtrack
