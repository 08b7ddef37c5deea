#include "config.hpp"

#include <fstream>
#include <initializer_list>

namespace degen::cli {

namespace {

using njson = nlohmann::ordered_json;

void allow_keys(const njson& obj, const std::string& where,
                std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown key \"" + where + "." + it.key() + "\"");
  }
}

const njson* section(const njson& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) return nullptr;
  if (!it->is_object())
    throw ConfigError(std::string("key \"") + key + "\" must be an object");
  return &*it;
}

double get_num(const njson& obj, const char* k, double def, const std::string& where) {
  auto it = obj.find(k);
  if (it == obj.end()) return def;
  if (!it->is_number())
    throw ConfigError("key \"" + where + "." + k + "\" must be a number");
  return it->get<double>();
}

int get_int(const njson& obj, const char* k, int def, const std::string& where) {
  auto it = obj.find(k);
  if (it == obj.end()) return def;
  if (!it->is_number_integer())
    throw ConfigError("key \"" + where + "." + k + "\" must be an integer");
  return it->get<int>();
}

bool get_bool(const njson& obj, const char* k, bool def, const std::string& where) {
  auto it = obj.find(k);
  if (it == obj.end()) return def;
  if (!it->is_boolean())
    throw ConfigError("key \"" + where + "." + k + "\" must be a boolean");
  return it->get<bool>();
}

std::string get_enum(const njson& obj, const char* k, std::string def,
                     const std::string& where,
                     std::initializer_list<const char*> values) {
  auto it = obj.find(k);
  std::string v = def;
  if (it != obj.end()) {
    if (!it->is_string())
      throw ConfigError("key \"" + where + "." + k + "\" must be a string");
    v = it->get<std::string>();
  }
  for (const char* ok : values)
    if (v == ok) return v;
  std::string list;
  for (const char* ok : values) {
    if (!list.empty()) list += ", ";
    list += ok;
  }
  throw ConfigError("key \"" + where + "." + k + "\": unknown value \"" + v +
                    "\" (expected one of: " + list + ")");
}

std::array<double, 2> get_pair(const njson& obj, const char* k,
                               std::array<double, 2> def, const std::string& where) {
  auto it = obj.find(k);
  if (it == obj.end()) return def;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
      !(*it)[1].is_number())
    throw ConfigError("key \"" + where + "." + k + "\" must be [number, number]");
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  njson root;
  try {
    root = njson::parse(in);
  } catch (const njson::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  allow_keys(root, "", {"case", "operator", "domain", "grid", "data", "solver",
                        "perron", "verify", "transform"});

  RunConfig cfg;
  {
    auto it = root.find("case");
    if (it == root.end()) throw ConfigError("missing required key \"case\"");
    cfg.case_kind = get_enum(root, "case", "", "",
                             {"bvp", "obstacle", "perron-bvp", "perron-obstacle",
                              "transform-check", "verify"});
  }

  std::vector<std::string> violations;
  auto check = [&violations](bool ok, const std::string& msg) {
    if (!ok) violations.push_back(msg);
  };

  if (const njson* op = section(root, "operator")) {
    allow_keys(*op, "operator",
               {"kind", "sigma", "rho", "kappa", "theta", "r", "q", "gauge_sigma"});
    get_enum(*op, "kind", "heston", "operator", {"heston"});
    cfg.heston.sigma = get_num(*op, "sigma", cfg.heston.sigma, "operator");
    cfg.heston.rho = get_num(*op, "rho", cfg.heston.rho, "operator");
    cfg.heston.kappa = get_num(*op, "kappa", cfg.heston.kappa, "operator");
    cfg.heston.theta = get_num(*op, "theta", cfg.heston.theta, "operator");
    cfg.heston.r = get_num(*op, "r", cfg.heston.r, "operator");
    cfg.heston.q = get_num(*op, "q", cfg.heston.q, "operator");
    cfg.gauge_sigma = get_num(*op, "gauge_sigma", 0.0, "operator");
  }
  try {
    heston_coefficients(cfg.heston);
  } catch (const std::invalid_argument& e) {
    violations.push_back(e.what());
  }

  std::string dom_kind = "slab";
  std::array<double, 2> lo{-2.0, 0.0}, hi{2.0, 1.0};
  if (const njson* dm = section(root, "domain")) {
    allow_keys(*dm, "domain", {"kind", "lo", "hi"});
    dom_kind = get_enum(*dm, "kind", "slab", "domain", {"box", "slab", "half-ball-slab"});
    lo = get_pair(*dm, "lo", lo, "domain");
    hi = get_pair(*dm, "hi", hi, "domain");
  }
  check(lo[0] < hi[0] && lo[1] < hi[1], "domain: lo must be strictly under hi");
  if (dom_kind != "box" && lo[1] != 0.0)
    violations.push_back("domain: a degenerate bottom face requires lo[1] = 0");
  try {
    if (dom_kind == "box")
      cfg.dom = DomainSpec::box(lo[0], hi[0], lo[1], hi[1]);
    else if (dom_kind == "slab")
      cfg.dom = DomainSpec::slab(lo[0], hi[0], hi[1]);
    else
      cfg.dom = DomainSpec::half_ball_slab(lo[0], hi[0], hi[1]);
  } catch (const std::invalid_argument& e) {
    violations.push_back(e.what());
  }

  if (const njson* gr = section(root, "grid")) {
    allow_keys(*gr, "grid", {"n1", "n2", "stretch"});
    cfg.n1 = get_int(*gr, "n1", cfg.n1, "grid");
    cfg.n2 = get_int(*gr, "n2", cfg.n2, "grid");
    cfg.stretch = get_num(*gr, "stretch", cfg.stretch, "grid");
  }
  check(cfg.n1 >= 3 && cfg.n2 >= 3, "grid: n1 and n2 must be at least 3");
  check(cfg.stretch > 0.0, "grid: stretch must be positive");

  if (const njson* da = section(root, "data")) {
    allow_keys(*da, "data",
               {"f", "f_value", "g", "g_value", "psi", "psi_value", "payoff_kind",
                "strike"});
    cfg.f_kind = get_enum(*da, "f", cfg.f_kind, "data", {"zero", "constant", "smooth"});
    cfg.f_value = get_num(*da, "f_value", cfg.f_value, "data");
    cfg.g_kind = get_enum(*da, "g", cfg.g_kind, "data", {"zero", "constant", "payoff"});
    cfg.g_value = get_num(*da, "g_value", cfg.g_value, "data");
    cfg.psi_kind =
        get_enum(*da, "psi", cfg.psi_kind, "data", {"none", "constant", "payoff"});
    cfg.psi_value = get_num(*da, "psi_value", cfg.psi_value, "data");
    cfg.payoff_kind =
        get_enum(*da, "payoff_kind", cfg.payoff_kind, "data", {"put", "call"});
    cfg.strike = get_num(*da, "strike", cfg.strike, "data");
  }
  check(cfg.strike > 0.0, "data: strike must be positive");
  if (cfg.case_kind == "obstacle" || cfg.case_kind == "perron-obstacle")
    check(cfg.psi_kind != "none", "data: obstacle cases need data.psi");

  if (const njson* so = section(root, "solver")) {
    allow_keys(*so, "solver", {"method", "omega", "tol", "max_iter"});
    cfg.method = get_enum(*so, "method", cfg.method, "solver", {"direct", "sor"});
    cfg.omega = get_num(*so, "omega", cfg.omega, "solver");
    cfg.tol = get_num(*so, "tol", cfg.tol, "solver");
    cfg.max_iter = get_int(*so, "max_iter", cfg.max_iter, "solver");
  }
  check(cfg.omega > 0.0 && cfg.omega < 2.0, "solver: omega must lie in (0, 2)");
  check(cfg.tol > 0.0, "solver: tol must be positive");
  check(cfg.max_iter > 0, "solver: max_iter must be positive");

  if (const njson* pe = section(root, "perron")) {
    allow_keys(*pe, "perron",
               {"radius", "overlap", "tol", "max_sweeps", "lift_mode", "direction",
                "coloring", "gap_stop"});
    cfg.radius = get_int(*pe, "radius", cfg.radius, "perron");
    cfg.overlap = get_int(*pe, "overlap", cfg.overlap, "perron");
    cfg.sweep_tol = get_num(*pe, "tol", cfg.sweep_tol, "perron");
    cfg.max_sweeps = get_int(*pe, "max_sweeps", cfg.max_sweeps, "perron");
    cfg.lift_mode = get_enum(*pe, "lift_mode", cfg.lift_mode, "perron",
                             {"two-tier", "obstacle-everywhere"});
    cfg.direction = get_enum(*pe, "direction", cfg.direction, "perron", {"up", "down"});
    cfg.coloring = get_bool(*pe, "coloring", cfg.coloring, "perron");
    cfg.gap_stop = get_num(*pe, "gap_stop", cfg.gap_stop, "perron");
  }
  check(cfg.radius >= 2, "perron: radius must be at least 2");
  check(cfg.overlap >= 1, "perron: overlap must be at least 1");
  check(cfg.sweep_tol > 0.0, "perron: tol must be positive");
  check(cfg.max_sweeps > 0, "perron: max_sweeps must be positive");

  if (const njson* ve = section(root, "verify")) {
    allow_keys(*ve, "verify", {"inject_fault"});
    cfg.inject_fault = get_enum(*ve, "inject_fault", cfg.inject_fault, "verify",
                                {"none", "flip-degenerate-drift"});
  }

  if (const njson* tr = section(root, "transform")) {
    allow_keys(*tr, "transform", {"samples"});
    cfg.samples = get_int(*tr, "samples", cfg.samples, "transform");
  }
  check(cfg.samples > 0, "transform: samples must be positive");

  if (!violations.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }

  njson echo;
  echo["case"] = cfg.case_kind;
  echo["operator"] = {{"kind", "heston"},         {"sigma", cfg.heston.sigma},
                      {"rho", cfg.heston.rho},    {"kappa", cfg.heston.kappa},
                      {"theta", cfg.heston.theta}, {"r", cfg.heston.r},
                      {"q", cfg.heston.q},        {"gauge_sigma", cfg.gauge_sigma}};
  echo["domain"] = {{"kind", dom_kind}, {"lo", {lo[0], lo[1]}}, {"hi", {hi[0], hi[1]}}};
  echo["grid"] = {{"n1", cfg.n1}, {"n2", cfg.n2}, {"stretch", cfg.stretch}};
  echo["data"] = {{"f", cfg.f_kind},           {"f_value", cfg.f_value},
                  {"g", cfg.g_kind},           {"g_value", cfg.g_value},
                  {"psi", cfg.psi_kind},       {"psi_value", cfg.psi_value},
                  {"payoff_kind", cfg.payoff_kind}, {"strike", cfg.strike}};
  echo["solver"] = {{"method", cfg.method},
                    {"omega", cfg.omega},
                    {"tol", cfg.tol},
                    {"max_iter", cfg.max_iter}};
  echo["perron"] = {{"radius", cfg.radius},       {"overlap", cfg.overlap},
                    {"tol", cfg.sweep_tol},       {"max_sweeps", cfg.max_sweeps},
                    {"lift_mode", cfg.lift_mode}, {"direction", cfg.direction},
                    {"coloring", cfg.coloring},   {"gap_stop", cfg.gap_stop}};
  echo["verify"] = {{"inject_fault", cfg.inject_fault}};
  echo["transform"] = {{"samples", cfg.samples}};
  cfg.echo = std::move(echo);
  return cfg;
}

}  // namespace degen::cli
