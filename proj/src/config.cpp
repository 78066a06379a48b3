#include "conleybif/config.hpp"

#include "conleybif/cocycle.hpp"
#include "conleybif/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace conleybif {

namespace {

enum class Type { Str, Real, Int, RealList, IntList };

struct Key {
  const char *name;
  Type type;
  const char *def;  // nullptr: no default
};

const std::vector<Key> &registry() {
  static const std::vector<Key> keys = {
      {"system.family", Type::Str, nullptr},
      {"system.lambda", Type::Real, nullptr},
      {"system.lambdas", Type::RealList, nullptr},
      {"system.domain", Type::RealList, nullptr},
      {"system.epsilon", Type::Real, "0"},
      {"system.ode_substeps", Type::Int, "64"},
      {"system.table_manifest", Type::Str, ""},
      {"system.base_family", Type::Str, ""},
      {"system.base_lambda", Type::Real, "0"},
      {"system.conj_rate_a", Type::Real, "0"},
      {"system.conj_rate_b", Type::Real, "0"},
      {"noise.kind", Type::Str, "constant"},
      {"noise.value", Type::Real, "1"},
      {"noise.lo", Type::Real, "0.5"},
      {"noise.hi", Type::Real, "1.5"},
      {"noise.values", Type::RealList, nullptr},
      {"noise.weights", Type::RealList, nullptr},
      {"noise.K", Type::Int, "32"},
      {"noise.seed", Type::Int, "1"},
      {"noise.seeds", Type::IntList, nullptr},
      {"noise.realizations", Type::Int, nullptr},
      {"grid.width", Type::Real, "0.05"},
      {"grid.refine_rounds", Type::Int, "3"},
      {"grid.margin", Type::Int, "4"},
      {"grid.rings", Type::Int, "2"},
      {"encl.mode", Type::Str, "exact"},
      {"encl.lipschitz", Type::Real, "0"},
      {"encl.ode_tol", Type::Real, "1e-7"},
      {"index.horizon", Type::Int, "0"},
      {"index.ring_limit", Type::Int, "5"},
      {"sweep.tol", Type::Real, "0.02"},
      {"output.dir", Type::Str, ""},
      {"check.trials", Type::Int, "200"},
      {"check.tol", Type::Real, "1e-6"},
      {"check.max_steps", Type::Int, "8"},
      {"conj.a", Type::Real, "1"},
      {"conj.b", Type::Real, "0"},
      {"sim.x0", Type::Real, "0"},
      {"sim.steps", Type::Int, "50"},
  };
  return keys;
}

const Key *find_key(const std::string &name) {
  for (const Key &k : registry())
    if (name == k.name) return &k;
  return nullptr;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const char *name) const { return entries_.count(name) || find_key(name)->def; }
  bool given(const char *name) const { return entries_.count(name) > 0; }

  std::string where(const char *name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? std::string("default") : "line " + std::to_string(it->second.line);
  }

  [[noreturn]] void fail(const char *name, const std::string &msg) const {
    throw ConfigError(where(name) + ": " + name + " " + msg);
  }

  std::string raw(const char *name) const {
    auto it = entries_.find(name);
    if (it != entries_.end()) return it->second.value;
    const Key *k = find_key(name);
    if (!k->def) fail(name, "is required");
    return k->def;
  }

  std::string str(const char *name) const { return raw(name); }

  double real(const char *name) const { return to_real(name, raw(name)); }

  long integer(const char *name) const { return to_int(name, raw(name)); }

  std::vector<double> reals(const char *name) const {
    std::vector<double> v;
    for (const auto &s : split_list(raw(name))) v.push_back(to_real(name, s));
    return v;
  }

  std::vector<long> ints(const char *name) const {
    std::vector<long> v;
    for (const auto &s : split_list(raw(name))) v.push_back(to_int(name, s));
    return v;
  }

 private:
  double to_real(const char *name, const std::string &s) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception &) {
      fail(name, "expects a number, got '" + s + "'");
    }
  }

  long to_int(const char *name, const std::string &s) const {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      fail(name, "expects an integer, got '" + s + "'");
    return v;
  }

  std::map<std::string, Entry> entries_;
};

bool builtin_family(const std::string &f) {
  return f == "example1" || f == "pitchfork" || f == "subcritical" || f == "identity";
}

Box default_domain(const std::string &family) {
  if (family == "pitchfork") return box1(-1.2, 1.2);
  return box1(-1.0, 1.0);
}

SystemDef make_builtin(const std::string &family, double lambda, const RunConfig &cfg,
                       const Box &domain) {
  if (family == "example1") return make_example1(lambda, cfg.noise, domain);
  if (family == "pitchfork")
    return make_pitchfork(lambda, cfg.noise, domain, cfg.epsilon, cfg.ode_substeps, cfg.encl);
  if (family == "subcritical")
    return make_subcritical(lambda, cfg.noise, domain, cfg.epsilon, cfg.ode_substeps, cfg.encl);
  if (family == "identity") {
    SystemDef s = make_identity(domain);
    s.noise = cfg.noise;
    s.lambda = lambda;
    return s;
  }
  throw ConfigError("system.family: unknown family '" + family + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key &k : registry()) out.emplace_back(k.name);
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string &text) {
  std::vector<std::uint64_t> out;
  for (const auto &s : split_list(text)) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("seed list entry '" + s + "' is not an unsigned integer");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

double RunConfig::require_lambda() const {
  if (!lambda) throw ConfigError("system.lambda is required for this command");
  return *lambda;
}

RunConfig parse_config(const std::string &text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!find_key(key))
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (auto it = entries.find(key); it != entries.end())
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "' (first set on line " + std::to_string(it->second.line) + ")");
    if (value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": " + key + " has no value");
    entries[key] = {value, lineno};
  }

  const Reader r(std::move(entries));
  RunConfig c;
  c.family = r.str("system.family");
  if (!builtin_family(c.family) && c.family != "tabulated" && c.family != "conjugated")
    r.fail("system.family", "must be one of example1, pitchfork, subcritical, identity, "
                            "tabulated, conjugated");
  if (r.given("system.lambda")) c.lambda = r.real("system.lambda");
  if (r.given("system.lambdas")) {
    c.lambdas = r.reals("system.lambdas");
    for (std::size_t i = 1; i < c.lambdas.size(); ++i)
      if (!(c.lambdas[i] > c.lambdas[i - 1])) r.fail("system.lambdas", "must be strictly increasing");
  }
  if (r.given("system.domain")) {
    const auto v = r.reals("system.domain");
    if (v.empty() || v.size() % 2 || v.size() > 6)
      r.fail("system.domain", "expects lo,hi pairs for 1 to 3 dimensions");
    Point lo(static_cast<Eigen::Index>(v.size() / 2)), hi(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      lo[i] = v[static_cast<std::size_t>(2 * i)];
      hi[i] = v[static_cast<std::size_t>(2 * i + 1)];
      if (!(lo[i] < hi[i])) r.fail("system.domain", "needs lo < hi in every coordinate");
    }
    c.domain = Box{lo, hi};
  }
  c.epsilon = r.real("system.epsilon");
  if (c.epsilon < 0) r.fail("system.epsilon", "must be >= 0");
  c.ode_substeps = static_cast<int>(r.integer("system.ode_substeps"));
  if (c.ode_substeps < 8) r.fail("system.ode_substeps", "must be >= 8");
  c.table_manifest = r.str("system.table_manifest");
  if (c.family == "tabulated" && c.table_manifest.empty())
    r.fail("system.table_manifest", "is required for the tabulated family");
  c.base_family = r.str("system.base_family");
  if (c.family == "conjugated" && !builtin_family(c.base_family))
    r.fail("system.base_family", "must name a builtin family for the conjugated family");
  c.base_lambda = r.real("system.base_lambda");
  c.conj_rate_a = r.real("system.conj_rate_a");
  c.conj_rate_b = r.real("system.conj_rate_b");

  const std::string model = r.str("noise.kind");
  if (model == "constant") {
    c.noise = NoiseModel::constant(r.real("noise.value"));
  } else if (model == "uniform") {
    c.noise = NoiseModel::uniform(r.real("noise.lo"), r.real("noise.hi"));
  } else if (model == "discrete") {
    if (!r.given("noise.values")) r.fail("noise.values", "is required for discrete noise");
    std::vector<double> w;
    if (r.given("noise.weights")) w = r.reals("noise.weights");
    try {
      c.noise = NoiseModel::discrete(r.reals("noise.values"), w);
    } catch (const Error &e) {
      r.fail("noise.weights", e.what());
    }
  } else {
    r.fail("noise.kind", "must be constant, uniform or discrete");
  }
  try {
    c.noise.validate();
  } catch (const Error &e) {
    r.fail("noise.kind", e.what());
  }
  c.radius = static_cast<int>(r.integer("noise.K"));
  if (c.radius < 1) r.fail("noise.K", "must be >= 1");
  if (r.given("noise.seeds")) {
    for (long s : r.ints("noise.seeds")) {
      if (s < 0) r.fail("noise.seeds", "entries must be >= 0");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (r.given("noise.realizations") &&
        r.integer("noise.realizations") != static_cast<long>(c.seeds.size()))
      r.fail("noise.realizations", "disagrees with the length of noise.seeds");
  } else {
    const long n = r.given("noise.realizations") ? r.integer("noise.realizations") : 1;
    if (n < 1) r.fail("noise.realizations", "must be >= 1");
    const long first = r.integer("noise.seed");
    if (first < 0) r.fail("noise.seed", "must be >= 0");
    for (long i = 0; i < n; ++i) c.seeds.push_back(static_cast<std::uint64_t>(first + i));
  }

  c.params.width = r.real("grid.width");
  if (!(c.params.width > 0)) r.fail("grid.width", "must be > 0");
  c.params.refine_rounds = static_cast<int>(r.integer("grid.refine_rounds"));
  if (c.params.refine_rounds < 0 || c.params.refine_rounds > 12)
    r.fail("grid.refine_rounds", "must be in [0, 12]");
  c.params.margin = static_cast<int>(r.integer("grid.margin"));
  if (c.params.margin < 0) r.fail("grid.margin", "must be >= 0");
  if (2 * c.params.margin + 2 > 2 * c.radius) r.fail("grid.margin", "leaves no core inside noise.K");
  c.params.rings = static_cast<int>(r.integer("grid.rings"));
  if (c.params.rings < 1) r.fail("grid.rings", "must be >= 1");

  const std::string mode = r.str("encl.mode");
  if (mode == "exact")
    c.encl.mode = EnclosureSettings::Mode::Exact;
  else if (mode == "lipschitz")
    c.encl.mode = EnclosureSettings::Mode::Lipschitz;
  else
    r.fail("encl.mode", "must be exact or lipschitz");
  c.encl.lipschitz = r.real("encl.lipschitz");
  if (c.encl.mode == EnclosureSettings::Mode::Lipschitz && !(c.encl.lipschitz > 0))
    r.fail("encl.lipschitz", "must be > 0 in lipschitz mode");
  c.encl.ode_tol = r.real("encl.ode_tol");
  if (c.encl.ode_tol < 0) r.fail("encl.ode_tol", "must be >= 0");

  c.params.horizon = static_cast<int>(r.integer("index.horizon"));
  if (c.params.horizon < 0) r.fail("index.horizon", "must be >= 0");
  if (c.params.horizon > 2 * (c.radius - c.params.margin))
    r.fail("index.horizon", "exceeds the core window");
  c.params.ring_limit = static_cast<int>(r.integer("index.ring_limit"));
  if (c.params.ring_limit < 0) r.fail("index.ring_limit", "must be >= 0");

  c.tol = r.real("sweep.tol");
  if (c.tol < 0) r.fail("sweep.tol", "must be >= 0");
  c.out_dir = r.str("output.dir");

  c.check_trials = static_cast<int>(r.integer("check.trials"));
  if (c.check_trials < 1) r.fail("check.trials", "must be >= 1");
  c.check_tol = r.real("check.tol");
  if (c.check_tol < 0) r.fail("check.tol", "must be >= 0");
  c.check_max_steps = static_cast<int>(r.integer("check.max_steps"));
  if (c.check_max_steps < 1) r.fail("check.max_steps", "must be >= 1");
  c.conj_a = r.real("conj.a");
  if (c.conj_a == 0) r.fail("conj.a", "must be nonzero");
  c.conj_b = r.real("conj.b");
  c.sim_x0 = r.real("sim.x0");
  c.sim_steps = static_cast<int>(r.integer("sim.steps"));
  if (c.sim_steps < 0) r.fail("sim.steps", "must be >= 0");

  if (c.domain && c.family != "conjugated" && c.family != "identity" && c.domain->dim() != 1)
    r.fail("system.domain", "must be one-dimensional for this family");
  c.refresh_resolved();
  return c;
}

void RunConfig::refresh_resolved() {
  using nlohmann::ordered_json;
  ordered_json j;
  j["system.family"] = family;
  j["system.lambda"] = lambda ? ordered_json(*lambda) : ordered_json(nullptr);
  j["system.lambdas"] = lambdas;
  if (domain) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < domain->lo.size(); ++i) {
      v.push_back(domain->lo[i]);
      v.push_back(domain->hi[i]);
    }
    j["system.domain"] = v;
  } else {
    j["system.domain"] = nullptr;
  }
  j["system.epsilon"] = epsilon;
  j["system.ode_substeps"] = ode_substeps;
  j["system.table_manifest"] = table_manifest;
  j["system.base_family"] = base_family;
  j["system.base_lambda"] = base_lambda;
  j["system.conj_rate_a"] = conj_rate_a;
  j["system.conj_rate_b"] = conj_rate_b;
  switch (noise.kind) {
    case NoiseModel::Kind::Constant:
      j["noise.kind"] = "constant";
      j["noise.value"] = noise.lo;
      break;
    case NoiseModel::Kind::Uniform:
      j["noise.kind"] = "uniform";
      j["noise.lo"] = noise.lo;
      j["noise.hi"] = noise.hi;
      break;
    case NoiseModel::Kind::Discrete:
      j["noise.kind"] = "discrete";
      j["noise.values"] = noise.values;
      j["noise.weights"] = noise.weights;
      break;
  }
  j["noise.K"] = radius;
  j["noise.seeds"] = seeds;
  j["noise.realizations"] = seeds.size();
  j["grid.width"] = params.width;
  j["grid.refine_rounds"] = params.refine_rounds;
  j["grid.margin"] = params.margin;
  j["grid.rings"] = params.rings;
  j["encl.mode"] = encl.mode == EnclosureSettings::Mode::Exact ? "exact" : "lipschitz";
  j["encl.lipschitz"] = encl.lipschitz;
  j["encl.ode_tol"] = encl.ode_tol;
  j["index.horizon"] = params.horizon;
  j["index.ring_limit"] = params.ring_limit;
  j["sweep.tol"] = tol;
  j["output.dir"] = out_dir;
  j["check.trials"] = check_trials;
  j["check.tol"] = check_tol;
  j["check.max_steps"] = check_max_steps;
  j["conj.a"] = conj_a;
  j["conj.b"] = conj_b;
  j["sim.x0"] = sim_x0;
  j["sim.steps"] = sim_steps;
  resolved = std::move(j);
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

FamilyFactory make_family(const RunConfig &cfg) {
  if (cfg.family == "tabulated") {
    return [cfg](double lambda) {
      const Box dom = cfg.domain ? *cfg.domain : default_domain(cfg.family);
      return make_tabulated(lambda, cfg.noise, dom, read_table_manifest(cfg.table_manifest, lambda));
    };
  }
  if (cfg.family == "conjugated") {
    const Box dom = cfg.domain ? *cfg.domain : default_domain(cfg.base_family);
    const SystemDef base = make_builtin(cfg.base_family, cfg.base_lambda, cfg, dom);
    return [cfg, base](double lambda) {
      const double a = 1.0 + cfg.conj_rate_a * lambda;
      if (a == 0) throw ConfigError("conjugacy degenerates at lambda=" + std::to_string(lambda));
      SystemDef s = conjugate_system(base, ConjugacyDef::affine(a, cfg.conj_rate_b * lambda),
                                     cfg.params.width);
      s.lambda = lambda;
      return s;
    };
  }
  return [cfg](double lambda) {
    const Box dom = cfg.domain ? *cfg.domain : default_domain(cfg.family);
    return make_builtin(cfg.family, lambda, cfg, dom);
  };
}

SweepSettings sweep_settings(const RunConfig &cfg, unsigned threads) {
  SweepSettings s;
  s.lambdas = cfg.lambdas;
  s.seeds = cfg.seeds;
  s.radius = cfg.radius;
  s.params = cfg.params;
  s.params.threads = threads;
  s.tol = cfg.tol;
  s.threads = threads;
  return s;
}

}  // namespace conleybif
