#include "conleybif/cli.hpp"

#include "conleybif/errors.hpp"
#include "conleybif/parallel.hpp"
#include "conleybif/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace conleybif {

namespace {

const char *const kUsage =
    "usage: conleybif_cli <command> --config PATH [--out DIR] [--threads N] [--seed-list a,b,c]\n"
    "commands: simulate, invariant, primes, index, sweep, check-conjugacy, check-cocycle\n";

struct Options {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::string seed_list;
};

struct Context {
  RunConfig cfg;
  unsigned threads;
  std::ostream &out;
  std::ostream &err;

  void emit(const std::string &name, const std::string &text) const {
    out << text;
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream f(std::filesystem::path(cfg.out_dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write to output directory '" + cfg.out_dir + "'");
    f << text;
  }

  void write_side(const std::string &name, const std::string &text) const {
    if (cfg.out_dir.empty()) return;
    std::ofstream f(std::filesystem::path(cfg.out_dir) / name, std::ios::binary);
    f << text;
  }

  SystemDef system() const { return make_family(cfg)(cfg.require_lambda()); }
  NoisePath path(const SystemDef &sys, int radius) const {
    return sample_path(sys.noise, radius, cfg.seeds.front());
  }
  DecompositionParams params() const {
    DecompositionParams p = cfg.params;
    p.threads = threads;
    return p;
  }
};

int cmd_simulate(const Context &c) {
  const SystemDef sys = c.system();
  const int steps = c.cfg.sim_steps;
  const NoisePath path = c.path(sys, std::max(c.cfg.radius, steps + 1));
  std::ostringstream csv;
  csv.precision(17);
  csv << "n,x\n";
  Point x = Point::Constant(sys.dim(), c.cfg.sim_x0);
  csv << 0 << ',' << x[0] << '\n';
  int status = exit_code::ok;
  for (int n = 1; n <= steps; ++n) {
    try {
      x = time_one_map(sys, path, n - 1, x);
    } catch (const DivergenceError &e) {
      c.err << "orbit diverged at step " << n << ": " << e.what() << "\n";
      status = exit_code::warnings;
      break;
    }
    csv << n << ',';
    for (Eigen::Index i = 0; i < x.size(); ++i) csv << (i ? ";" : "") << x[i];
    csv << '\n';
  }
  c.emit("simulate.csv", csv.str());
  return status;
}

int cmd_invariant(const Context &c) {
  const SystemDef sys = c.system();
  const NoisePath path = c.path(sys, c.cfg.radius);
  auto [first, last] = fiber_window(path);
  const RandomBoxSet n = RandomBoxSet::full(build_grid(sys.domain, c.cfg.params.width), first, last);
  const FiberedTransitionGraph g = build_transition_graph(sys, path, n, c.threads);
  const InvariantFamily inv = compute_inv(g, n, c.cfg.params.margin);
  Json j;
  j["header"] = report_header(c.cfg, "invariant");
  j["lambda"] = sys.lambda;
  j["invariant"] = invariant_json(inv);
  j["isolated_in_domain"] = is_isolating_neighborhood(n, inv).isolating;
  c.emit("invariant.json", dump(j));
  return exit_code::ok;
}

int cmd_primes(const Context &c, bool index_only) {
  const SystemDef sys = c.system();
  const NoisePath path = c.path(sys, c.cfg.radius);
  const Decomposition d = prime_decomposition(sys, path, c.params());
  Json j;
  j["header"] = report_header(c.cfg, index_only ? "index" : "primes");
  if (index_only) {
    const IndexFingerprint zero = trivial_fingerprint(d.core_first, d.core_last, d.horizon);
    Json list = Json::array();
    for (const PrimeFamily &p : d.primes) {
      Json pj;
      pj["bbox_fiber0"] = box_json(p.bbox0());
      pj["fingerprint"] = fingerprint_json(p.fingerprint);
      pj["vs_trivial"] = to_string(compare_fingerprints(p.fingerprint, zero));
      list.push_back(std::move(pj));
    }
    j["lambda"] = sys.lambda;
    j["seed"] = path.seed();
    j["horizon"] = d.horizon;
    j["indices"] = std::move(list);
    j["unresolved"] = d.unresolved.size();
  } else {
    j["decomposition"] = decomposition_json(d, sys.lambda, path.seed());
    j["pairwise_disjoint"] = check_pairwise_disjoint(d.primes).disjoint;
  }
  c.emit(index_only ? "index.json" : "primes.json", dump(j));
  for (const auto &w : d.warnings) c.err << "warning: " << w << "\n";
  return d.unresolved.empty() ? exit_code::ok : exit_code::refinement;
}

int cmd_sweep(const Context &c) {
  if (c.cfg.lambdas.size() < 2) throw ConfigError("system.lambdas needs at least two values for sweep");
  const SweepReport rep = sweep(make_family(c.cfg), sweep_settings(c.cfg, c.threads));
  c.emit("sweep.json", dump(sweep_json(rep, c.cfg)));
  c.write_side("sweep.csv", sweep_csv(rep));
  for (const auto &w : rep.warnings) c.err << "warning: " << w << "\n";
  bool inexact = false;
  for (const RunRecord &r : rep.runs) inexact = inexact || !r.m.exact();
  if (rep.changes.empty() && inexact) return exit_code::refinement;
  if (!rep.changes.empty() && !rep.warnings.empty()) return exit_code::warnings;
  return exit_code::ok;
}

int cmd_check_cocycle(const Context &c) {
  const SystemDef sys = c.system();
  const NoisePath path = c.path(sys, c.cfg.radius);
  const LawReport r = check_cocycle_property(sys, path, c.cfg.check_trials, c.cfg.check_tol,
                                             c.cfg.check_max_steps, c.cfg.seeds.front());
  Json j;
  j["header"] = report_header(c.cfg, "check-cocycle");
  j["cocycle"] = law_json(r, c.cfg.check_tol);
  c.emit("check_cocycle.json", dump(j));
  return r.pass ? exit_code::ok : exit_code::warnings;
}

int cmd_check_conjugacy(const Context &c) {
  const SystemDef sys = c.system();
  const NoisePath path = c.path(sys, c.cfg.radius);
  const ConjugacyDef alpha = ConjugacyDef::affine(c.cfg.conj_a, c.cfg.conj_b);
  const SystemDef sys2 = conjugate_system(sys, alpha, c.cfg.params.width);
  const LawReport r = check_conjugacy(sys, sys2, alpha, path, c.cfg.check_trials, c.cfg.check_tol,
                                      c.cfg.check_max_steps, c.cfg.seeds.front());
  Json j;
  j["header"] = report_header(c.cfg, "check-conjugacy");
  j["conjugacy"] = law_json(r, c.cfg.check_tol);
  c.emit("check_conjugacy.json", dump(j));
  return r.pass ? exit_code::ok : exit_code::warnings;
}

}  // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  static const std::vector<std::string> commands = {
      "simulate", "invariant", "primes", "index", "sweep", "check-conjugacy", "check-cocycle"};
  if (args.empty() || std::find(commands.begin(), commands.end(), args[0]) == commands.end()) {
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
      out << kUsage;
      return exit_code::ok;
    }
    err << (args.empty() ? "missing command\n" : "unknown command '" + args[0] + "'\n") << kUsage;
    return exit_code::config;
  }
  const std::string command = args[0];
  Options o;
  CLI::App app{"conleybif " + command};
  app.add_option("--config", o.config, "configuration file")->required();
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "worker threads (0 = auto)");
  app.add_option("--seed-list", o.seed_list, "comma-separated noise seeds");
  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 wants reversed
    app.parse(rest);
  } catch (const CLI::CallForHelp &) {
    out << app.help() << kUsage;
    return exit_code::ok;
  } catch (const CLI::ParseError &e) {
    err << e.what() << "\n" << kUsage;
    return exit_code::config;
  }

  try {
    RunConfig cfg = load_config(o.config);
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.seed_list.empty()) cfg.seeds = parse_seed_list(o.seed_list);
    cfg.refresh_resolved();
    const Context c{std::move(cfg), resolve_threads(o.threads), out, err};
    if (command == "simulate") return cmd_simulate(c);
    if (command == "invariant") return cmd_invariant(c);
    if (command == "primes") return cmd_primes(c, false);
    if (command == "index") return cmd_primes(c, true);
    if (command == "sweep") return cmd_sweep(c);
    if (command == "check-cocycle") return cmd_check_cocycle(c);
    return cmd_check_conjugacy(c);
  } catch (const ConfigError &e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const WindowExhausted &e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const RefinementError &e) {
    err << "refinement budget exhausted: " << e.what() << "\n";
    return exit_code::refinement;
  } catch (const FiltrationFailure &e) {
    err << "refinement budget exhausted: " << e.what() << "\n";
    return exit_code::refinement;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_code::warnings;
  }
}

}  // namespace conleybif
