// Acceptance run: one PASS/FAIL line per criterion.
#include "conleybif/cocycle.hpp"
#include "conleybif/config.hpp"
#include "conleybif/errors.hpp"
#include "conleybif/parallel.hpp"
#include "conleybif/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace conleybif;

namespace {

// Pinned tolerances.
constexpr double kBracketWidth = 0.02;
constexpr double kEx1Seconds = 60.0;
constexpr double kOdeSeconds = 120.0;
constexpr int kNoisyRealizations = 8;
constexpr int kNoisyRequired = 7;
constexpr double kOdeCocycleTol = 1e-6;
constexpr int kCocycleSteps = 8;
constexpr int kConjugacies = 20;
constexpr int kEnclosureSamples = 10000;

const std::vector<double> kEx1Lambdas = {-0.5, -0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

const Certificate *certificate_around_zero(const SweepReport &rep) {
  for (const Certificate &c : rep.certificates)
    if (c.lo <= 0.0 && c.hi >= 0.0) return &c;
  return nullptr;
}

bool bracket_ok(const Certificate *c) {
  return c && c->converged && c->hi - c->lo <= kBracketWidth + 1e-12;
}

// Everything the later criteria audit: each decomposition with the system and
// path it came from.
struct Audited {
  std::string label;
  SystemDef sys;
  NoisePath path;
  Decomposition d;
};

struct Suite {
  unsigned threads = 1;
  std::vector<Audited> runs;
  std::string ex1_json;
  RunConfig ex1_cfg;

  void keep(const std::string &label, const FamilyFactory &family, const RunRecord &r,
            const SweepSettings &s) {
    SystemDef sys = family(r.lambda);
    NoisePath path = sample_path(sys.noise, s.radius, r.seed);
    Decomposition d = prime_decomposition(sys, path, s.params);
    runs.push_back({label, std::move(sys), std::move(path), std::move(d)});
  }
};

// -----------------------------------------------------------------------------
// 1. Example 1
// -----------------------------------------------------------------------------

Outcome criterion1(Suite &suite) {
  Outcome o;
  const auto t0 = Clock::now();

  suite.ex1_cfg = parse_config(
      "system.family = example1\n"
      "system.lambdas = -0.5, -0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5\n"
      "noise.kind = constant\n"
      "noise.value = 1\n"
      "noise.K = 32\n"
      "grid.width = 0.05\n"
      "sweep.tol = 0.02\n");
  const FamilyFactory det = make_family(suite.ex1_cfg);
  const SweepSettings ds = sweep_settings(suite.ex1_cfg, suite.threads);
  const SweepReport rep = sweep(det, ds);
  suite.ex1_json = dump(sweep_json(rep, suite.ex1_cfg));

  bool m_ok = true;
  for (const RunRecord &r : rep.runs) {
    if (r.lambda <= -0.1) m_ok = m_ok && r.m.lo >= 1;
    if (r.lambda >= 0.1) m_ok = m_ok && r.m.exact() && r.m.lo == 0;
  }
  o.require(m_ok, "M >= 1 below and M = 0 above");
  const Certificate *c = certificate_around_zero(rep);
  o.require(bracket_ok(c), "deterministic bracket");
  if (c) o.detail << " det bracket [" << fmt(c->lo) << ", " << fmt(c->hi) << "]";
  for (const RunRecord &r : rep.runs)
    if (r.lambda == -0.2 || r.lambda == 0.2) suite.keep("example1", det, r, ds);

  // Noisy: every realization is swept on its own seed.
  RunConfig noisy = parse_config(
      "system.family = example1\n"
      "system.lambdas = -0.5, -0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5\n"
      "system.domain = -1.25, 1.25\n"
      "noise.kind = uniform\n"
      "noise.lo = 0.5\n"
      "noise.hi = 1.5\n"
      "noise.realizations = 8\n"
      "grid.margin = 8\n"
      "sweep.tol = 0.02\n");
  const FamilyFactory fam = make_family(noisy);
  int found = 0;
  for (std::uint64_t seed : noisy.seeds) {
    SweepSettings s = sweep_settings(noisy, suite.threads);
    s.seeds = {seed};
    const SweepReport r = sweep(fam, s);
    bool ok = false;
    for (std::size_t i = 0; i < r.changes.size(); ++i)
      ok = ok || (r.changes[i].lo == -0.1 && r.changes[i].hi == 0.1);
    ok = ok && bracket_ok(certificate_around_zero(r));
    found += ok;
    if (seed == noisy.seeds.front())
      for (const RunRecord &x : r.runs)
        if (x.lambda == -0.2) suite.keep("example1 noisy", fam, x, s);
  }
  o.require(static_cast<int>(noisy.seeds.size()) == kNoisyRealizations, "realization count");
  o.require(found >= kNoisyRequired, "noisy brackets");
  o.detail << "; noisy " << found << "/" << noisy.seeds.size();

  const double t = seconds_since(t0);
  o.require(t <= kEx1Seconds, "runtime");
  o.detail << "; " << fmt(t) << " s";
  return o;
}

// -----------------------------------------------------------------------------
// 2 and 3. Continuous time and the index branch
// -----------------------------------------------------------------------------

const PrimeSummary *prime_at_zero(const RunRecord &r) {
  for (const PrimeSummary &p : r.primes)
    if (p.bbox0.lo[0] <= 0.0 && p.bbox0.hi[0] >= 0.0) return &p;
  return nullptr;
}

bool any_l(const IndexFingerprint &f) {
  for (bool b : f.l_flags)
    if (b) return true;
  return false;
}

struct OdeRuns {
  SweepReport pitch, sub;
};

Outcome criterion2(Suite &suite, OdeRuns &ode) {
  Outcome o;
  const auto t0 = Clock::now();

  RunConfig pc = parse_config(
      "system.family = pitchfork\n"
      "system.lambdas = -0.25, 0.25\n"
      "system.epsilon = 0\n"
      "noise.kind = constant\n"
      "noise.value = 0\n"
      "grid.refine_rounds = 7\n"
      "sweep.tol = 0.02\n");
  const FamilyFactory pf = make_family(pc);
  const SweepSettings ps = sweep_settings(pc, suite.threads);
  ode.pitch = sweep(pf, ps);
  const Certificate *c = certificate_around_zero(ode.pitch);
  o.require(bracket_ok(c), "pitchfork bracket");
  if (c) {
    o.require(c->left.front().m == MCount{1, 1} && c->right.front().m == MCount{3, 3},
              "pitchfork M 1 -> 3");
    o.detail << " pitchfork M " << c->left.front().m.lo << " -> " << c->right.front().m.lo
             << " on [" << fmt(c->lo) << ", " << fmt(c->hi) << "]";
  }
  for (const RunRecord &r : ode.pitch.runs) suite.keep("pitchfork", pf, r, ps);

  RunConfig sc = parse_config(
      "system.family = subcritical\n"
      "system.lambdas = -0.4, 0.4\n"
      "noise.kind = constant\n"
      "noise.value = 0\n"
      "sweep.tol = 0\n");
  const FamilyFactory sf = make_family(sc);
  const SweepSettings ss = sweep_settings(sc, suite.threads);
  ode.sub = sweep(sf, ss);
  const RunRecord &lo = ode.sub.runs.front(), &hi = ode.sub.runs.back();
  const bool m_change = lo.m.exact() && hi.m.exact() && lo.m.lo != hi.m.lo;
  const PrimeSummary *a = prime_at_zero(lo), *b = prime_at_zero(hi);
  const bool fp_change = a && b &&
                         (a->fingerprint.trivial != b->fingerprint.trivial ||
                          any_l(a->fingerprint) != any_l(b->fingerprint));
  o.require(!ode.sub.changes.empty(), "subcritical change flagged");
  o.require(m_change, "subcritical M change");
  o.require(fp_change, "subcritical fingerprint change at 0");
  o.detail << "; subcritical M " << lo.m.lo << " -> " << hi.m.lo;
  if (a && b)
    o.detail << ", L at 0 " << any_l(a->fingerprint) << " -> " << any_l(b->fingerprint);
  for (const RunRecord &r : ode.sub.runs) suite.keep("subcritical", sf, r, ss);

  const double t = seconds_since(t0);
  o.require(t <= kOdeSeconds, "runtime");
  o.detail << "; " << fmt(t) << " s";
  return o;
}

Outcome criterion3(const OdeRuns &ode) {
  Outcome o;
  int different = 0;
  for (const RunRecord &r : ode.sub.runs) {
    const PrimeSummary *p = prime_at_zero(r);
    if (!p) continue;
    const IndexFingerprint &f = p->fingerprint;
    const IndexFingerprint zero = trivial_fingerprint(
        f.core_first, f.core_first + static_cast<int>(f.counts.size()) - 1, f.horizon);
    const Comparison c = compare_fingerprints(f, zero);
    o.detail << " lambda " << fmt(r.lambda) << ": " << to_string(c) << ";";
    different += c == Comparison::Different;
  }
  o.require(different >= 1, "prime at 0 differs from the trivial index on one side");
  return o;
}

// -----------------------------------------------------------------------------
// 4. Lemma suite
// -----------------------------------------------------------------------------

Outcome criterion4(Suite &suite) {
  Outcome o;
  int disjoint = 0, unions = 0, union_total = 0;
  for (const Audited &a : suite.runs) {
    const DisjointReport dr = check_pairwise_disjoint(a.d.primes);
    disjoint += dr.disjoint;
    if (!dr.disjoint) o.detail << " (" << a.label << ": " << dr.witness << ")";
    for (std::size_t i = 0; i < a.d.primes.size(); ++i)
      for (std::size_t j = i + 1; j < a.d.primes.size(); ++j) {
        try {
          ++union_total;
          unions += union_isolated_check(a.d.primes[i], a.d.primes[j], a.sys, a.path,
                                         a.d.core_first - a.d.first_fiber);
        } catch (const UsageError &) {
          --union_total;  // adjacent neighborhoods are outside the hypotheses
        }
      }
  }
  o.require(disjoint == static_cast<int>(suite.runs.size()), "(a) disjointness");
  o.require(unions == union_total, "(b) unions");
  o.detail << " (a) " << disjoint << "/" << suite.runs.size() << " (b) " << unions << "/"
           << union_total;

  // (c) Random affine conjugacies of each builtin.
  struct Base {
    SystemDef sys;
    DecompositionParams params;
  };
  DecompositionParams dp;
  dp.threads = suite.threads;
  std::vector<Base> bases = {
      {make_example1(-0.2, NoiseModel::constant(1.0)), dp},
      {make_pitchfork(0.5, NoiseModel::constant(0.0)), dp},
      {make_subcritical(-0.4, NoiseModel::constant(0.0)), dp},
  };
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> mag(0.5, 2.0), shift(-0.5, 0.5);
  int conj_ok = 0, conj_total = 0;
  for (const Base &b : bases) {
    const NoisePath path = sample_path(b.sys.noise, 32, 1);
    const Decomposition ref = prime_decomposition(b.sys, path, b.params);
    const MCount m = count_M(ref);
    for (int i = 0; i < kConjugacies; ++i) {
      const double a = (i % 2 ? -1.0 : 1.0) * mag(gen);
      const ConjugacyDef alpha = ConjugacyDef::affine(a, shift(gen));
      DecompositionParams p = b.params;
      p.width = b.params.width * std::abs(a);
      const SystemDef conj = conjugate_system(b.sys, alpha, p.width);
      const Decomposition d = prime_decomposition(conj, path, p);
      bool ok = count_M(d) == m && d.primes.size() == ref.primes.size();
      for (std::size_t k = 0; ok && k < d.primes.size(); ++k) {
        const std::size_t j = a > 0 ? k : d.primes.size() - 1 - k;
        ok = compare_fingerprints(d.primes[k].fingerprint, ref.primes[j].fingerprint) !=
             Comparison::Different;
      }
      ++conj_total;
      conj_ok += ok;
      if (!ok) o.detail << " (c fails: " << b.sys.family_id << " a=" << fmt(a) << ")";
    }
  }
  o.require(conj_ok == conj_total, "(c) conjugacy invariance");
  o.detail << " (c) " << conj_ok << "/" << conj_total;

  // (d) A conjugated copy of one system never flags a change.
  int flags = 0;
  for (const char *base : {"example1", "pitchfork"}) {
    RunConfig cfg = parse_config(std::string("system.family = conjugated\n") +
                                 "system.base_family = " + base + "\n" +
                                 "system.base_lambda = " +
                                 (std::string(base) == "example1" ? "-0.09" : "0.5") + "\n" +
                                 "system.conj_rate_a = 0.5\n"
                                 "system.conj_rate_b = 0.3\n"
                                 "system.lambdas = -0.4, -0.2, 0, 0.2, 0.4\n"
                                 "noise.value = " +
                                 (std::string(base) == "example1" ? "1" : "0") + "\n" +
                                 "sweep.tol = 0\n");
    flags += static_cast<int>(sweep(make_family(cfg), sweep_settings(cfg, suite.threads)).changes.size());
  }
  o.require(flags == 0, "(d) no false alarms");
  o.detail << " (d) " << flags << " flags";
  return o;
}

// -----------------------------------------------------------------------------
// 5. Axiom suite
// -----------------------------------------------------------------------------

Outcome criterion5(const Suite &suite) {
  Outcome o;
  {
    SystemDef ex1 = make_example1(-0.2, NoiseModel::uniform(0.5, 1.5));
    const LawReport r = check_cocycle_property(ex1, sample_path(ex1.noise, 32, 1), 200, 0.0,
                                               kCocycleSteps, 1);
    o.require(r.pass && r.max_defect == 0.0, "discrete cocycle defect 0");
    o.detail << " cocycle ex1 " << fmt(r.max_defect);
  }
  for (const SystemDef &sys :
       {make_pitchfork(0.5, NoiseModel::uniform(-1, 1), box1(-1.2, 1.2), 0.05),
        make_subcritical(-0.4, NoiseModel::uniform(-1, 1), box1(-1, 1), 0.05)}) {
    const LawReport r = check_cocycle_property(sys, sample_path(sys.noise, 32, 1), 200,
                                               kOdeCocycleTol, kCocycleSteps, 1);
    o.require(r.pass, "ODE cocycle defect");
    o.detail << ", " << sys.family_id << " " << fmt(r.max_defect);
  }

  int pairs = 0, pairs_ok = 0, witnesses = 0, collapse_fails = 0;
  for (const Audited &a : suite.runs) {
    for (const PrimeFamily &p : a.d.primes) {
      const FiltrationPair fp{p.neighborhood, p.exit_layer, p.boxes};
      ++pairs;
      pairs_ok += verify_filtration_pair(a.sys, a.path, fp).ok();
      const PointedSystem ps = pointed_map(a.sys, a.path, fp);
      const int c0 = p.boxes.core_first, c1 = p.boxes.core_last;
      witnesses += verify_shift_witness(ps, ps, identity_witness(ps, c0, c1)).pass;
      // Collapse onto the trivial system with base-point insertion back.
      const PointedSystem zero = base_point_system(ps.first_fiber, ps.last_fiber());
      ShiftWitness w;
      w.first_fiber = c0;
      for (int k = c0; k <= c1; ++k) {
        w.r.push_back(std::vector<int>(static_cast<std::size_t>(ps.size(k)) + 1, 0));
        w.s.push_back({0});
        w.n1.push_back(0);
        w.n2.push_back(0);
      }
      collapse_fails += !verify_shift_witness(ps, zero, w).pass;
    }
  }
  o.require(pairs > 0 && pairs_ok == pairs, "filtration pairs");
  o.require(witnesses == pairs, "identity witnesses");
  o.require(collapse_fails == pairs, "collapse control");
  o.detail << "; pairs " << pairs_ok << "/" << pairs << ", identity " << witnesses << "/" << pairs
           << ", collapse rejected " << collapse_fails << "/" << pairs;

  std::mt19937_64 gen(99);
  for (const SystemDef &sys :
       {make_example1(-0.2, NoiseModel::uniform(0.5, 1.5)),
        make_pitchfork(0.5, NoiseModel::uniform(-1, 1), box1(-1.2, 1.2), 0.05),
        make_subcritical(-0.4, NoiseModel::uniform(-1, 1), box1(-1, 1), 0.05)}) {
    const NoisePath path = sample_path(sys.noise, 32, 5);
    const BoxGrid grid = build_grid(sys.domain, 0.05);
    std::uniform_int_distribution<BoxId> box(0, grid.size() - 1);
    std::uniform_int_distribution<int> fib(-31, 31);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    int missed = 0;
    for (int i = 0; i < kEnclosureSamples; ++i) {
      const Box b = grid.box(box(gen));
      const int k = fib(gen);
      const Point x = b.lo + t(gen) * (b.hi - b.lo);
      Point y;
      try {
        y = time_one_map(sys, path, k, x);
      } catch (const DivergenceError &) {
        continue;
      }
      const auto pieces = enclose_pieces(sys, path, k, b);
      if (!pieces) continue;  // unbounded enclosure
      bool in = false;
      for (const Box &e : *pieces) in = in || e.contains(y);
      missed += !in;
    }
    o.require(missed == 0, "enclosure soundness " + sys.family_id);
    o.detail << "; " << sys.family_id << " misses " << missed;
  }
  return o;
}

// -----------------------------------------------------------------------------
// 6. Determinism
// -----------------------------------------------------------------------------

Outcome criterion6(const Suite &suite) {
  Outcome o;
  const unsigned other = suite.threads == 1 ? 4 : 1;
  const std::string again = dump(
      sweep_json(sweep(make_family(suite.ex1_cfg), sweep_settings(suite.ex1_cfg, other)), suite.ex1_cfg));
  o.require(again == suite.ex1_json, "byte-identical sweep JSON");
  o.detail << " threads " << suite.threads << " vs " << other << ", " << again.size() << " bytes";
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance"};
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  CLI11_PARSE(app, argc, argv);

  Suite suite;
  suite.threads = resolve_threads(threads);
  OdeRuns ode;
  bool all = true;
  auto report = [&](int n, const std::function<Outcome()> &f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    all = all && o.pass;
    std::printf("criterion %d: %s%s\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  };
  report(1, [&] { return criterion1(suite); });
  report(2, [&] { return criterion2(suite, ode); });
  report(3, [&] { return criterion3(ode); });
  report(4, [&] { return criterion4(suite); });
  report(5, [&] { return criterion5(suite); });
  report(6, [&] { return criterion6(suite); });
  return all ? 0 : 1;
}
