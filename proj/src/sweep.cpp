#include "conleybif/sweep.hpp"

#include "conleybif/errors.hpp"
#include "conleybif/parallel.hpp"

#include <cmath>
#include <sstream>

namespace conleybif {

const char *to_string(Verdict v) {
  switch (v) {
    case Verdict::Change: return "change";
    case Verdict::NoChange: return "no-change";
    case Verdict::Incomparable: return "incomparable";
  }
  return "?";
}

Verdict change_test(const RunRecord &a, const RunRecord &b) {
  // Disjoint count ranges already decide; overlapping inexact ones do not.
  if (a.m.hi < b.m.lo || b.m.hi < a.m.lo) return Verdict::Change;
  if (!a.m.exact() || !b.m.exact()) return Verdict::Incomparable;
  if (a.m.lo != b.m.lo) return Verdict::Change;
  for (const PrimeSummary &pa : a.primes)
    for (const PrimeSummary &pb : b.primes)
      if (pa.bbox0.intersects(pb.bbox0) &&
          compare_fingerprints(pa.fingerprint, pb.fingerprint) == Comparison::Different)
        return Verdict::Change;
  return Verdict::NoChange;
}

Votes tally(const std::vector<RunRecord> &a, const std::vector<RunRecord> &b) {
  if (a.size() != b.size()) throw UsageError("tally needs one run per seed on both sides");
  Votes v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seed != b[i].seed) throw UsageError("tally needs matching seeds");
    switch (change_test(a[i], b[i])) {
      case Verdict::Change: ++v.change; break;
      case Verdict::NoChange: ++v.no_change; break;
      case Verdict::Incomparable: ++v.incomparable; break;
    }
  }
  return v;
}

int majority_threshold(int realizations) { return (realizations + 2) / 2; }

RunRecord evaluate_run(const FamilyFactory &family, double lambda, std::uint64_t seed,
                       int radius, const DecompositionParams &params) {
  const SystemDef sys = family(lambda);
  const NoisePath path = sample_path(sys.noise, radius, seed);
  const Decomposition d = prime_decomposition(sys, path, params);
  RunRecord r;
  r.lambda = lambda;
  r.seed = seed;
  r.m = count_M(d);
  for (const PrimeFamily &p : d.primes) r.primes.push_back({p.bbox0(), p.fingerprint, p.certified});
  r.unresolved = d.unresolved;
  r.escaped_boxes = d.escaped_boxes;
  r.warnings = d.warnings;
  return r;
}

namespace {

void check_settings(const SweepSettings &s) {
  if (s.seeds.empty()) throw ConfigError("noise.realizations must be >= 1");
  for (std::size_t i = 1; i < s.lambdas.size(); ++i)
    if (!(s.lambdas[i] > s.lambdas[i - 1]))
      throw ConfigError("system.lambdas must be strictly increasing");
}

DecompositionParams serial(DecompositionParams p) {
  p.threads = 1;
  return p;
}

}  // namespace

std::vector<RunRecord> evaluate_lambda(const FamilyFactory &family, double lambda,
                                       const SweepSettings &s) {
  std::vector<RunRecord> out(s.seeds.size());
  const DecompositionParams p = serial(s.params);
  parallel_for(out.size(), s.threads, [&](std::size_t i) {
    out[i] = evaluate_run(family, lambda, s.seeds[i], s.radius, p);
  });
  return out;
}

Certificate bisect_refine(const FamilyFactory &family, double lo, double hi,
                          const SweepSettings &s, std::vector<RunRecord> lo_runs,
                          std::vector<RunRecord> hi_runs) {
  check_settings(s);
  if (!(lo < hi)) throw UsageError("bisection needs lo < hi");
  if (lo_runs.empty()) lo_runs = evaluate_lambda(family, lo, s);
  if (hi_runs.empty()) hi_runs = evaluate_lambda(family, hi, s);
  const int need = majority_threshold(static_cast<int>(s.seeds.size()));
  Certificate c;
  c.votes = tally(lo_runs, hi_runs);
  while (hi - lo > s.tol) {
    const double mid = 0.5 * (lo + hi);
    std::vector<RunRecord> mid_runs = evaluate_lambda(family, mid, s);
    const Votes vl = tally(lo_runs, mid_runs);
    const Votes vr = tally(mid_runs, hi_runs);
    const bool fl = vl.change >= need, fr = vr.change >= need;
    if (!fl && !fr) {
      std::ostringstream o;
      o << "change test inconclusive at lambda=" << mid << " (left " << vl.change << " change/"
        << vl.incomparable << " incomparable, right " << vr.change << " change/"
        << vr.incomparable << " incomparable); keeping the last conclusive bracket";
      c.warnings.push_back(o.str());
      break;
    }
    if (fl && (!fr || vl.change >= vr.change)) {
      hi = mid;
      hi_runs = std::move(mid_runs);
      c.votes = vl;
    } else {
      lo = mid;
      lo_runs = std::move(mid_runs);
      c.votes = vr;
    }
  }
  c.lo = lo;
  c.hi = hi;
  c.converged = hi - lo <= s.tol;
  c.left = std::move(lo_runs);
  c.right = std::move(hi_runs);
  return c;
}

SweepReport sweep(const FamilyFactory &family, const SweepSettings &s) {
  check_settings(s);
  SweepReport rep;
  rep.lambdas = s.lambdas;
  rep.seeds = s.seeds;
  rep.radius = s.radius;
  rep.width = s.params.width;
  const std::size_t nl = s.lambdas.size(), ns = s.seeds.size();
  rep.runs.resize(nl * ns);
  const DecompositionParams p = serial(s.params);
  parallel_for(rep.runs.size(), s.threads, [&](std::size_t t) {
    rep.runs[t] = evaluate_run(family, s.lambdas[t / ns], s.seeds[t % ns], s.radius, p);
  });
  auto runs_at = [&](std::size_t i) {
    return std::vector<RunRecord>(rep.runs.begin() + static_cast<long>(i * ns),
                                  rep.runs.begin() + static_cast<long>((i + 1) * ns));
  };
  const int need = majority_threshold(static_cast<int>(ns));
  for (std::size_t i = 0; i + 1 < nl; ++i) {
    const Votes v = tally(runs_at(i), runs_at(i + 1));
    if (v.change >= need) rep.changes.push_back({s.lambdas[i], s.lambdas[i + 1], v});
    else if (v.incomparable > 0) {
      std::ostringstream o;
      o << "interval (" << s.lambdas[i] << ", " << s.lambdas[i + 1] << "): " << v.incomparable
        << " incomparable realization(s)";
      rep.warnings.push_back(o.str());
    }
  }
  if (s.tol > 0) {
    for (std::size_t i = 0, j = 0; i + 1 < nl && j < rep.changes.size(); ++i) {
      if (s.lambdas[i] != rep.changes[j].lo) continue;
      rep.certificates.push_back(bisect_refine(family, s.lambdas[i], s.lambdas[i + 1], s,
                                               runs_at(i), runs_at(i + 1)));
      ++j;
    }
  }
  for (const Certificate &c : rep.certificates)
    rep.warnings.insert(rep.warnings.end(), c.warnings.begin(), c.warnings.end());
  return rep;
}

}  // namespace conleybif
