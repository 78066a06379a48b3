#include "conleybif/report.hpp"

#include <sstream>

namespace conleybif {

Json box_json(const Box &b) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < b.lo.size(); ++i) {
    j.push_back(b.lo[i]);
    j.push_back(b.hi[i]);
  }
  return j;
}

Json fingerprint_json(const IndexFingerprint &f) {
  Json j;
  j["core_first"] = f.core_first;
  j["counts"] = f.counts;
  std::vector<int> flags(f.l_flags.begin(), f.l_flags.end());
  j["l_flags"] = flags;
  j["trivial"] = f.trivial;
  j["horizon"] = f.horizon;
  return j;
}

Json run_json(const RunRecord &r) {
  Json j;
  j["lambda"] = r.lambda;
  j["seed"] = r.seed;
  j["M"] = r.m.exact() ? Json(r.m.lo) : Json(nullptr);
  if (!r.m.exact()) j["M_range"] = {r.m.lo, r.m.hi};
  Json primes = Json::array();
  for (const PrimeSummary &p : r.primes) {
    Json pj;
    pj["bbox_fiber0"] = box_json(p.bbox0);
    pj["trivial"] = p.fingerprint.trivial;
    pj["certified"] = p.certified;
    pj["fingerprint"] = fingerprint_json(p.fingerprint);
    primes.push_back(std::move(pj));
  }
  j["primes"] = std::move(primes);
  Json unresolved = Json::array();
  for (const UnresolvedCandidate &u : r.unresolved)
    unresolved.push_back({{"bbox_fiber0", box_json(u.bbox0)}, {"reason", u.reason}});
  j["unresolved"] = std::move(unresolved);
  j["escaped_boxes"] = r.escaped_boxes;
  j["warnings"] = r.warnings;
  return j;
}

Json votes_json(const Votes &v) {
  return {{"change", v.change}, {"no_change", v.no_change}, {"incomparable", v.incomparable}};
}

Json report_header(const RunConfig &cfg, const std::string &command) {
  Json h;
  h["tool"] = "conleybif";
  h["command"] = command;
  h["config"] = cfg.resolved;
  h["seeds"] = cfg.seeds;
  h["comparison"] =
      "per-seed: M and prime fingerprints at different lambda are compared for the same noise "
      "seed (common random numbers); a change needs a strict majority of seeds";
  return h;
}

Json sweep_json(const SweepReport &rep, const RunConfig &cfg) {
  Json j;
  j["header"] = report_header(cfg, "sweep");
  j["lambdas"] = rep.lambdas;
  Json runs = Json::array();
  for (const RunRecord &r : rep.runs) runs.push_back(run_json(r));
  j["runs"] = std::move(runs);
  Json changes = Json::array();
  for (const ChangeInterval &c : rep.changes)
    changes.push_back({{"lo", c.lo}, {"hi", c.hi}, {"votes", votes_json(c.votes)}});
  j["changes"] = std::move(changes);
  Json certs = Json::array();
  for (const Certificate &c : rep.certificates) {
    Json cj;
    cj["lo"] = c.lo;
    cj["hi"] = c.hi;
    cj["width"] = c.hi - c.lo;
    cj["converged"] = c.converged;
    cj["votes"] = votes_json(c.votes);
    Json left = Json::array(), right = Json::array();
    for (const RunRecord &r : c.left) left.push_back(run_json(r));
    for (const RunRecord &r : c.right) right.push_back(run_json(r));
    cj["left"] = std::move(left);
    cj["right"] = std::move(right);
    cj["K"] = rep.radius;
    cj["grid_width"] = rep.width;
    cj["seeds"] = rep.seeds;
    cj["warnings"] = c.warnings;
    certs.push_back(std::move(cj));
  }
  j["certificates"] = std::move(certs);
  j["warnings"] = rep.warnings;
  return j;
}

std::string sweep_csv(const SweepReport &rep) {
  std::ostringstream o;
  o.precision(17);
  o << "lambda,seed,M,M_lo,M_hi\n";
  for (const RunRecord &r : rep.runs) {
    o << r.lambda << ',' << r.seed << ',';
    if (r.m.exact()) o << r.m.lo;
    o << ',' << r.m.lo << ',' << r.m.hi << '\n';
  }
  return o.str();
}

Json decomposition_json(const Decomposition &d, double lambda, std::uint64_t seed) {
  Json j;
  const MCount m = count_M(d);
  j["lambda"] = lambda;
  j["seed"] = seed;
  j["M"] = m.exact() ? Json(m.lo) : Json(nullptr);
  if (!m.exact()) j["M_range"] = {m.lo, m.hi};
  j["core"] = {d.core_first, d.core_last};
  Json primes = Json::array();
  for (const PrimeFamily &p : d.primes) {
    Json pj;
    pj["bbox_fiber0"] = box_json(p.bbox0());
    Box nb;
    if (p.neighborhood.bbox(0, nb)) pj["neighborhood_fiber0"] = box_json(nb);
    pj["boxes_on_core"] = [&] {
      std::size_t n = 0;
      for (int k = p.boxes.core_first; k <= p.boxes.core_last; ++k) n += p.boxes.boxes.fiber(k).size();
      return n;
    }();
    std::vector<double> w(p.resolution_certified.data(),
                          p.resolution_certified.data() + p.resolution_certified.size());
    pj["resolution"] = w;
    pj["certified"] = p.certified;
    pj["fingerprint"] = fingerprint_json(p.fingerprint);
    primes.push_back(std::move(pj));
  }
  j["primes"] = std::move(primes);
  Json unresolved = Json::array();
  for (const UnresolvedCandidate &u : d.unresolved)
    unresolved.push_back({{"bbox_fiber0", box_json(u.bbox0)}, {"reason", u.reason}});
  j["unresolved"] = std::move(unresolved);
  j["escaped_boxes"] = d.escaped_boxes;
  j["warnings"] = d.warnings;
  return j;
}

Json invariant_json(const InvariantFamily &inv) {
  const BoxGrid &g = inv.boxes.grid();
  Json j;
  j["domain"] = box_json(g.domain());
  std::vector<int> counts(g.counts().data(), g.counts().data() + g.counts().size());
  j["counts"] = counts;
  j["core"] = {inv.core_first, inv.core_last};
  j["empty"] = inv.empty_on_core();
  Json fibers = Json::array();
  for (int k = inv.core_first; k <= inv.core_last; ++k) {
    Json f;
    f["k"] = k;
    f["ids"] = inv.boxes.fiber(k);
    Box b;
    f["bbox"] = inv.boxes.bbox(k, b) ? box_json(b) : Json(nullptr);
    fibers.push_back(std::move(f));
  }
  j["fibers"] = std::move(fibers);
  return j;
}

Json law_json(const LawReport &r, double tol) {
  return {{"pass", r.pass}, {"max_defect", r.max_defect}, {"tol", tol},
          {"checked", r.checked}, {"skipped", r.skipped}};
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

}  // namespace conleybif
