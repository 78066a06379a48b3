#include "conleybif/conley.hpp"

#include "conleybif/errors.hpp"

#include <algorithm>
#include <sstream>

namespace conleybif {

int PointedSystem::apply(int k, int x) const {
  const int f = k - first_fiber;
  if (f < 0 || f >= static_cast<int>(maps.size()))
    throw UsageError("pointed map requested outside the window at fiber " +
                     std::to_string(k));
  return maps[static_cast<std::size_t>(f)].at(static_cast<std::size_t>(x));
}

int PointedSystem::iterate(int k, int steps, int x) const {
  if (steps < 0) throw UsageError("negative iterate");
  for (int j = 0; j < steps; ++j) x = apply(k + j, x);
  return x;
}

void PointedSystem::validate() const {
  if (sizes.empty() || maps.size() + 1 != sizes.size())
    throw UsageError("pointed system needs one map fewer than fibers");
  for (std::size_t f = 0; f < maps.size(); ++f) {
    if (maps[f].size() != static_cast<std::size_t>(sizes[f]) + 1)
      throw UsageError("pointed map is not total");
    if (maps[f][0] != 0) throw UsageError("base point must map to base point");
    for (int y : maps[f])
      if (y < 0 || y > sizes[f + 1]) throw UsageError("pointed map out of range");
  }
}

std::vector<std::vector<BoxId>> box_components(const BoxGrid &grid,
                                               const std::vector<BoxId> &ids) {
  std::vector<int> label(ids.size(), -1);
  std::vector<std::vector<BoxId>> out;
  auto index_of = [&](BoxId id) -> long {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return it != ids.end() && *it == id ? it - ids.begin() : -1;
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (label[i] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<std::size_t> stack{i};
    label[i] = c;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      out.back().push_back(ids[cur]);
      for (BoxId nb : grid.neighbors(ids[cur])) {
        const long j = index_of(nb);
        if (j >= 0 && label[static_cast<std::size_t>(j)] < 0) {
          label[static_cast<std::size_t>(j)] = c;
          stack.push_back(static_cast<std::size_t>(j));
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

PointedSystem pointed_map(const FiberedTransitionGraph &g, const FiltrationPair &p) {
  const RandomBoxSet rest = subtract(p.n, p.l);
  PointedSystem ps;
  ps.first_fiber = rest.first_fiber();
  const int last = rest.last_fiber();
  std::vector<std::vector<int>> label_of(static_cast<std::size_t>(last - ps.first_fiber + 1));
  for (int k = ps.first_fiber; k <= last; ++k) {
    auto comps = box_components(rest.grid(), rest.fiber(k));
    auto &lab = label_of[static_cast<std::size_t>(k - ps.first_fiber)];
    lab.assign(rest.fiber(k).size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (BoxId b : comps[c]) {
        auto it = std::lower_bound(rest.fiber(k).begin(), rest.fiber(k).end(), b);
        lab[static_cast<std::size_t>(it - rest.fiber(k).begin())] = static_cast<int>(c) + 1;
      }
    ps.sizes.push_back(static_cast<int>(comps.size()));
    ps.components.push_back(std::move(comps));
  }
  for (int k = ps.first_fiber; k < last; ++k) {
    const std::size_t f = static_cast<std::size_t>(k - ps.first_fiber);
    const auto &next_ids = rest.fiber(k + 1);
    std::vector<int> m(static_cast<std::size_t>(ps.sizes[f]) + 1, 0);
    for (int c = 1; c <= ps.sizes[f]; ++c) {
      int target = 0;
      for (BoxId b : ps.components[f][static_cast<std::size_t>(c - 1)]) {
        const TransitionNode *node = g.node(k, b);
        if (!node)
          throw UsageError("transition graph lacks box " + std::to_string(b));
        for (BoxId s : node->successors) {
          auto it = std::lower_bound(next_ids.begin(), next_ids.end(), s);
          if (it == next_ids.end() || *it != s) continue;
          const int t = label_of[f + 1][static_cast<std::size_t>(it - next_ids.begin())];
          if (target != 0 && t != target)
            throw RefinementError("component " + std::to_string(c) + " at fiber " +
                                  std::to_string(k) +
                                  " maps into several components; subdivide");
          target = t;
        }
      }
      m[static_cast<std::size_t>(c)] = target;
    }
    ps.maps.push_back(std::move(m));
  }
  return ps;
}

PointedSystem pointed_map(const SystemDef &sys, const NoisePath &path,
                          const FiltrationPair &p) {
  return pointed_map(build_transition_graph(sys, path, p.n), p);
}

PointedSystem base_point_system(int first_fiber, int last_fiber) {
  if (last_fiber < first_fiber) throw UsageError("empty fiber range");
  PointedSystem ps;
  ps.first_fiber = first_fiber;
  ps.sizes.assign(static_cast<std::size_t>(last_fiber - first_fiber + 1), 0);
  ps.maps.assign(ps.sizes.size() - 1, std::vector<int>{0});
  ps.components.assign(ps.sizes.size(), {});
  return ps;
}

int default_horizon(int core_first, int core_last) {
  return std::max(1, (core_last - core_first) / 2);
}

IndexFingerprint fingerprint(const PointedSystem &ps, const RandomBoxSet &l,
                             int core_first, int core_last, int horizon) {
  if (horizon < 1) throw UsageError("horizon must be >= 1");
  if (core_first < ps.first_fiber || core_last > ps.last_fiber())
    throw UsageError("core window exceeds the pointed system");
  if (core_last - core_first < horizon)
    throw UsageError("horizon exceeds the core window");
  IndexFingerprint fp;
  fp.core_first = core_first;
  fp.horizon = horizon;
  for (int k = core_first; k <= core_last; ++k) {
    fp.counts.push_back(ps.size(k));
    fp.l_flags.push_back(l.has_fiber(k) && !l.fiber(k).empty());
  }
  fp.trivial = true;
  for (int k = core_first; k + horizon <= core_last && fp.trivial; ++k)
    for (int x = 1; x <= ps.size(k); ++x)
      if (ps.iterate(k, horizon, x) != 0) {
        fp.trivial = false;
        break;
      }
  return fp;
}

IndexFingerprint trivial_fingerprint(int core_first, int core_last, int horizon) {
  return fingerprint(base_point_system(core_first, core_last), RandomBoxSet(),
                     core_first, core_last, horizon);
}

const char *to_string(Comparison c) {
  switch (c) {
    case Comparison::Equal: return "equal";
    case Comparison::Different: return "different";
    case Comparison::Incomparable: return "incomparable";
  }
  return "?";
}

Comparison compare_fingerprints(const IndexFingerprint &a, const IndexFingerprint &b) {
  if (a.horizon != b.horizon) throw UsageError("fingerprints use different horizons");
  if (a.trivial != b.trivial) return Comparison::Different;
  auto summary = [](const IndexFingerprint &f) {
    std::vector<std::pair<int, bool>> v;
    for (std::size_t i = 0; i < f.counts.size(); ++i) v.emplace_back(f.counts[i], f.l_flags[i]);
    std::sort(v.begin(), v.end());
    return v;
  };
  return summary(a) == summary(b) ? Comparison::Equal : Comparison::Incomparable;
}

namespace {

struct Checker {
  const PointedSystem &c, &d;
  const ShiftWitness &w;

  void need(const PointedSystem &sys, int k, int steps, const char *what) const {
    if (k < sys.first_fiber || k + steps > sys.last_fiber())
      throw UsageError(std::string("shift witness leaves the window (") + what +
                       " at fiber " + std::to_string(k) + ")");
  }
  void need_w(int k) const {
    if (k < w.first_fiber || k > w.last_fiber())
      throw UsageError("shift witness lacks fiber " + std::to_string(k));
  }
  int r(int k, int x) const {
    need_w(k);
    return w.r[static_cast<std::size_t>(k - w.first_fiber)].at(static_cast<std::size_t>(x));
  }
  int s(int k, int x) const {
    need_w(k);
    return w.s[static_cast<std::size_t>(k - w.first_fiber)].at(static_cast<std::size_t>(x));
  }
  int n1(int k) const { need_w(k); return w.n1[static_cast<std::size_t>(k - w.first_fiber)]; }
  int n2(int k) const { need_w(k); return w.n2[static_cast<std::size_t>(k - w.first_fiber)]; }
  int it(const PointedSystem &sys, int k, int steps, int x, const char *what) const {
    need(sys, k, steps, what);
    return sys.iterate(k, steps, x);
  }

  // Quasi-commutativity of a lagged map m (lags lag) with (src, dst).
  std::string quasi(const PointedSystem &src, const PointedSystem &dst, int k,
                    bool use_r) const {
    auto m = [&](int f, int x) { return use_r ? r(f, x) : s(f, x); };
    auto lag = [&](int f) { return use_r ? n1(f) : n2(f); };
    const char *name = use_r ? "r" : "s";
    const int a = lag(k), b = lag(k + 1);
    need(src, k, 1, name);
    for (int x = 0; x <= src.size(k); ++x) {
      const int via_src = m(k + 1, it(src, k, 1, x, name));
      const int via_dst = it(dst, k + a, 1, m(k, x), name);
      bool ok;
      if (b >= a)
        ok = via_src == it(dst, k + a + 1, b - a, via_dst, name);
      else
        ok = it(dst, k + b + 1, a - b, via_src, name) == via_dst;
      if (!ok) {
        std::ostringstream o;
        o << name << " fails quasi-commutativity at fiber " << k << ", point " << x;
        return o.str();
      }
    }
    return {};
  }

  std::string composition(int k) const {
    need(c, k, 0, "s o r");
    need(d, k, 0, "r o s");
    for (int y = 0; y <= d.size(k); ++y) {
      const int lag = n2(k) + n1(k + n2(k));
      if (r(k + n2(k), s(k, y)) != it(d, k, lag, y, "r o s")) {
        std::ostringstream o;
        o << "r o s != d^" << lag << " at fiber " << k << ", point " << y;
        return o.str();
      }
    }
    for (int x = 0; x <= c.size(k); ++x) {
      const int lag = n1(k) + n2(k + n1(k));
      if (s(k + n1(k), r(k, x)) != it(c, k, lag, x, "s o r")) {
        std::ostringstream o;
        o << "s o r != c^" << lag << " at fiber " << k << ", point " << x;
        return o.str();
      }
    }
    return {};
  }
};

}  // namespace

WitnessReport verify_shift_witness(const PointedSystem &c, const PointedSystem &d,
                                   const ShiftWitness &w) {
  c.validate();
  d.validate();
  if (w.r.size() != w.s.size() || w.r.size() != w.n1.size() || w.r.size() != w.n2.size())
    throw UsageError("shift witness arrays differ in length");
  for (std::size_t f = 0; f < w.r.size(); ++f)
    if (w.r[f].empty() || w.r[f][0] != 0 || w.s[f].empty() || w.s[f][0] != 0)
      throw UsageError("shift witness maps must preserve base points");
  Checker chk{c, d, w};
  WitnessReport rep;
  for (int k = w.first_fiber; k < w.last_fiber(); ++k) {
    std::string v = chk.quasi(c, d, k, true);
    if (v.empty()) v = chk.quasi(d, c, k, false);
    if (v.empty()) v = chk.composition(k);
    if (!v.empty()) {
      rep.pass = false;
      rep.violations.push_back(std::move(v));
    }
  }
  return rep;
}

ShiftWitness identity_witness(const PointedSystem &c, int first, int last) {
  ShiftWitness w;
  w.first_fiber = first;
  for (int k = first; k <= last; ++k) {
    std::vector<int> id(static_cast<std::size_t>(c.size(k)) + 1);
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
    w.r.push_back(id);
    w.s.push_back(id);
    w.n1.push_back(0);
    w.n2.push_back(0);
  }
  return w;
}

}  // namespace conleybif
