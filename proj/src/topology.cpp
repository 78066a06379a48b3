#include "conleybif/topology.hpp"

#include "conleybif/errors.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace conleybif {

namespace {

std::size_t local_index(const std::vector<BoxId> &ids, BoxId id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  return it != ids.end() && *it == id ? static_cast<std::size_t>(it - ids.begin())
                                      : ids.size();
}

const TransitionNode &require_node(const FiberedTransitionGraph &g, int k,
                                   BoxId id) {
  const TransitionNode *node = g.node(k, id);
  if (!node)
    throw UsageError("transition graph lacks box " + std::to_string(id) +
                     " at fiber " + std::to_string(k));
  return *node;
}

int margin_of(const InvariantFamily &inv) {
  return inv.core_first - inv.boxes.first_fiber();
}

}  // namespace

InvariantFamily compute_inv(const FiberedTransitionGraph &g,
                            const RandomBoxSet &n, int margin) {
  const int first = n.first_fiber();
  const int last = n.last_fiber();
  if (margin < 0 || last - first < 2 * margin)
    throw UsageError("margin leaves an empty core window");
  const std::size_t nf = static_cast<std::size_t>(last - first + 1);

  std::vector<const std::vector<BoxId> *> ids(nf);
  std::vector<std::vector<std::vector<std::size_t>>> succ(nf), pred(nf);
  std::vector<std::vector<int>> succ_count(nf), pred_count(nf);
  std::vector<std::vector<char>> alive(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    ids[f] = &n.fiber(first + static_cast<int>(f));
    const std::size_t m = ids[f]->size();
    succ[f].resize(m);
    pred[f].resize(m);
    succ_count[f].assign(m, 0);
    pred_count[f].assign(m, 0);
    alive[f].assign(m, 1);
  }

  std::deque<std::pair<std::size_t, std::size_t>> doomed;
  for (std::size_t f = 0; f + 1 < nf; ++f) {
    const int k = first + static_cast<int>(f);
    for (std::size_t i = 0; i < ids[f]->size(); ++i) {
      const TransitionNode &node = require_node(g, k, (*ids[f])[i]);
      if (node.escape) {
        alive[f][i] = 0;
        continue;
      }
      for (BoxId s : node.successors) {
        const std::size_t j = local_index(*ids[f + 1], s);
        if (j == ids[f + 1]->size()) continue;
        succ[f][i].push_back(j);
        pred[f + 1][j].push_back(i);
      }
    }
  }
  // Counts cover edges between live boxes only; every box enqueued below
  // decrements its neighbors exactly once.
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < ids[f]->size(); ++i) {
      if (!alive[f][i]) continue;
      if (f + 1 < nf)
        for (std::size_t j : succ[f][i])
          if (alive[f + 1][j]) ++succ_count[f][i];
      if (f > 0)
        for (std::size_t j : pred[f][i])
          if (alive[f - 1][j]) ++pred_count[f][i];
    }
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < ids[f]->size(); ++i) {
      if (!alive[f][i]) continue;
      if ((f + 1 < nf && succ_count[f][i] == 0) ||
          (f > 0 && pred_count[f][i] == 0)) {
        alive[f][i] = 0;
        doomed.emplace_back(f, i);
      }
    }

  while (!doomed.empty()) {
    auto [f, i] = doomed.front();
    doomed.pop_front();
    if (f + 1 < nf)
      for (std::size_t j : succ[f][i])
        if (alive[f + 1][j] && --pred_count[f + 1][j] == 0) {
          alive[f + 1][j] = 0;
          doomed.emplace_back(f + 1, j);
        }
    if (f > 0)
      for (std::size_t j : pred[f][i])
        if (alive[f - 1][j] && --succ_count[f - 1][j] == 0) {
          alive[f - 1][j] = 0;
          doomed.emplace_back(f - 1, j);
        }
  }

  InvariantFamily inv;
  inv.boxes = RandomBoxSet(n.grid(), first, last);
  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<BoxId> keep;
    for (std::size_t i = 0; i < ids[f]->size(); ++i)
      if (alive[f][i]) keep.push_back((*ids[f])[i]);
    inv.boxes.set_fiber(first + static_cast<int>(f), std::move(keep));
  }
  inv.core_first = first + margin;
  inv.core_last = last - margin;
  inv.resolution = n.grid().widths();
  return inv;
}

IsolationResult is_isolating_neighborhood(const RandomBoxSet &n,
                                          const InvariantFamily &inv) {
  const RandomBoxSet interior = combinatorial_interior(n);
  IsolationResult r;
  for (int k = inv.core_first; k <= inv.core_last; ++k)
    for (BoxId id : inv.boxes.fiber(k))
      if (!interior.contains(k, id)) r.violations.push_back({k, id});
  r.isolating = r.violations.empty();
  return r;
}

bool is_isolating_block(const FiberedTransitionGraph &g, const RandomBoxSet &n,
                        int margin) {
  margin = std::max(margin, 1);
  const RandomBoxSet interior = combinatorial_interior(n);
  for (int k = n.first_fiber() + margin; k <= n.last_fiber() - margin; ++k) {
    std::vector<BoxId> reached;
    for (BoxId a : n.fiber(k - 1))
      for (BoxId s : require_node(g, k - 1, a).successors)
        if (n.contains(k, s)) reached.push_back(s);
    std::sort(reached.begin(), reached.end());
    reached.erase(std::unique(reached.begin(), reached.end()), reached.end());
    for (BoxId b : reached) {
      const auto &succ = require_node(g, k, b).successors;
      const bool leads_on = std::any_of(succ.begin(), succ.end(), [&](BoxId s) {
        return n.contains(k + 1, s);
      });
      if (leads_on && !interior.contains(k, b)) return false;
    }
  }
  return true;
}

bool is_isolating_block(const SystemDef &sys, const NoisePath &path,
                        const RandomBoxSet &n, int margin) {
  return is_isolating_block(build_transition_graph(sys, path, n), n, margin);
}

RandomBoxSet exit_set(const FiberedTransitionGraph &g, const RandomBoxSet &n) {
  const RandomBoxSet interior = combinatorial_interior(n);
  const BoxGrid &grid = n.grid();
  RandomBoxSet out(grid, n.first_fiber(), n.last_fiber());
  for (int k = n.first_fiber(); k < n.last_fiber(); ++k) {
    std::vector<BoxId> ex;
    for (BoxId b : n.fiber(k)) {
      const TransitionNode &node = require_node(g, k, b);
      bool exits = node.escape || node.leaves_domain || node.pieces.empty();
      for (std::size_t p = 0; p < node.pieces.size() && !exits; ++p)
        for (BoxId c : grid.covering(node.pieces[p]))
          if (!interior.contains(k + 1, c)) {
            exits = true;
            break;
          }
      if (exits) ex.push_back(b);
    }
    out.set_fiber(k, std::move(ex));
  }
  return out;
}

RandomBoxSet exit_set(const SystemDef &sys, const NoisePath &path,
                      const RandomBoxSet &n) {
  return exit_set(build_transition_graph(sys, path, n), n);
}

FiltrationReport verify_filtration_pair(const FiberedTransitionGraph &g,
                                        const FiltrationPair &p) {
  const int c0 = p.s.core_first;
  const int c1 = p.s.core_last;
  if (!subset_of(p.l, p.n, p.n.first_fiber(), p.n.last_fiber()))
    throw UsageError("L must be contained in N");
  FiltrationReport rep;
  std::ostringstream why;

  // (i) Inv of the box set N \ L sits in its interior and matches S up to
  // one ring.
  const RandomBoxSet rest = subtract(p.n, p.l);
  const InvariantFamily inv_rest = compute_inv(g, rest, margin_of(p.s));
  const bool inside = is_isolating_neighborhood(rest, inv_rest).isolating;
  const bool covers = subset_of(p.s.boxes, dilate(inv_rest.boxes, 1), c0, c1);
  const bool within = subset_of(inv_rest.boxes, dilate(p.s.boxes, 1), c0, c1);
  rep.isolates = inside && covers && within;
  if (!inside) why << "(i) Inv(N\\L) touches the boundary of N\\L; ";
  if (!covers || !within) why << "(i) Inv(N\\L) differs from S by more than one ring; ";

  // (ii) the exit set is contained in L.
  const RandomBoxSet ex = exit_set(g, p.n);
  rep.neighbors_exit = subset_of(ex, p.l, c0, c1);
  if (!rep.neighbors_exit) why << "(ii) exit set not contained in L; ";

  // (iii) no box of L_k has a successor in (N \ L)_{k+1}.
  rep.l_stays_out = true;
  for (int k = c0; k <= c1 && k < p.n.last_fiber() && rep.l_stays_out; ++k)
    for (BoxId b : p.l.fiber(k)) {
      const auto &succ = require_node(g, k, b).successors;
      if (std::any_of(succ.begin(), succ.end(),
                      [&](BoxId s) { return rest.contains(k + 1, s); })) {
        rep.l_stays_out = false;
        why << "(iii) L box " << b << " at fiber " << k << " maps into N\\L; ";
        break;
      }
    }
  rep.detail = why.str();
  return rep;
}

FiltrationReport verify_filtration_pair(const SystemDef &sys,
                                        const NoisePath &path,
                                        const FiltrationPair &p) {
  return verify_filtration_pair(build_transition_graph(sys, path, p.n), p);
}

RandomBoxSet forward_closure(const FiberedTransitionGraph &g, const RandomBoxSet &l,
                             const RandomBoxSet &n) {
  RandomBoxSet out = l;
  for (int k = n.first_fiber(); k < n.last_fiber(); ++k) {
    std::vector<BoxId> next = out.fiber(k + 1);
    for (BoxId b : out.fiber(k))
      for (BoxId c : require_node(g, k, b).successors)
        if (n.contains(k + 1, c)) next.push_back(c);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    out.set_fiber(k + 1, std::move(next));
  }
  return out;
}

FiltrationPair build_filtration_pair(const FiberedTransitionGraph &g,
                                     const RandomBoxSet &n,
                                     const InvariantFamily &s, int ring_limit) {
  if (!is_isolating_neighborhood(n, s).isolating)
    throw UsageError("build_filtration_pair: N is not an isolating neighborhood of S");
  FiltrationPair p{n, exit_set(g, n), s};
  FiltrationReport rep;
  for (int j = 0; j <= ring_limit; ++j) {
    rep = verify_filtration_pair(g, p);
    if (rep.ok()) return p;
    // Boxes that the exit layer feeds into must join it as well.
    FiltrationPair closed{n, forward_closure(g, p.l, n), s};
    if (verify_filtration_pair(g, closed).ok()) return closed;
    p.l = dilate_within(p.l, n);
  }
  throw FiltrationFailure("no filtration pair within " +
                          std::to_string(ring_limit) + " rings: " + rep.detail);
}

FiltrationPair build_filtration_pair(const SystemDef &sys,
                                     const NoisePath &path,
                                     const RandomBoxSet &n,
                                     const InvariantFamily &s, int ring_limit) {
  return build_filtration_pair(build_transition_graph(sys, path, n), n, s,
                               ring_limit);
}

}  // namespace conleybif
