#include "conleybif/prime.hpp"

#include "conleybif/errors.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace conleybif {

namespace {

bool lex_less(const Box &a, const Box &b) {
  for (Eigen::Index i = 0; i < a.lo.size(); ++i) {
    if (a.lo[i] != b.lo[i]) return a.lo[i] < b.lo[i];
  }
  for (Eigen::Index i = 0; i < a.hi.size(); ++i) {
    if (a.hi[i] != b.hi[i]) return a.hi[i] < b.hi[i];
  }
  return false;
}

Box ids_bbox(const BoxGrid &grid, const std::vector<BoxId> &ids) {
  Box out = grid.box(ids.front());
  for (BoxId id : ids) out = hull(out, grid.box(id));
  return out;
}

int chebyshev(const Eigen::VectorXi &a, const Eigen::VectorXi &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

class Decomposer {
 public:
  Decomposer(const SystemDef &sys, const NoisePath &path, const DecompositionParams &p)
      : sys_(sys), path_(path), p_(p) {}

  Decomposition run(const std::optional<RandomBoxSet> &domain_n) {
    auto [first, last] = fiber_window(path_);
    if (last - first < 2 * p_.margin + 2)
      throw ConfigError("noise window too short for margin " + std::to_string(p_.margin));
    if (p_.refine_rounds < 0) throw ConfigError("grid.refine_rounds must be >= 0");
    if (p_.rings < 1) throw ConfigError("grid.rings must be >= 1");
    out_.first_fiber = first;
    out_.last_fiber = last;
    out_.core_first = first + p_.margin;
    out_.core_last = last - p_.margin;
    out_.horizon = p_.horizon > 0 ? p_.horizon : default_horizon(out_.core_first, out_.core_last);
    if (out_.horizon > out_.core_last - out_.core_first)
      throw ConfigError("index.horizon exceeds the core window");
    RandomBoxSet region = domain_n ? *domain_n
                                   : RandomBoxSet::full(build_grid(sys_.domain, p_.width), first, last);
    if (region.first_fiber() != first || region.last_fiber() != last)
      throw UsageError("searched region must span the noise window");
    out_.finest_widths = region.grid().widths();
    explore(region, 0);
    std::sort(out_.primes.begin(), out_.primes.end(),
              [](const PrimeFamily &a, const PrimeFamily &b) { return lex_less(a.bbox0(), b.bbox0()); });
    std::sort(out_.unresolved.begin(), out_.unresolved.end(),
              [](const UnresolvedCandidate &a, const UnresolvedCandidate &b) {
                return lex_less(a.bbox0, b.bbox0);
              });
    return std::move(out_);
  }

 private:
  // Each Inv box within `reach` of a cluster goes to the nearest one
  // (Chebyshev), so a seed keeps the excursions of a random set beyond its
  // recurrent core; pieces of connecting orbits that come along are pruned
  // by Inv of the neighborhood.
  std::vector<RandomBoxSet> seed_sets(const FiberedTransitionGraph &g,
                                      const InvariantFamily &inv,
                                      const std::vector<std::vector<BoxId>> &clusters,
                                      int reach) const {
    const BoxGrid &grid = inv.boxes.grid();
    std::vector<RandomBoxSet> seeds(clusters.size(),
                                    RandomBoxSet(grid, out_.first_fiber, out_.last_fiber));
    if (clusters.empty()) return seeds;
    std::vector<std::vector<Eigen::VectorXi>> cidx(clusters.size());
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (BoxId id : clusters[c]) cidx[c].push_back(grid.multi_index(id));
    const std::vector<BoxId> verts = project(inv.boxes, out_.first_fiber, out_.last_fiber);
    std::vector<int> owner(verts.size(), -1);
    for (std::size_t v = 0; v < verts.size(); ++v) {
      const Eigen::VectorXi x = grid.multi_index(verts[v]);
      int best = reach + 1;
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        int d = std::numeric_limits<int>::max();
        for (const auto &y : cidx[c]) d = std::min(d, chebyshev(x, y));
        if (d < best) {
          best = d;
          owner[v] = static_cast<int>(c);
        } else if (d == best) {
          owner[v] = -1;  // equidistant boxes belong to nobody
        }
      }
    }
    for (int k = out_.first_fiber; k <= out_.last_fiber; ++k) {
      std::vector<std::vector<BoxId>> per(clusters.size());
      for (BoxId id : inv.boxes.fiber(k)) {
        const auto v = static_cast<std::size_t>(std::lower_bound(verts.begin(), verts.end(), id) -
                                                verts.begin());
        if (owner[v] >= 0) per[static_cast<std::size_t>(owner[v])].push_back(id);
      }
      for (std::size_t c = 0; c < clusters.size(); ++c) seeds[c].set_fiber(k, std::move(per[c]));
    }
    // Off the core the clusters may miss a fiber entirely; follow the graph
    // inside Inv there.
    auto succ = [&](int k, BoxId b) -> const std::vector<BoxId> & {
      return g.node(k, b)->successors;
    };
    for (auto &seed : seeds) {
      for (int k = out_.core_last; k < out_.last_fiber; ++k) {
        if (!seed.fiber(k + 1).empty()) continue;
        std::vector<BoxId> next;
        for (BoxId b : seed.fiber(k))
          for (BoxId c : succ(k, b))
            if (inv.boxes.contains(k + 1, c)) next.push_back(c);
        seed.set_fiber(k + 1, std::move(next));
      }
      for (int k = out_.core_first; k > out_.first_fiber; --k) {
        if (!seed.fiber(k - 1).empty()) continue;
        std::vector<BoxId> prev;
        for (BoxId b : inv.boxes.fiber(k - 1)) {
          const auto &sc = succ(k - 1, b);
          if (std::any_of(sc.begin(), sc.end(), [&](BoxId c) { return seed.contains(k, c); }))
            prev.push_back(b);
        }
        seed.set_fiber(k - 1, std::move(prev));
      }
    }
    return seeds;
  }

  RandomBoxSet others_than(const std::vector<std::vector<BoxId>> &clusters, std::size_t i,
                           int rings, const BoxGrid &grid) const {
    std::vector<BoxId> ids;
    for (std::size_t j = 0; j < clusters.size(); ++j)
      if (j != i) ids.insert(ids.end(), clusters[j].begin(), clusters[j].end());
    return dilate(RandomBoxSet::constant(grid, out_.first_fiber, out_.last_fiber, std::move(ids)),
                  rings);
  }

  void note_widths(const BoxGrid &grid) {
    const Eigen::VectorXd w = grid.widths();
    if (w.size() == out_.finest_widths.size()) out_.finest_widths = out_.finest_widths.cwiseMin(w);
  }

  void explore(const RandomBoxSet &region, int level) {
    note_widths(region.grid());
    const FiberedTransitionGraph g = build_transition_graph(sys_, path_, region, p_.threads);
    if (level == 0) {
      for (int k = out_.core_first; k <= out_.core_last && k < g.last_fiber(); ++k)
        for (const TransitionNode &node : g.sources(k))
          if (node.escape) ++out_.escaped_boxes;
    }
    const InvariantFamily inv = compute_inv(g, region, p_.margin);
    if (inv.empty_on_core()) {
      if (level > 0) out_.warnings.push_back("refined region at level " + std::to_string(level) + " has empty Inv");
      return;
    }
    const auto clusters = recurrent_clusters(g, inv, p_.rings);
    if (level < p_.refine_rounds) {
      // Room for the final ring search once the next level halves the width.
      const int reach = (p_.rings + p_.ring_limit + 1) / 2 + 1;
      const std::vector<RandomBoxSet> seeds = seed_sets(g, inv, clusters, reach);
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const RandomBoxSet others = others_than(clusters, i, 1, region.grid());
        const RandomBoxSet local = subtract(intersect(dilate(seeds[i], reach), region), others);
        const RandomBoxSet next = RandomBoxSet::constant(
            region.grid(), out_.first_fiber, out_.last_fiber,
            project(local, out_.core_first, out_.core_last));
        explore(refine(next, 2), level + 1);
      }
      return;
    }
    finalize(g, inv, region, clusters, level);
  }

  void finalize(const FiberedTransitionGraph &g, const InvariantFamily &inv,
                const RandomBoxSet &region, const std::vector<std::vector<BoxId>> &clusters,
                int level) {
    const BoxGrid &grid = region.grid();
    // Seeds hug the clusters first and widen only when that fails.
    std::vector<std::vector<RandomBoxSet>> seeds;
    for (int t = 0; t <= p_.rings; ++t) seeds.push_back(seed_sets(g, inv, clusters, t));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const RandomBoxSet others = others_than(clusters, i, p_.rings + 1, grid);
      auto nbhd = [&](int t, int r) {
        return subtract(intersect(dilate(seeds[static_cast<std::size_t>(t)][i], r), region),
                        others);
      };

      std::optional<PrimeFamily> prime;
      std::string reason = "no isolating neighborhood within the ring budget";
      // Returns false once Inv(nb) is empty, as wider rings will not help.
      auto attempt = [&](RandomBoxSet nb) {
        InvariantFamily s = compute_inv(g, nb, p_.margin);
        if (s.empty_on_core()) return false;
        if (!is_isolating_neighborhood(nb, s).isolating) {
          reason = "Inv meets the neighborhood boundary";
          return true;
        }
        try {
          FiltrationPair pair = build_filtration_pair(g, nb, s, p_.ring_limit);
          PointedSystem ps = pointed_map(g, pair);
          PrimeFamily pf;
          pf.fingerprint = fingerprint(ps, pair.l, out_.core_first, out_.core_last, out_.horizon);
          pf.boxes = std::move(s);
          pf.neighborhood = std::move(nb);
          pf.exit_layer = std::move(pair.l);
          pf.resolution_certified = grid.widths();
          prime = std::move(pf);
        } catch (const FiltrationFailure &e) {
          reason = e.what();
        } catch (const RefinementError &e) {
          reason = e.what();
        }
        return true;
      };
      for (int t = 0; t <= p_.rings && !prime; ++t)
        for (int r = p_.rings; r <= p_.rings + p_.ring_limit && !prime; ++r) {
          if (!attempt(nbhd(t, r))) break;
        }
      if (!prime) {
        if (compute_inv(g, nbhd(p_.rings, p_.rings), p_.margin).empty_on_core()) {
          out_.warnings.push_back("candidate near " + describe(ids_bbox(grid, clusters[i])) +
                                  " has empty Inv in its neighborhood; dropped");
          continue;
        }
        out_.unresolved.push_back({ids_bbox(grid, clusters[i]), reason});
        continue;
      }
      certify(std::move(*prime), level);
    }
  }

  void certify(PrimeFamily prime, int level) {
    if (!p_.certify || level > p_.refine_rounds) {
      if (p_.certify)
        out_.warnings.push_back("prime near " + describe(prime.bbox0()) +
                                " not certified: split test beyond the refinement budget");
      out_.primes.push_back(std::move(prime));
      return;
    }
    const RandomBoxSet fine = refine(
        RandomBoxSet::constant(prime.neighborhood.grid(), out_.first_fiber, out_.last_fiber,
                               project(prime.neighborhood, out_.core_first, out_.core_last)),
        2);
    const FiberedTransitionGraph g2 = build_transition_graph(sys_, path_, fine, p_.threads);
    const InvariantFamily inv2 = compute_inv(g2, fine, p_.margin);
    const auto cl2 = inv2.empty_on_core() ? std::vector<std::vector<BoxId>>{}
                                          : recurrent_clusters(g2, inv2, p_.rings);
    if (cl2.empty()) {
      out_.warnings.push_back("candidate near " + describe(prime.bbox0()) +
                              " vanished one level finer; dropped");
      return;
    }
    if (cl2.size() == 1) {
      prime.certified = true;
      out_.primes.push_back(std::move(prime));
      return;
    }
    out_.warnings.push_back("candidate near " + describe(prime.bbox0()) + " splits into " +
                            std::to_string(cl2.size()) + " one level finer; refined");
    note_widths(fine.grid());
    finalize(g2, inv2, fine, cl2, level + 1);
  }

  static std::string describe(const Box &b) {
    std::ostringstream o;
    o << "[";
    for (Eigen::Index i = 0; i < b.lo.size(); ++i)
      o << (i ? " x " : "") << b.lo[i] << "," << b.hi[i];
    o << "]";
    return o.str();
  }

  const SystemDef &sys_;
  const NoisePath &path_;
  DecompositionParams p_;
  Decomposition out_;
};

}  // namespace

Box PrimeFamily::bbox0() const {
  Box b;
  if (boxes.boxes.has_fiber(0) && boxes.boxes.bbox(0, b)) return b;
  bool found = false;
  for (int k = boxes.core_first; k <= boxes.core_last; ++k) {
    Box bk;
    if (!boxes.boxes.bbox(k, bk)) continue;
    b = found ? hull(b, bk) : bk;
    found = true;
  }
  if (!found) throw UsageError("prime family is empty on its core");
  return b;
}

std::pair<int, int> fiber_window(const NoisePath &path) {
  return {-path.window_radius() - path.offset(), path.window_radius() - path.offset()};
}

std::vector<std::vector<BoxId>> recurrent_clusters(const FiberedTransitionGraph &g,
                                                   const InvariantFamily &inv, int rings) {
  const int c0 = inv.core_first, c1 = inv.core_last;
  const std::vector<BoxId> verts = project(inv.boxes, c0, c1);
  auto index_of = [&](BoxId id) {
    return static_cast<std::size_t>(std::lower_bound(verts.begin(), verts.end(), id) - verts.begin());
  };
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph graph(verts.size());
  std::vector<char> self_loop(verts.size(), 0);
  auto in_verts = [&](BoxId id) { return std::binary_search(verts.begin(), verts.end(), id); };
  // Edges from every core fiber on which a projected box is present: the
  // union over the sampled noise symbols, so a random orbit wandering through
  // a band still registers as recurrent.
  for (int k = c0; k < c1; ++k)
    for (const TransitionNode &node : g.sources(k)) {
      if (!in_verts(node.id)) continue;
      const std::size_t u = index_of(node.id);
      for (BoxId s : node.successors) {
        if (!in_verts(s)) continue;
        const std::size_t v = index_of(s);
        if (u == v)
          self_loop[u] = 1;
        else
          boost::add_edge(u, v, graph);
      }
    }
  std::vector<int> comp(verts.size());
  const int ncomp = verts.empty() ? 0 : boost::strong_components(graph, comp.data());
  std::vector<std::size_t> comp_size(static_cast<std::size_t>(ncomp), 0);
  std::vector<char> recurrent(static_cast<std::size_t>(ncomp), 0);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const auto c = static_cast<std::size_t>(comp[v]);
    if (++comp_size[c] > 1 || self_loop[v]) recurrent[c] = 1;
  }

  std::vector<std::size_t> boxes;  // vertices in recurrent components
  for (std::size_t v = 0; v < verts.size(); ++v)
    if (recurrent[static_cast<std::size_t>(comp[v])]) boxes.push_back(v);
  const BoxGrid &grid = inv.boxes.grid();
  std::vector<Eigen::VectorXi> idx;
  idx.reserve(boxes.size());
  for (std::size_t v : boxes) idx.push_back(grid.multi_index(verts[v]));

  UnionFind uf(boxes.size());
  std::vector<std::size_t> first_of(static_cast<std::size_t>(ncomp), boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto c = static_cast<std::size_t>(comp[boxes[i]]);
    if (first_of[c] == boxes.size())
      first_of[c] = i;
    else
      uf.join(first_of[c], i);
  }
  const int reach = 2 * rings + 1;
  if (grid.dim() == 1) {
    // Ids are sorted along the line, so only neighbors in order can be close.
    for (std::size_t i = 1; i < boxes.size(); ++i)
      if (chebyshev(idx[i - 1], idx[i]) <= reach) uf.join(i - 1, i);
  } else {
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j)
        if (chebyshev(idx[i], idx[j]) <= reach) uf.join(i, j);
  }
  std::vector<std::vector<BoxId>> clusters;
  std::vector<std::size_t> slot(boxes.size(), boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::size_t root = uf.find(i);
    if (slot[root] == boxes.size()) {
      slot[root] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[root]].push_back(verts[boxes[i]]);
  }
  return clusters;
}

Decomposition prime_decomposition(const SystemDef &sys, const NoisePath &path,
                                  const DecompositionParams &params,
                                  const std::optional<RandomBoxSet> &domain_n) {
  return Decomposer(sys, path, params).run(domain_n);
}

MCount count_M(const Decomposition &d) {
  const int resolved = static_cast<int>(d.primes.size());
  return {resolved, resolved + static_cast<int>(d.unresolved.size())};
}

DisjointReport check_pairwise_disjoint(const std::vector<PrimeFamily> &primes) {
  DisjointReport rep;
  for (std::size_t i = 0; i < primes.size(); ++i)
    for (std::size_t j = i + 1; j < primes.size(); ++j) {
      const RandomBoxSet &a = primes[i].boxes.boxes;
      const RandomBoxSet b = to_grid(primes[j].boxes.boxes, a.grid());
      const RandomBoxSet a2 = to_grid(a, b.grid());
      const int c0 = std::max(primes[i].boxes.core_first, primes[j].boxes.core_first);
      const int c1 = std::min(primes[i].boxes.core_last, primes[j].boxes.core_last);
      const RandomBoxSet common = intersect(a2, b);
      for (int k = c0; k <= c1; ++k)
        if (!common.fiber(k).empty()) {
          std::ostringstream o;
          o << "primes " << i << " and " << j << " share box " << common.fiber(k).front()
            << " at fiber " << k;
          rep.disjoint = false;
          rep.witness = o.str();
          return rep;
        }
    }
  return rep;
}

RandomBoxSet to_grid(const RandomBoxSet &n, const BoxGrid &grid) {
  if (n.grid() == grid) return n;
  const BoxGrid &from = n.grid();
  if (from.dim() != grid.dim() || !(from.domain().lo == grid.domain().lo) ||
      !(from.domain().hi == grid.domain().hi))
    return n;  // incompatible: caller sees the coarser set unchanged
  const int factor = grid.counts()[0] / from.counts()[0];
  if (factor < 2 || (grid.counts().array() != from.counts().array() * factor).any()) return n;
  return refine(n, factor);
}

bool union_isolated_check(const PrimeFamily &p1, const PrimeFamily &p2, const SystemDef &sys,
                          const NoisePath &path, int margin) {
  if (!check_pairwise_disjoint({p1, p2}).disjoint)
    throw UsageError("union check needs disjoint primes");
  RandomBoxSet n1 = to_grid(p1.neighborhood, p2.neighborhood.grid());
  RandomBoxSet n2 = to_grid(p2.neighborhood, n1.grid());
  n1 = to_grid(n1, n2.grid());
  if (!(n1.grid() == n2.grid())) throw UsageError("primes live on incompatible grids");
  if (!intersect(dilate(n1, 1), n2).empty())
    throw UsageError("union check needs non-adjacent neighborhoods");
  const RandomBoxSet u = unite(n1, n2);
  const FiberedTransitionGraph g = build_transition_graph(sys, path, u);
  return is_isolating_neighborhood(u, compute_inv(g, u, margin)).isolating;
}

}  // namespace conleybif
