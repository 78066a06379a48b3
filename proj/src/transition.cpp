#include "conleybif/transition.hpp"

#include "conleybif/errors.hpp"
#include "conleybif/parallel.hpp"

#include <algorithm>
#include <string>

namespace conleybif {

std::optional<Box> enclose_image(const SystemDef &sys, const NoisePath &path,
                                 int k, const Box &b) {
  const double xi = path.symbol_at(k);
  auto img = sys.map->enclose(k + path.offset(), xi, b);
  if (img && !img->is_finite()) return std::nullopt;
  return img;
}

std::optional<std::vector<Box>> enclose_pieces(const SystemDef &sys,
                                               const NoisePath &path, int k,
                                               const Box &b) {
  const double xi = path.symbol_at(k);
  auto pieces = sys.map->enclose_pieces(k + path.offset(), xi, b);
  if (!pieces || pieces->empty()) return std::nullopt;
  for (const Box &p : *pieces)
    if (!p.is_finite()) return std::nullopt;
  return pieces;
}

FiberedTransitionGraph::FiberedTransitionGraph(BoxGrid grid, int first_fiber,
                                               int last_fiber)
    : grid_(std::move(grid)), first_(first_fiber), last_(last_fiber) {
  if (last_fiber < first_fiber) throw UsageError("empty fiber range");
  fibers_.resize(static_cast<std::size_t>(last_fiber - first_fiber));
}

const std::vector<TransitionNode> &FiberedTransitionGraph::sources(int k) const {
  if (k < first_ || k >= last_)
    throw UsageError("fiber " + std::to_string(k) + " has no outgoing edges");
  return fibers_[static_cast<std::size_t>(k - first_)];
}

std::vector<TransitionNode> &FiberedTransitionGraph::sources(int k) {
  if (k < first_ || k >= last_)
    throw UsageError("fiber " + std::to_string(k) + " has no outgoing edges");
  return fibers_[static_cast<std::size_t>(k - first_)];
}

const TransitionNode *FiberedTransitionGraph::node(int k, BoxId id) const {
  if (k < first_ || k >= last_) return nullptr;
  const auto &f = fibers_[static_cast<std::size_t>(k - first_)];
  auto it = std::lower_bound(
      f.begin(), f.end(), id,
      [](const TransitionNode &n, BoxId v) { return n.id < v; });
  return it != f.end() && it->id == id ? &*it : nullptr;
}

bool operator==(const TransitionNode &a, const TransitionNode &b) {
  const bool same_image =
      a.image.has_value() == b.image.has_value() &&
      (!a.image || (a.image->lo == b.image->lo && a.image->hi == b.image->hi));
  return a.id == b.id && same_image && a.successors == b.successors && a.escape == b.escape &&
         a.leaves_domain == b.leaves_domain;
}

bool operator==(const FiberedTransitionGraph &a,
                const FiberedTransitionGraph &b) {
  return a.grid_ == b.grid_ && a.first_ == b.first_ && a.last_ == b.last_ &&
         a.fibers_ == b.fibers_;
}

FiberedTransitionGraph build_transition_graph(const SystemDef &sys,
                                              const NoisePath &path,
                                              const RandomBoxSet &n,
                                              unsigned threads) {
  const BoxGrid &grid = n.grid();
  FiberedTransitionGraph g(grid, n.first_fiber(), n.last_fiber());
  if (n.first_fiber() == n.last_fiber()) return g;

  struct Task {
    int k;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  for (int k = n.first_fiber(); k < n.last_fiber(); ++k) {
    const auto &ids = n.fiber(k);
    auto &nodes = g.sources(k);
    nodes.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      nodes[i].id = ids[i];
      tasks.push_back({k, i});
    }
  }
  const Box &dom = grid.domain();
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    TransitionNode &node = g.sources(tasks[t].k)[tasks[t].slot];
    auto pieces = enclose_pieces(sys, path, tasks[t].k, grid.box(node.id));
    if (!pieces) {
      node.escape = true;
      node.leaves_domain = true;
      return;
    }
    Box img = pieces->front();
    for (const Box &p : *pieces) {
      img = hull(img, p);
      if (!dom.contains(p)) node.leaves_domain = true;
      if (!dom.intersects(p)) continue;
      auto hit = grid.intersecting(p);
      node.successors.insert(node.successors.end(), hit.begin(), hit.end());
    }
    std::sort(node.successors.begin(), node.successors.end());
    node.successors.erase(std::unique(node.successors.begin(), node.successors.end()),
                          node.successors.end());
    node.image = img;
    node.pieces = std::move(*pieces);
    if (node.successors.empty()) node.escape = true;
  });
  return g;
}

}  // namespace conleybif
