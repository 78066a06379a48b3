#ifndef CONLEYBIF_TRANSITION_HPP
#define CONLEYBIF_TRANSITION_HPP

#include "conleybif/grid.hpp"
#include "conleybif/noise.hpp"
#include "conleybif/system.hpp"

#include <optional>
#include <vector>

namespace conleybif {

/// Box containing {phi(1, theta_k omega, x) : x in b}; nullopt when the
/// image is unbounded (treated as escape).
std::optional<Box> enclose_image(const SystemDef &sys, const NoisePath &path,
                                 int k, const Box &b);

/// Piecewise version; the union of the pieces contains the image.
std::optional<std::vector<Box>> enclose_pieces(const SystemDef &sys,
                                               const NoisePath &path, int k,
                                               const Box &b);

struct TransitionNode {
  BoxId id = 0;
  std::optional<Box> image;       // hull of the pieces; empty when unbounded
  std::vector<Box> pieces;        // piecewise enclosure
  std::vector<BoxId> successors;  // sorted ids in fiber k + 1
  bool escape = false;            // image misses the domain or diverges
  bool leaves_domain = false;     // image not contained in the domain
};

/// Combinatorial outer approximation of the time-one maps: edges run only
/// from fiber k to fiber k + 1.
class FiberedTransitionGraph {
 public:
  FiberedTransitionGraph() = default;
  FiberedTransitionGraph(BoxGrid grid, int first_fiber, int last_fiber);

  const BoxGrid &grid() const { return grid_; }
  /// Fibers with outgoing edges are [first_fiber(), last_fiber() - 1].
  int first_fiber() const { return first_; }
  int last_fiber() const { return last_; }

  const std::vector<TransitionNode> &sources(int k) const;
  std::vector<TransitionNode> &sources(int k);
  const TransitionNode *node(int k, BoxId id) const;

  friend bool operator==(const FiberedTransitionGraph &a,
                         const FiberedTransitionGraph &b);

 private:
  BoxGrid grid_;
  int first_ = 0;
  int last_ = 0;
  std::vector<std::vector<TransitionNode>> fibers_;
};

bool operator==(const TransitionNode &a, const TransitionNode &b);

/// Successors of every box of N in fiber k are all boxes of the full grid
/// in fiber k + 1 meeting the enclosure (face ties count).
FiberedTransitionGraph build_transition_graph(const SystemDef &sys,
                                              const NoisePath &path,
                                              const RandomBoxSet &n,
                                              unsigned threads = 1);

}  // namespace conleybif

#endif  // CONLEYBIF_TRANSITION_HPP
