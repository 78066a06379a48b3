#ifndef CONLEYBIF_TOPOLOGY_HPP
#define CONLEYBIF_TOPOLOGY_HPP

#include "conleybif/transition.hpp"

#include <string>
#include <vector>

namespace conleybif {

/// Combinatorial Inv N, kept on every fiber of N but asserted only on the
/// core window [first + margin, last - margin].
struct InvariantFamily {
  RandomBoxSet boxes;
  int core_first = 0;
  int core_last = 0;
  Eigen::VectorXd resolution;

  bool empty_on_core() const { return boxes.empty_on(core_first, core_last); }
};

struct FiberBox {
  int fiber;
  BoxId box;
  friend bool operator==(const FiberBox &, const FiberBox &) = default;
};

struct IsolationResult {
  bool isolating = false;
  std::vector<FiberBox> violations;  // Inv boxes outside int N
};

/// Bidirectional viability pruning: repeatedly deletes boxes without a
/// successor in N at k + 1 or a predecessor in N at k - 1 (escape-flagged
/// boxes first). G must hold every box of N as a source.
InvariantFamily compute_inv(const FiberedTransitionGraph &g,
                            const RandomBoxSet &n, int margin = 4);

/// Inv N inside the combinatorial interior of N on every core fiber.
IsolationResult is_isolating_neighborhood(const RandomBoxSet &n,
                                          const InvariantFamily &inv);

/// Boxes of N_k reached from N_{k-1} that also reach N_{k+1} must lie in
/// int N_k, on core fibers.
bool is_isolating_block(const FiberedTransitionGraph &g, const RandomBoxSet &n,
                        int margin = 4);
bool is_isolating_block(const SystemDef &sys, const NoisePath &path,
                        const RandomBoxSet &n, int margin = 4);

/// Boxes of N_k whose enclosure is not covered by int N_{k+1}.
RandomBoxSet exit_set(const FiberedTransitionGraph &g, const RandomBoxSet &n);
RandomBoxSet exit_set(const SystemDef &sys, const NoisePath &path,
                      const RandomBoxSet &n);

/// Smallest superset of L inside N with every successor of L_k in N_{k+1}
/// also in L_{k+1}.
RandomBoxSet forward_closure(const FiberedTransitionGraph &g, const RandomBoxSet &l,
                             const RandomBoxSet &n);

struct FiltrationPair {
  RandomBoxSet n;
  RandomBoxSet l;
  InvariantFamily s;
};

struct FiltrationReport {
  bool isolates = false;        // (i) cl(N \ L) isolates S
  bool neighbors_exit = false;  // (ii) L is a neighborhood of the exit set
  bool l_stays_out = false;     // (iii) phi(L) misses cl(N \ L)
  std::string detail;

  bool ok() const { return isolates && neighbors_exit && l_stays_out; }
};

FiltrationReport verify_filtration_pair(const FiberedTransitionGraph &g,
                                        const FiltrationPair &p);
FiltrationReport verify_filtration_pair(const SystemDef &sys,
                                        const NoisePath &path,
                                        const FiltrationPair &p);

/// L_0 = exit set, L_{j+1} = L_j grown by one ring inside N; returns the
/// first verified pair with j <= ring_limit, trying each L_j as is and
/// closed forward inside N. Throws UsageError when N does
/// not isolate S and FiltrationFailure when the ring budget runs out.
FiltrationPair build_filtration_pair(const FiberedTransitionGraph &g,
                                     const RandomBoxSet &n,
                                     const InvariantFamily &s,
                                     int ring_limit = 5);
FiltrationPair build_filtration_pair(const SystemDef &sys,
                                     const NoisePath &path,
                                     const RandomBoxSet &n,
                                     const InvariantFamily &s,
                                     int ring_limit = 5);

}  // namespace conleybif

#endif  // CONLEYBIF_TOPOLOGY_HPP
