#ifndef CONLEYBIF_CONLEY_HPP
#define CONLEYBIF_CONLEY_HPP

#include "conleybif/topology.hpp"

#include <string>
#include <vector>

namespace conleybif {

/// Finite pointed sets along fibers [first_fiber, last_fiber]. Point 0 is the
/// base point; points 1..sizes[f] are the components of (N \ L)_k. maps[f]
/// sends fiber first_fiber + f into the next fiber (one map fewer than
/// fibers).
struct PointedSystem {
  int first_fiber = 0;
  std::vector<int> sizes;
  std::vector<std::vector<int>> maps;
  /// Box ids of each component, parallel to sizes (optional; empty for
  /// abstract systems).
  std::vector<std::vector<std::vector<BoxId>>> components;

  int last_fiber() const { return first_fiber + static_cast<int>(sizes.size()) - 1; }
  int size(int k) const { return sizes.at(static_cast<std::size_t>(k - first_fiber)); }
  int apply(int k, int x) const;
  /// Composition of `steps` maps starting at fiber k.
  int iterate(int k, int steps, int x) const;
  void validate() const;
};

/// The pointed quotient map on components of N \ L. Throws RefinementError
/// when a component's image meets two or more components.
PointedSystem pointed_map(const FiberedTransitionGraph &g, const FiltrationPair &p);
PointedSystem pointed_map(const SystemDef &sys, const NoisePath &path,
                          const FiltrationPair &p);

/// Bare base points on every fiber: the trivial index.
PointedSystem base_point_system(int first_fiber, int last_fiber);

/// Chebyshev-1 connected components of one id list, ordered by smallest id.
std::vector<std::vector<BoxId>> box_components(const BoxGrid &grid,
                                               const std::vector<BoxId> &ids);

struct IndexFingerprint {
  int core_first = 0;
  std::vector<int> counts;
  std::vector<bool> l_flags;  // L nonempty on the fiber
  bool trivial = true;
  int horizon = 0;
  friend bool operator==(const IndexFingerprint &, const IndexFingerprint &) = default;
};

/// Counts and L flags on [core_first, core_last]; trivial iff `horizon`
/// steps of the pointed maps send everything to the base point from every
/// start fiber k with k + horizon <= core_last. Passing an empty L means "no
/// L recorded" and yields all-false flags.
IndexFingerprint fingerprint(const PointedSystem &ps, const RandomBoxSet &l,
                             int core_first, int core_last, int horizon);
IndexFingerprint trivial_fingerprint(int core_first, int core_last, int horizon);

/// Half the core length, at least one.
int default_horizon(int core_first, int core_last);

enum class Comparison { Equal, Different, Incomparable };
const char *to_string(Comparison c);

Comparison compare_fingerprints(const IndexFingerprint &a, const IndexFingerprint &b);

/// r_k : C_k -> D_{k + n1(k)}, s_k : D_k -> C_{k + n2(k)} on fibers
/// [first_fiber, first_fiber + r.size() - 1].
struct ShiftWitness {
  int first_fiber = 0;
  std::vector<std::vector<int>> r, s;
  std::vector<int> n1, n2;
  int last_fiber() const { return first_fiber + static_cast<int>(r.size()) - 1; }
};

struct WitnessReport {
  bool pass = true;
  std::vector<std::string> violations;  // first violation per fiber
};

/// Quasi-commutativity of r with (c, d) and of s with (d, c), with the
/// two-case lag adjustment (equal lags take the first case), plus
/// r o s = d^(n2 + n1) and s o r = c^(n1 + n2). Checked on fibers
/// [first_fiber, last_fiber - 1] of the witness; throws UsageError when a
/// composition leaves either system's window.
WitnessReport verify_shift_witness(const PointedSystem &c, const PointedSystem &d,
                                   const ShiftWitness &w);

/// r = s = identity with zero lags over [first, last].
ShiftWitness identity_witness(const PointedSystem &c, int first, int last);

}  // namespace conleybif

#endif  // CONLEYBIF_CONLEY_HPP
