#ifndef CONLEYBIF_PRIME_HPP
#define CONLEYBIF_PRIME_HPP

#include "conleybif/conley.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conleybif {

struct DecompositionParams {
  double width = 0.05;     // initial box width
  int refine_rounds = 3;   // bisection rounds applied to candidate regions
  int margin = 4;          // fibers dropped at each window edge
  int rings = 2;           // neighborhood thickness around a candidate
  int ring_limit = 5;      // extra rings tried for isolation and for L
  int horizon = 0;         // fingerprint horizon; 0 = half the core
  unsigned threads = 1;    // graph construction workers
  bool certify = true;     // run the one-finer split test on each prime
};

struct PrimeFamily {
  InvariantFamily boxes;
  RandomBoxSet neighborhood;
  RandomBoxSet exit_layer;  // L of the verified filtration pair
  IndexFingerprint fingerprint;
  Eigen::VectorXd resolution_certified;
  bool certified = false;  // survived the split test one level finer
  /// Bounding box of the fiber-0 slice of Inv.
  Box bbox0() const;
};

struct UnresolvedCandidate {
  Box bbox0;  // projected bounding box of the candidate
  std::string reason;
};

struct Decomposition {
  std::vector<PrimeFamily> primes;
  std::vector<UnresolvedCandidate> unresolved;
  std::vector<std::string> warnings;
  int first_fiber = 0, last_fiber = 0;
  int core_first = 0, core_last = 0;
  int horizon = 0;
  std::size_t escaped_boxes = 0;  // escape-flagged boxes on the core, level 0
  Eigen::VectorXd finest_widths;
};

/// Fiber window usable with `path`: [-K - offset, K - offset].
std::pair<int, int> fiber_window(const NoisePath &path);

/// Splits Inv of the full grid into candidates (clusters of recurrent
/// strongly connected components of the core-projected graph), refines each
/// candidate region `refine_rounds` times, and certifies the isolated ones
/// as primes. Candidates that never isolate are returned as unresolved.
/// domain_n overrides the full grid as the searched region.
Decomposition prime_decomposition(const SystemDef &sys, const NoisePath &path,
                                  const DecompositionParams &params,
                                  const std::optional<RandomBoxSet> &domain_n = {});

/// Recurrent SCC clusters of the core-projected graph on the boxes of inv,
/// with edges taken from every core fiber of g. Clusters closer than
/// 2 * rings + 2 (Chebyshev, in boxes) merge.
std::vector<std::vector<BoxId>> recurrent_clusters(const FiberedTransitionGraph &g,
                                                   const InvariantFamily &inv,
                                                   int rings);

struct MCount {
  int lo = 0, hi = 0;
  bool exact() const { return lo == hi; }
  friend bool operator==(const MCount &, const MCount &) = default;
};
MCount count_M(const Decomposition &d);

struct DisjointReport {
  bool disjoint = true;
  std::string witness;
};
DisjointReport check_pairwise_disjoint(const std::vector<PrimeFamily> &primes);

/// Isolation of the union of two primes' neighborhoods. Throws UsageError
/// unless the primes are disjoint and their neighborhoods are not adjacent.
bool union_isolated_check(const PrimeFamily &p1, const PrimeFamily &p2,
                          const SystemDef &sys, const NoisePath &path,
                          int margin = 4);

/// Re-expresses a set on a finer grid of the same domain.
RandomBoxSet to_grid(const RandomBoxSet &n, const BoxGrid &grid);

}  // namespace conleybif

#endif  // CONLEYBIF_PRIME_HPP
