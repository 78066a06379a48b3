#ifndef CONLEYBIF_SWEEP_HPP
#define CONLEYBIF_SWEEP_HPP

#include "conleybif/prime.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace conleybif {

/// lambda -> system; the noise model must not depend on lambda so that every
/// parameter value sees the same realizations.
using FamilyFactory = std::function<SystemDef(double)>;

struct SweepSettings {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds{1};
  int radius = 32;
  DecompositionParams params;
  double tol = 0.02;  // bisection target width; <= 0 skips bisection
  unsigned threads = 1;
};

struct PrimeSummary {
  Box bbox0;
  IndexFingerprint fingerprint;
  bool certified = false;
};

struct RunRecord {
  double lambda = 0;
  std::uint64_t seed = 0;
  MCount m;
  std::vector<PrimeSummary> primes;
  std::vector<UnresolvedCandidate> unresolved;
  std::size_t escaped_boxes = 0;
  std::vector<std::string> warnings;
};

enum class Verdict { Change, NoChange, Incomparable };
const char *to_string(Verdict v);

/// Same-seed comparison of two parameter values: M differs, or a prime
/// present on both sides (overlapping fiber-0 boxes) has a fingerprint
/// comparing "different". Disjoint M ranges count as a change; otherwise
/// inexact M counts are incomparable.
Verdict change_test(const RunRecord &a, const RunRecord &b);

struct Votes {
  int change = 0, no_change = 0, incomparable = 0;
};
Votes tally(const std::vector<RunRecord> &a, const std::vector<RunRecord> &b);

/// ceil((R + 1) / 2).
int majority_threshold(int realizations);

struct ChangeInterval {
  double lo = 0, hi = 0;
  Votes votes;
};

struct Certificate {
  double lo = 0, hi = 0;
  bool converged = false;
  Votes votes;
  std::vector<RunRecord> left, right;
  std::vector<std::string> warnings;
};

struct SweepReport {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  int radius = 0;
  double width = 0;
  std::vector<RunRecord> runs;  // lambda-major, seeds in order
  std::vector<ChangeInterval> changes;
  std::vector<Certificate> certificates;
  std::vector<std::string> warnings;
};

RunRecord evaluate_run(const FamilyFactory &family, double lambda, std::uint64_t seed,
                       int radius, const DecompositionParams &params);
std::vector<RunRecord> evaluate_lambda(const FamilyFactory &family, double lambda,
                                       const SweepSettings &s);

/// Runs every (lambda, seed) pair, flags intervals by majority vote and
/// bisects each flagged interval down to s.tol.
SweepReport sweep(const FamilyFactory &family, const SweepSettings &s);

/// Bisects (lo, hi) keeping the half whose change test wins more votes
/// (left on ties). Stops with a warning when neither half is conclusive.
Certificate bisect_refine(const FamilyFactory &family, double lo, double hi,
                          const SweepSettings &s, std::vector<RunRecord> lo_runs = {},
                          std::vector<RunRecord> hi_runs = {});

}  // namespace conleybif

#endif  // CONLEYBIF_SWEEP_HPP
