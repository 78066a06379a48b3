// Change tests, voting, sweeps and bisection
#include "doctest.h"

#include "conleybif/config.hpp"
#include "conleybif/errors.hpp"
#include "conleybif/report.hpp"
#include "conleybif/sweep.hpp"

using namespace conleybif;

namespace {

IndexFingerprint persistent_fp(bool l_flag) {
  IndexFingerprint f;
  f.core_first = 0;
  f.counts.assign(5, 1);
  f.l_flags.assign(5, l_flag);
  f.trivial = false;
  f.horizon = 2;
  return f;
}

RunRecord record(MCount m, std::vector<PrimeSummary> primes = {}) {
  RunRecord r;
  r.m = m;
  r.primes = std::move(primes);
  return r;
}

PrimeSummary prime_at(double lo, double hi, IndexFingerprint f) {
  return {box1(lo, hi), std::move(f), true};
}

FamilyFactory ex1_family() {
  return [](double l) { return make_example1(l, NoiseModel::constant(1.0)); };
}

FamilyFactory pitchfork_family() {
  return [](double l) { return make_pitchfork(l, NoiseModel::constant(0.0)); };
}

std::vector<int> m_values(const SweepReport &rep) {
  std::vector<int> m;
  for (const RunRecord &r : rep.runs) {
    CHECK(r.m.exact());
    m.push_back(r.m.lo);
  }
  return m;
}

}  // namespace

// =============================================================================
// Change test
// =============================================================================

TEST_CASE("different M is a change") {
  CHECK(change_test(record({2, 2}), record({0, 0})) == Verdict::Change);
}

TEST_CASE("same M with matching primes is no change") {
  auto a = record({1, 1}, {prime_at(-0.1, 0.1, persistent_fp(false))});
  auto b = record({1, 1}, {prime_at(-0.05, 0.15, persistent_fp(false))});
  CHECK(change_test(a, b) == Verdict::NoChange);
}

TEST_CASE("a persisting prime whose index differs is a change") {
  auto a = record({1, 1}, {prime_at(-0.1, 0.1, persistent_fp(false))});
  IndexFingerprint t = trivial_fingerprint(0, 4, 2);
  auto b = record({1, 1}, {prime_at(-0.05, 0.15, t)});
  CHECK(change_test(a, b) == Verdict::Change);
}

TEST_CASE("an L flag flip alone is not a change") {
  auto a = record({1, 1}, {prime_at(-0.1, 0.1, persistent_fp(false))});
  auto b = record({1, 1}, {prime_at(-0.1, 0.1, persistent_fp(true))});
  CHECK(change_test(a, b) == Verdict::NoChange);
}

TEST_CASE("primes that do not overlap are not compared") {
  auto a = record({1, 1}, {prime_at(-0.5, -0.4, persistent_fp(false))});
  auto b = record({1, 1}, {prime_at(0.4, 0.5, trivial_fingerprint(0, 4, 2))});
  CHECK(change_test(a, b) == Verdict::NoChange);
}

TEST_CASE("overlapping inexact M ranges are incomparable") {
  CHECK(change_test(record({1, 2}), record({2, 2})) == Verdict::Incomparable);
  CHECK(change_test(record({1, 2}), record({1, 2})) == Verdict::Incomparable);
}

TEST_CASE("disjoint M ranges are a change") {
  CHECK(change_test(record({1, 2}), record({0, 0})) == Verdict::Change);
  CHECK(change_test(record({3, 3}), record({1, 2})) == Verdict::Change);
}

TEST_CASE("verdicts have names") {
  CHECK(std::string(to_string(Verdict::Change)) == "change");
  CHECK(std::string(to_string(Verdict::NoChange)) == "no-change");
  CHECK(std::string(to_string(Verdict::Incomparable)) == "incomparable");
}

// =============================================================================
// Voting
// =============================================================================

TEST_CASE("majority threshold is ceil((R + 1) / 2)") {
  CHECK(majority_threshold(1) == 1);
  CHECK(majority_threshold(2) == 2);
  CHECK(majority_threshold(3) == 2);
  CHECK(majority_threshold(8) == 5);
}

TEST_CASE("tally pairs records by position") {
  std::vector<RunRecord> a = {record({2, 2}), record({2, 2}), record({1, 2})};
  std::vector<RunRecord> b = {record({0, 0}), record({2, 2}), record({2, 2})};
  Votes v = tally(a, b);
  CHECK(v.change == 1);
  CHECK(v.no_change == 1);
  CHECK(v.incomparable == 1);
  CHECK_THROWS_AS(tally(a, {record({0, 0})}), UsageError);
}

// =============================================================================
// Sweeps
// =============================================================================

TEST_CASE("example 1 sweep flags the interval around zero") {
  SweepSettings s;
  s.lambdas = {-0.3, -0.2, -0.1, 0.1, 0.2, 0.3};
  s.tol = 0.02;
  SweepReport rep = sweep(ex1_family(), s);
  // At -0.3 the right-branch fixed point -sqrt(0.3) lies past the jump, so the
  // attractor is not resolved at the default budget.
  REQUIRE(rep.runs.size() == 6u);
  CHECK(rep.runs[0].m.lo <= 2);
  CHECK(rep.runs[0].m.hi >= 2);
  rep.runs.erase(rep.runs.begin());
  CHECK(m_values(rep) == std::vector<int>{2, 2, 0, 0, 0});
  REQUIRE(rep.changes.size() == 1u);
  CHECK(rep.changes[0].lo == -0.1);
  CHECK(rep.changes[0].hi == 0.1);
  REQUIRE(rep.certificates.size() == 1u);
  const Certificate &c = rep.certificates[0];
  CHECK(c.converged);
  CHECK(c.lo <= 0.0);
  CHECK(c.hi >= 0.0);
  CHECK(c.hi - c.lo <= 0.02 + 1e-12);
  REQUIRE(c.left.size() == 1u);
  CHECK(c.left[0].m == MCount{2, 2});
  // The bracket may end at 0, where the semistable point 0 is still an
  // isolated invariant set.
  CHECK(c.right[0].m.exact());
  CHECK(c.right[0].m.hi == (c.hi == 0.0 ? 1 : 0));
}

TEST_CASE("pitchfork sweep flags the interval around zero") {
  SweepSettings s;
  s.lambdas = {-0.5, -0.25, 0.25, 0.5};
  s.tol = 0;
  SweepReport rep = sweep(pitchfork_family(), s);
  CHECK(m_values(rep) == std::vector<int>{1, 1, 3, 3});
  REQUIRE(rep.changes.size() == 1u);
  CHECK(rep.changes[0].lo == -0.25);
  CHECK(rep.changes[0].hi == 0.25);
  CHECK(rep.certificates.empty());
}

TEST_CASE("a narrow interval is returned unchanged") {
  SweepSettings s;
  s.lambdas = {-0.01, 0.005};
  s.tol = 0.02;
  Certificate c = bisect_refine(ex1_family(), -0.01, 0.005, s);
  CHECK(c.lo == -0.01);
  CHECK(c.hi == 0.005);
  CHECK(c.converged);
}

TEST_CASE("sweep settings are validated") {
  SweepSettings s;
  s.lambdas = {0.1, -0.1};
  CHECK_THROWS_AS(sweep(ex1_family(), s), ConfigError);
  s.lambdas = {-0.1, 0.1};
  s.seeds.clear();
  CHECK_THROWS_AS(sweep(ex1_family(), s), ConfigError);
}

// =============================================================================
// Properties
// =============================================================================

TEST_CASE("property: sweeps are byte-identical across reruns and thread counts") {
  RunConfig cfg = parse_config(
      "system.family = example1\n"
      "system.lambdas = -0.2, -0.1, 0.1\n"
      "system.domain = -1.25, 1.25\n"
      "noise.kind = uniform\n"
      "noise.seeds = 3, 4\n"
      "grid.margin = 8\n"
      "sweep.tol = 0.05\n");
  const std::string a = dump(sweep_json(sweep(make_family(cfg), sweep_settings(cfg, 1)), cfg));
  const std::string b = dump(sweep_json(sweep(make_family(cfg), sweep_settings(cfg, 1)), cfg));
  const std::string c = dump(sweep_json(sweep(make_family(cfg), sweep_settings(cfg, 3)), cfg));
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("property: a conjugated path of one system has no change") {
  RunConfig cfg = parse_config(
      "system.family = conjugated\n"
      "system.base_family = example1\n"
      "system.base_lambda = -0.09\n"
      "system.conj_rate_a = 0.5\n"
      "system.conj_rate_b = 0.3\n"
      "system.lambdas = -0.4, -0.2, 0, 0.2, 0.4\n"
      "sweep.tol = 0\n");
  SweepReport rep = sweep(make_family(cfg), sweep_settings(cfg, 1));
  CHECK(rep.changes.empty());
  CHECK(m_values(rep) == std::vector<int>{2, 2, 2, 2, 2});
}
