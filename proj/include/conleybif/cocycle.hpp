#ifndef CONLEYBIF_COCYCLE_HPP
#define CONLEYBIF_COCYCLE_HPP

#include "conleybif/noise.hpp"
#include "conleybif/system.hpp"

#include <cstdint>

namespace conleybif {

/// phi(1, theta_k omega, x).
Point time_one_map(const SystemDef &sys, const NoisePath &path, int k,
                   const Point &x);

/// Inverse of time_one_map at fiber k, i.e. phi(-1, theta_{k+1} omega, .).
Point inverse_time_one_map(const SystemDef &sys, const NoisePath &path, int k,
                           const Point &y);

/// phi(n, omega, x); negative n composes inverse steps so that
/// phi(n, omega)^{-1} = phi(-n, theta_n omega).
Point cocycle_eval(const SystemDef &sys, const NoisePath &path, int n,
                   const Point &x);

struct LawReport {
  bool pass = true;
  double max_defect = 0.0;
  int checked = 0;
  int skipped = 0;  // divergence, missing preimage or window exhaustion
};

/// Samples (s, t, x) with s, t of equal sign and |s|, |t| <= max_steps, and
/// measures |phi(t+s, omega, x) - phi(t, theta_s omega, phi(s, omega, x))|.
LawReport check_cocycle_property(const SystemDef &sys, const NoisePath &path,
                                 int trials, double tol, int max_steps = 8,
                                 std::uint64_t seed = 0);

/// Measures |phi2(t, omega, alpha(omega, x)) - alpha(theta_t omega,
/// phi1(t, omega, x))| on sampled t in [0, max_steps] and x in sys1.domain.
LawReport check_conjugacy(const SystemDef &sys1, const SystemDef &sys2,
                          const ConjugacyDef &alpha, const NoisePath &path,
                          int samples, double tol, int max_steps = 8,
                          std::uint64_t seed = 0);

/// phi2(1, omega, y) := alpha(theta omega, phi1(1, omega, alpha^{-1}(omega, y))).
/// The domain is the alpha-image of sys.domain over the listed fibers,
/// rounded outward to multiples of grid_width (no rounding when <= 0).
SystemDef conjugate_system(const SystemDef &sys, const ConjugacyDef &alpha,
                           double grid_width = 0.05);

}  // namespace conleybif

#endif  // CONLEYBIF_COCYCLE_HPP
