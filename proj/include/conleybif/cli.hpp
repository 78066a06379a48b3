#ifndef CONLEYBIF_CLI_HPP
#define CONLEYBIF_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace conleybif {

namespace exit_code {
constexpr int ok = 0;
constexpr int warnings = 1;   // detection with warnings, or a failed check
constexpr int config = 2;     // configuration or usage error
constexpr int refinement = 3; // refinement budget exhausted
}  // namespace exit_code

/// Runs one subcommand: simulate, invariant, primes, index, sweep,
/// check-conjugacy, check-cocycle. Reports go to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace conleybif

#endif  // CONLEYBIF_CLI_HPP
