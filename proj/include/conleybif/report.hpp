#ifndef CONLEYBIF_REPORT_HPP
#define CONLEYBIF_REPORT_HPP

#include "conleybif/cocycle.hpp"
#include "conleybif/config.hpp"

#include <json.hpp>

#include <string>

namespace conleybif {

using Json = nlohmann::ordered_json;

/// Flat [lo0, hi0, lo1, hi1, ...].
Json box_json(const Box &b);
Json fingerprint_json(const IndexFingerprint &f);
Json run_json(const RunRecord &r);
Json votes_json(const Votes &v);

/// Reproducibility header: resolved config, seed list and the comparison
/// convention.
Json report_header(const RunConfig &cfg, const std::string &command);

Json sweep_json(const SweepReport &rep, const RunConfig &cfg);
std::string sweep_csv(const SweepReport &rep);

Json decomposition_json(const Decomposition &d, double lambda, std::uint64_t seed);
Json invariant_json(const InvariantFamily &inv);
Json law_json(const LawReport &r, double tol);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json &j);

}  // namespace conleybif

#endif  // CONLEYBIF_REPORT_HPP
