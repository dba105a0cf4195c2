#pragma once

#include <string>

#include "ccopt/config.hpp"

namespace ccopt {

/// Forward run: diagnostics CSV (and optional field dumps) in the output dir.
void run_forward(const RunConfig& cfg);

/// Forward run with the extended monitor CSV (energy budget ingredients).
void run_diagnose(const RunConfig& cfg);

/// Transpose-identity and derivative checks on the configured instance;
/// writes gradcheck.json. Returns true iff every check passed.
bool run_gradcheck(const RunConfig& cfg);

/// Projected gradient run; writes optimize_iters.csv and
/// optimize_summary.json. Returns true iff the run converged.
bool run_optimize(const RunConfig& cfg);

}  // namespace ccopt
