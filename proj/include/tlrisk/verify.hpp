#pragma once

#include <iosfwd>

namespace tlrisk {

// Self-check suite behind the `verify` CLI subcommand: sampling estimators
// against the closed forms, floor formula identities, and sweep determinism.
// Prints one line per check; returns true when every check passes.  quick
// mode cuts the sample counts for a fast smoke run.
bool run_verification(bool quick, std::ostream& out);

} // namespace tlrisk
