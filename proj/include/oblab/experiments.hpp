#pragma once

#include <string>

#include "oblab/config.hpp"

namespace oblab {

// Executes the experiment described by a parsed config; writes artifacts
// under output.dir and returns the process exit status (nonzero iff any
// invariant check fails or a solver does not converge).
int run_experiment(const Config& cfg);

// Complete, versioned description of experiments, config schema, and output
// formats.
std::string describe();

} // namespace oblab
