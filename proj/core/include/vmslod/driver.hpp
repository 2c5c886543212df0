#ifndef VMSLOD_DRIVER_HPP
#define VMSLOD_DRIVER_HPP

#include <iosfwd>

#include "vmslod/runspec.hpp"

namespace vmslod {

/// Dispatch a run: executes the command, writes its CSV outputs and a
/// manifest.json into spec.output_dir. Throws ConfigError / SolverError on
/// failure (the CLI maps them to exit codes 2 / 3).
void run(const RunSpec& spec, std::ostream& log);

}  // namespace vmslod

#endif
