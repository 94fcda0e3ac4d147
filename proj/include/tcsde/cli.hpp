#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcsde/io.hpp"

namespace tcsde {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2 };

// Runs the command named by run.command. Artifacts go to run.output_dir (manifest.json,
// report.json, paths/*.csv, densities/*.csv). threads <= 0 defers to THREADS, then 1.
// Returns kExitAssertion when a configured assertion fails (the failing check is named
// on `log`) and kExitConfig for configuration errors.
int run_config(const Config& cfg, int threads, std::ostream& log);

// argv-level entry: --config PATH, --override k=v (repeatable), --threads N.
int cli_main(int argc, char** argv);

}  // namespace tcsde
