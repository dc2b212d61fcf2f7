#pragma once

namespace optlab {

// Full command-line front end; returns the process exit code.
// Subcommands: run, sweep, adaptivity, report.
int cli_main(int argc, const char* const* argv);

}  // namespace optlab
