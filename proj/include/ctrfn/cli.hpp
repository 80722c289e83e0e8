#pragma once

#include "ctrfn/json_io.hpp"

namespace ctrfn {

// Outcome of one batch run: the full report plus the process exit code.
// Exit 0 means every requested result is certified, 2 means some result is
// inconclusive at the configured budget, 1 means the run failed.
struct RunResult {
  json report;
  int exit_code = 0;
};

// Dispatches a parsed config on its "command" field: build, charfn,
// decompose, coincide, classify, sweep, or verify. Never throws; failures
// come back as an error report with exit code 1.
RunResult run_config(const json& config);

// Full command line front end: parses `ctrfn <command> --config <file>
// [--out <file>] [--seed N]`, runs it, and writes the report JSON to the
// output path or stdout. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ctrfn
