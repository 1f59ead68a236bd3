#pragma once

// The four batch commands behind the CLI. Each returns a process exit code:
//   0  success (including hypothesis-not-met verdicts)
//   1  at least one verdict is violated
//   2  usage, schema or input error

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "solitons/report.hpp"

namespace solitons {

struct CommandOptions {
  std::string command;  // describe | check | integrate | fit
  std::string manifest;
  std::vector<int> grid;  // overrides the manifest grid when nonempty
  std::optional<double> tol;  // replaces all three tolerances
  std::string out;            // report file; the report also goes to stdout
  std::vector<std::string> checks;
  std::string expression;  // integrate
};

struct CommandResult {
  int exit_code = 0;
  Json report;  // null on error
};

/// Runs a command; `err` receives diagnostics. Does not print the report.
CommandResult execute(const CommandOptions& opts, std::ostream& err);

/// execute(), then prints the report to `out` and writes opts.out if set.
int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace solitons
