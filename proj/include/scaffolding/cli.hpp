#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scaffolding {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitUsage = 2,
  kExitBackend = 3,
};

// args[0] is the program name. Subcommands: ingest, bins, highlights,
// validate, render, serve.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scaffolding
