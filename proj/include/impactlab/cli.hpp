#pragma once

#include <string>
#include <vector>

namespace impactlab {

// Batch driver. `args` excludes the program name. Returns the process exit
// status; failures print a machine-readable error JSON to stderr.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace impactlab
