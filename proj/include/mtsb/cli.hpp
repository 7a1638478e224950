#pragma once

#include <string>
#include <vector>

namespace mtsb {

// Entry point behind the `mtsb` executable. Subcommands:
//   simulate | bicluster | factors | loadings | replicate | rolling
// Returns 0 on success, 1 on data/config errors, 2 on usage errors.
int cli_dispatch(int argc, const char* const* argv);

// Convenience overload for tests; argv[0] is the program name.
int cli_dispatch(const std::vector<std::string>& argv);

}  // namespace mtsb
