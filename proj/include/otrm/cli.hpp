#pragma once

#include <string>
#include <vector>

namespace otrm {

// Runs the command-line tool: subcommands {w2, d-estimate, geodesic, flow,
// rates, mollify, concentration, clt, bayes, bayes-flow}. Returns the
// process exit code: 0 success, 2 malformed config, 3 solver/size guard,
// 4 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace otrm
