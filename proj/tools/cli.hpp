#pragma once

#include <iosfwd>

namespace on2vec::cli {

// Parses the arguments and runs one subcommand (prep, synth, train, predict,
// verify, eval, pr-curve). Summaries go to `out`; progress, warnings and
// diagnostics go to `err`. Returns 0 on success, 1 on a runtime failure and
// 2 on a usage or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace on2vec::cli
