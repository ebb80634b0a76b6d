#pragma once

namespace monlab {

// Parses and runs one CLI invocation. Returns the process exit code:
// 0 success, 1 numeric or validation failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace monlab
