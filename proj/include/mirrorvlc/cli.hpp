#pragma once

#include <iosfwd>

namespace mirrorvlc {

/// Entry point of the `mirrorvlc` tool: design | run | sweep.
/// Returns 0 on success, 1 on usage, configuration or I/O errors and 2 when
/// stage 1 is infeasible.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mirrorvlc
