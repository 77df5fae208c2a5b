#pragma once

#include <iosfwd>

namespace streamres::cli {

// Entry point of the `streamres` tool. Exit codes: 0 success, 1 operational
// failure (one "error: ..." line on `err`), 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace streamres::cli
