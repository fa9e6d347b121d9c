#pragma once

#include <iosfwd>

namespace gdl::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command. Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.
/// Errors are printed to `err` as one JSON record.
int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gdl::cli
