// Command-line front end: index, query, trace, stats.
#pragma once

#include <iosfwd>

namespace stackres::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFrontendErrors = 1;  // index: some files failed to parse
inline constexpr int kStoreError = 2;
inline constexpr int kNoReference = 3;     // query/trace: nothing to resolve at the position
inline constexpr int kUsage = 64;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stackres::cli
