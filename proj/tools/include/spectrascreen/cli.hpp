#pragma once

#include <iosfwd>

namespace spectrascreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. Help and version text go to `out`; usage errors and
// diagnostics go to `err`. Data is only ever written to the named files.
int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace spectrascreen::cli
