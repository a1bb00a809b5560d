#pragma once

namespace gdv::cli {

/// Exit codes: 0 success, 1 IO, 2 validation (including usage), 3 numeric.
int run(int argc, const char *const *argv);

}  // namespace gdv::cli
