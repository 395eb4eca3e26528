#pragma once

#include <iosfwd>

namespace threshold_regret {

/// Exit codes: 0 success, 1 validation error, 2 numeric failure.
int run_cli(int argc, char** argv);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace threshold_regret
