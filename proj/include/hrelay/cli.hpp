#pragma once

#include <iosfwd>

namespace hrelay {

/// Exit status: 0 success, 2 usage or configuration error, 1 runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hrelay
