#pragma once

#include <iosfwd>

namespace sidewidth {

/// Exit codes: 0 success, 1 the pipeline produced nothing, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sidewidth
