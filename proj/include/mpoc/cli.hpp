#pragma once

// Command-line front end.  run_cli is the whole program minus process
// plumbing, so tests can drive it with an in-memory stream.
//
// Exit codes: 0 success, 2 checked-and-negative verdict (e.g. the point is
// not T-stationary), 1 usage or runtime error.

#include <iosfwd>
#include <string>
#include <vector>

namespace mpoc {

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mpoc
