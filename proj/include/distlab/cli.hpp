#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace distlab {

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace distlab
