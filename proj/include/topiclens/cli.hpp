#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace topiclens::cli {

// Entry point behind the `topiclens` binary. Returns the process exit code:
// 0 ok, 1 usage, 2 data error, 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topiclens::cli
