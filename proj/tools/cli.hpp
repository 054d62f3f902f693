#pragma once

#include <iosfwd>

namespace smile::cli {

// Exit codes: 0 on success or --help, 1 on runtime failure, 2 on a
// configuration or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smile::cli
