#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace macrodimer::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 usage, 2 configuration, 3 physics/domain error,
// 4 I/O or unexpected failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace macrodimer::cli
