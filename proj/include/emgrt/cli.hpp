#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emgrt::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kNumericError = 3,
};

/// Runs one `emgrt` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emgrt::cli
