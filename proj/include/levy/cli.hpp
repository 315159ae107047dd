#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace levy::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "levy-run/1";

enum ExitCode : int {
    kOk = 0,
    kValidationFailed = 2,
    kMalformedInput = 3,
    kUnsupported = 4,
    kNumericalFailure = 5,
};

/// "t1..t2:steps[:geom]" (linear unless ":geom"), a comma list, or a single value.
std::vector<double> parse_time_grid(const std::string& spec);

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace levy::cli
