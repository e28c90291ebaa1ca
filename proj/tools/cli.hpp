#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace hmc::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kPreconditionViolation = 3,
    kCheckFailure = 4,
};

/// Runs one experiment. `args` excludes the program name. Tables go to
/// `out` (or to --out), diagnostics and check verdicts to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used for the manifest's config hash.
std::uint64_t fnv1a(const std::string& text);

}  // namespace hmc::cli
