#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Run one `tsad` subcommand. `args` excludes the program name. Results go to
/// `out` unless a subcommand writes them to a file, diagnostics to `err`.
/// Returns 0 on success, 1 when the library raised a tsad::Error and 2 for
/// usage errors, which also print the subcommand's flag table to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsad
