#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vine::cli {

// Runs the `vine` command line. args excludes the program name.
// Exit codes: 0 ok, 1 runtime failure (reason code on stderr), 2 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Subcommand names and, for each, the long flag names it accepts.
struct FlagListing {
  std::string subcommand;
  std::vector<std::string> flags;
};
std::vector<FlagListing> list_flags();

}  // namespace vine::cli
