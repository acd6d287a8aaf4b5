// cli.hpp - the pprvari command line
#ifndef PPRVARI_CLI_HPP
#define PPRVARI_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pprvari::cli {

enum ExitStatus : int { kOk = 0, kInvalid = 1, kUsage = 2, kInternal = 3 };

/// args excludes the program name. Payload goes to out, diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace pprvari::cli

#endif  // PPRVARI_CLI_HPP
