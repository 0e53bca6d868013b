#ifndef DGALAB_TOOLS_CLI_H_
#define DGALAB_TOOLS_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dgalab/error.h"

namespace dgalab::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitExhausted = 3,
  kExitSchema = 4,
  kExitDegenerate = 5,
  kExitAllCellsFailed = 6,
  kExitInfeasible = 7,
};

int ExitCodeFor(ErrorCode code);

// Settings shared by the subcommands. Later layers win: built-in defaults,
// the config file, DGALAB_<KEY> environment variables, command-line flags.
class CliConfig {
 public:
  CliConfig();

  // "key = value" lines; '#' starts a comment. Throws Error(kInvalidConfig)
  // on a malformed line or an unknown key.
  void MergeText(std::string_view text, std::string_view origin);
  void MergeFile(const std::filesystem::path& path);
  // DGALAB_<KEY> for every known key (KEY upper-cased).
  void MergeEnvironment();
  void Set(const std::string& key, std::string value);

  const std::string& Get(const std::string& key) const;
  std::filesystem::path Path(const std::string& key) const;
  std::uint64_t Seed() const;
  std::size_t Count(const std::string& key) const;
  double Real(const std::string& key) const;
  // Ascending list in (0,1).
  std::vector<double> TargetFprs() const;

  static const std::vector<std::string>& Keys();

 private:
  std::map<std::string, std::string> values_;
};

// Runs one command line (without the program name). Data goes to `out`,
// diagnostics to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dgalab::cli

#endif  // DGALAB_TOOLS_CLI_H_
