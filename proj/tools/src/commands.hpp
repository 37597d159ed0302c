#ifndef MITMP_TOOLS_COMMANDS_HPP
#define MITMP_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <ostream>
#include <string>

namespace mitmp::app
{

enum ExitCode
{
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNumerical = 3,
  kInconclusive = 4
};

struct RunOptions
{
  std::filesystem::path scenario;
  std::filesystem::path out = ".";
  int threads = 1;
  bool quiet = false;
};

// Runs one of assemble, modes, simulate, extract, image, pipeline. Errors are
// reported on `err` and mapped to the exit codes above.
int Run(const std::string &command, const RunOptions &options, std::ostream &err);

}  // namespace mitmp::app

#endif  // MITMP_TOOLS_COMMANDS_HPP
