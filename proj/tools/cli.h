#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "parasent/errors.h"

namespace parasent::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumerical = 3,
};

// Missing or malformed command-line usage (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct KeySpec {
  const char* name;
  const char* default_value;
  const char* help;
};

const std::vector<KeySpec>& config_keys();

// `key = value` lines, '#' comments. Unknown keys raise ConfigError listing
// the valid ones.
std::map<std::string, std::string> parse_config(std::istream& in);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace parasent::cli
