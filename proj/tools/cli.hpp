#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace lsv::cli {

using nlohmann::json;

enum ExitCode { ok = 0, failure = 1, config_error = 2, no_convergence = 3 };

/// Malformed or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a config file. A CSV written by this tool is accepted too: its
/// `# meta:` line is the resolved config of the run that produced it.
json load_config(const std::string& path);

/// Applies `key.path=value`; the value is read as JSON when it parses, else as
/// a string.
void apply_override(json& config, const std::string& assignment);

/// Validates a config for `command` and fills in every default. Throws
/// ConfigError (or lsv::InvalidArgument) on bad input.
json resolve(const json& config, const std::string& command);

/// Entry point: argv without the program name. CSV goes to `out` unless the
/// config names a file; diagnostics go to `err` as `ERROR <code>: ...`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsv::cli
