#pragma once

#include "slowent/numeric.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace slowent {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kConfigSchema = 1;

// Invalid configuration; maps to exit status 2.
struct ConfigError : Error {
    using Error::Error;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
};

const std::vector<std::string>& experiment_names();

// Returns the process exit status: 0 success, 1 pipeline error, 2 invalid configuration.
int run_experiment(const std::string& experiment, const std::string& config_path, const RunOptions& opts,
                   std::ostream& out, std::ostream& err);

}  // namespace slowent
