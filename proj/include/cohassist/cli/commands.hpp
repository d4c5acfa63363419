#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohassist/qmat.hpp"

namespace cohassist::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalidInput = 2,
    kExitSearchExhausted = 3,
    kExitInternal = 4,
};

struct CommonOptions {
    std::string path;
    double tol = kDefaultTol;
    double log_base = 2.0;
    std::uint64_t seed = 0;
    std::vector<std::string> argv;  // echoed into the report
};

struct AssistOptions {
    std::size_t ensemble_size = 0;
    int restarts = 20;
    int max_iters = 200;
};

struct SaturateOptions {
    int budget = 200;
    std::size_t max_ensemble_size = 0;
};

struct ProtocolCliOptions {
    bool sample = false;
    std::size_t shots = 10000;
    std::optional<std::string> ensemble_file;
    int budget = 200;
};

struct CommandResult {
    int exit_code = kExitOk;
    nlohmann::json report;
    std::string human;
};

CommandResult cmd_validate(const CommonOptions& common);
CommandResult cmd_measures(const CommonOptions& common);
CommandResult cmd_assist(const CommonOptions& common, const AssistOptions& opts);
CommandResult cmd_saturate(const CommonOptions& common, const SaturateOptions& opts);
CommandResult cmd_protocol(const CommonOptions& common, const ProtocolCliOptions& opts);

/// Full command line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cohassist::cli
