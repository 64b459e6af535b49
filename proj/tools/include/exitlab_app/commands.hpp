#pragma once

#include "exitlab_app/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace exitlab::app {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::vector<std::string> args;  // positional arguments after the command
    bool dump = false;              // qsd: also write u_h and nu_h as CSV
    std::string rates_file;         // kmc: RateTable JSON
};

std::vector<std::string> command_names();
bool is_command(const std::string& name);
std::string usage();

/// Runs one command. Returns the process exit status: 0 on success (for
/// `validate`, only when the suite passed), 2 for an unknown command.
/// Library errors propagate as exceptions.
int dispatch(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out);

/// Machine-readable error object written to standard error.
std::string error_json(const std::exception& e);

}  // namespace exitlab::app
