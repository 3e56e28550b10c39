#pragma once

#include <string>

#include "cli_config.hpp"

namespace faecli {

// Runs one subcommand (synth|train|search|detect|eval|latent|zeroshot|info).
// Returns the process exit code; errors are printed to stderr as a single
// `error: <family>: <message>` line.
int dispatch(const std::string& command, const RunConfig& config);

}  // namespace faecli
