#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gradmix/pipeline.hpp"

namespace gradmix::cli {

/// Entry point of the `gradmix` tool. Returns the process exit status.
int run(int argc, char** argv);

/// Same as above with explicit arguments (without the program name) and
/// output streams.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// Applies a JSON config object whose keys are the flag names without the
/// leading dashes (e.g. "major-fraction"). Unknown keys are rejected.
void apply_config_json(AugmentationConfig& cfg, const std::string& text);

}  // namespace gradmix::cli
