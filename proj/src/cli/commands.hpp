#pragma once

#include <filesystem>
#include <vector>

#include "smplab/cli/cli.hpp"
#include "smplab/scenario/scenario.hpp"
#include "smplab/verification/report.hpp"

namespace smplab::cli {

/// Runs the command named by the manifest; outputs go to dir.
std::vector<Verdict> run_command(const RunManifest& m, const Scenario& s, const std::filesystem::path& dir);

} // namespace smplab::cli
