#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace smplab {

/// Resolved inputs of one command, written to <run dir>/manifest.txt before
/// any computation. Format: one key=value per line, in this order:
///   tool, version, command, scenario, scenario_digest, seed, out_dir,
///   override.<section>.<key> (config overrides, in application order),
///   option.<name> (command options), timestamp.
/// The run directory is <out_dir>/<command>_seed<seed>_<digest>, where the
/// digest covers every line except out_dir and timestamp.
struct RunManifest {
    std::string version;
    std::string experiment;
    std::string scenario;
    std::string scenario_digest;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::pair<std::string, std::string>> overrides; // "section.key" -> value
    std::vector<std::pair<std::string, std::string>> options;
    std::string timestamp;

    std::string digest() const;
    std::filesystem::path run_directory() const;
    void write(std::ostream& os) const;
    /// Throws ParseError on malformed lines or unknown keys.
    static RunManifest read(std::istream& is);
    /// Value of option `name`, or `fallback`.
    std::string option(const std::string& name, const std::string& fallback = "") const;
};

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Entry point of the smplab tool. Exit codes: 0 completed and every check
/// passed, 1 a check failed or the computation broke down, 2 usage or
/// configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace smplab
