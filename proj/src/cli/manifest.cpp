#include <istream>
#include <ostream>
#include <sstream>

#include "smplab/cli/cli.hpp"
#include "smplab/error.hpp"

namespace smplab {

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t hash = 14695981039346656037ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

namespace {

void write_body(std::ostream& os, const RunManifest& m, bool with_volatile)
{
    os << "tool=smplab\n"
       << "version=" << m.version << '\n'
       << "command=" << m.experiment << '\n'
       << "scenario=" << m.scenario << '\n'
       << "scenario_digest=" << m.scenario_digest << '\n'
       << "seed=" << m.seed << '\n';
    if (with_volatile) {
        os << "out_dir=" << m.out_dir << '\n';
    }
    for (const auto& [k, v] : m.overrides) {
        os << "override." << k << '=' << v << '\n';
    }
    for (const auto& [k, v] : m.options) {
        os << "option." << k << '=' << v << '\n';
    }
    if (with_volatile) {
        os << "timestamp=" << m.timestamp << '\n';
    }
}

} // namespace

std::string RunManifest::digest() const
{
    std::ostringstream os;
    write_body(os, *this, false);
    return fnv1a_hex(os.str()).substr(0, 10);
}

std::filesystem::path RunManifest::run_directory() const
{
    return std::filesystem::path(out_dir) / (experiment + "_seed" + std::to_string(seed) + "_" + digest());
}

void RunManifest::write(std::ostream& os) const { write_body(os, *this, true); }

std::string RunManifest::option(const std::string& name, const std::string& fallback) const
{
    for (const auto& [k, v] : options) {
        if (k == name) {
            return v;
        }
    }
    return fallback;
}

RunManifest RunManifest::read(std::istream& is)
{
    RunManifest m;
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
        ++no;
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(no, "expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "tool") {
            if (value != "smplab") {
                throw ParseError(no, "not an smplab manifest");
            }
        } else if (key == "version") {
            m.version = value;
        } else if (key == "command") {
            m.experiment = value;
        } else if (key == "scenario") {
            m.scenario = value;
        } else if (key == "scenario_digest") {
            m.scenario_digest = value;
        } else if (key == "seed") {
            try {
                m.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ParseError(no, "bad seed '" + value + "'");
            }
        } else if (key == "out_dir") {
            m.out_dir = value;
        } else if (key.rfind("override.", 0) == 0) {
            m.overrides.emplace_back(key.substr(9), value);
        } else if (key.rfind("option.", 0) == 0) {
            m.options.emplace_back(key.substr(7), value);
        } else if (key == "timestamp") {
            m.timestamp = value;
        } else {
            throw ParseError(no, "unknown manifest key '" + key + "'");
        }
    }
    if (m.experiment.empty() || m.scenario.empty()) {
        throw ParseError(no, "manifest lacks command or scenario");
    }
    return m;
}

} // namespace smplab
