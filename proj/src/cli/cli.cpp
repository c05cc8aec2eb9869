#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "smplab/error.hpp"
#include "smplab/log.hpp"

namespace smplab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Flags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::string out;
    std::string eta;
    std::string eps_ladder;
    std::vector<std::string> set;
    int threads = 0;
    bool quiet = false;
    // command options
    std::string kind = "all";
    std::size_t order = 1;
    std::size_t probes = 5;
    std::size_t blocks = 0;
    std::string flip = "none";
    std::string terminal;
    std::string ladder;
    std::string manifest;
};

std::string timestamp()
{
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cli.scenario", "cannot open scenario file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void split_key(const std::string& dotted, std::string& section, std::string& key)
{
    const auto dot = dotted.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size()) {
        throw ValidationError("cli.set", "expected section.key, got '" + dotted + "'");
    }
    section = dotted.substr(0, dot);
    key = dotted.substr(dot + 1);
}

/// Fresh manifest from the command line. Environment overrides come first,
/// flags after, so flags win.
RunManifest manifest_from_flags(const std::string& command, const Flags& f)
{
    RunManifest m;
    m.version = kVersion;
    m.experiment = command;
    m.scenario = f.scenario;
    if (const char* seed = std::getenv("SMPLAB_SEED"); seed != nullptr && *seed != '\0') {
        m.overrides.emplace_back("run.seed", seed);
    }
    if (const char* out = std::getenv("SMPLAB_OUT_DIR"); out != nullptr && *out != '\0') {
        m.overrides.emplace_back("run.out_dir", out);
    }
    if (f.seed) {
        m.overrides.emplace_back("run.seed", std::to_string(*f.seed));
    }
    if (f.paths) {
        m.overrides.emplace_back("run.paths", std::to_string(*f.paths));
    }
    if (!f.eta.empty()) {
        m.overrides.emplace_back("run.eta", f.eta);
    }
    if (!f.eps_ladder.empty()) {
        m.overrides.emplace_back("run.eps_ladder", f.eps_ladder);
    }
    for (const auto& kv : f.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("cli.set", "expected section.key=value, got '" + kv + "'");
        }
        m.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (command == "rates") {
        m.options.emplace_back("kind", f.kind);
    }
    if (command == "adjoint" || command == "duality") {
        m.options.emplace_back("order", std::to_string(f.order));
    }
    if (command == "duality") {
        m.options.emplace_back("probes", std::to_string(f.probes));
    }
    if (command == "adjoint" && !f.ladder.empty()) {
        m.options.emplace_back("ladder", f.ladder);
    }
    if (command == "smp") {
        m.options.emplace_back("blocks", std::to_string(f.blocks));
        m.options.emplace_back("flip", f.flip);
        m.options.emplace_back("terminal", f.terminal.empty() ? "limit" : f.terminal);
    } else if (command == "adjoint" || command == "duality" || command == "oracle") {
        m.options.emplace_back("terminal", f.terminal.empty() ? "mollified" : f.terminal);
    }
    return m;
}

int execute(RunManifest m, const std::string& out_flag, std::ostream& out, std::ostream& err)
{
    // Configuration phase: every failure here is a usage error.
    Scenario s;
    try {
        const std::string bytes = read_bytes(m.scenario);
        const std::string digest = fnv1a_hex(bytes);
        if (!m.scenario_digest.empty() && m.scenario_digest != digest) {
            throw ValidationError("cli.manifest", "scenario file changed since the manifest was written");
        }
        m.scenario_digest = digest;
        std::istringstream in(bytes);
        ScenarioConfig cfg = parse_config(in);
        for (const auto& [dotted, value] : m.overrides) {
            std::string section;
            std::string key;
            split_key(dotted, section, key);
            set_config_value(cfg, section, key, value);
        }
        s = build_scenario(cfg, m.scenario);
        m.seed = s.seed;
        if (!out_flag.empty()) {
            m.out_dir = out_flag;
        } else if (m.out_dir.empty()) {
            m.out_dir = s.config.out_dir;
        }
        if (m.experiment == "rates" && m.option("kind") != "all") {
            (void)parse_rate_kind(m.option("kind"));
        }
        const std::string order = m.option("order", "1");
        if (order != "1" && order != "2") {
            throw ValidationError("cli.order", "order must be 1 or 2");
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    m.timestamp = timestamp();
    const fs::path dir = m.run_directory();
    std::vector<Verdict> verdicts;
    try {
        fs::create_directories(dir);
        {
            std::ofstream os(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
            m.write(os);
            if (!os) {
                throw Error("cannot write manifest to " + dir.string());
            }
        }
        out << "RUN dir=" << dir.string() << '\n';
        verdicts = cli::run_command(m, s, dir);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    bool all = true;
    std::ostringstream lines;
    for (const auto& v : verdicts) {
        lines << format_verdict(v) << '\n';
        all = all && v.pass;
    }
    out << lines.str();
    {
        std::ofstream os(dir / "verdicts.txt", std::ios::binary | std::ios::trunc);
        os << lines.str();
    }
    {
        std::ofstream os(dir / "summary.txt", std::ios::binary | std::ios::trunc);
        write_summary(os, verdicts);
    }
    return all ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical checks of the stochastic maximum principle for semilinear SPDEs", "smplab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Flags f;

    auto common = [&f](CLI::App* sub) {
        sub->add_option("--scenario", f.scenario, "Scenario config file")->required();
        sub->add_option("--seed", f.seed, "Override run.seed");
        sub->add_option("--paths", f.paths, "Override run.paths")->check(CLI::PositiveNumber);
        sub->add_option("--out", f.out, "Output root (default run.out_dir)");
        sub->add_option("--eta", f.eta, "Override run.eta, e.g. 4h2 or 0.01");
        sub->add_option("--eps-ladder", f.eps_ladder, "Override run.eps_ladder (fractions of T)");
        sub->add_option("--set", f.set, "Override any config key: section.key=value");
        sub->add_option("--threads", f.threads, "Cap on worker threads (0: default)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", f.quiet, "Silence warnings");
    };
    const auto add_order = [&f](CLI::App* sub) {
        sub->add_option("--order", f.order, "Adjoint order (1 or 2)")->check(CLI::IsMember({1, 2}));
    };
    const auto add_terminal = [&f](CLI::App* sub) {
        sub->add_option("--terminal", f.terminal, "Second order terminal data")
            ->check(CLI::IsMember({"mollified", "limit"}));
    };

    CLI::App* simulate = app.add_subcommand("simulate", "Simulate the state under the reference control");
    common(simulate);
    CLI::App* adjoint = app.add_subcommand("adjoint", "Solve the adjoint equations");
    common(adjoint);
    add_order(adjoint);
    add_terminal(adjoint);
    adjoint->add_option("--ladder", f.ladder, "Mollifier ladder for the limit pair, e.g. 16h2,8h2,4h2");
    CLI::App* duality = app.add_subcommand("duality", "Check the adjoint state identities");
    common(duality);
    add_order(duality);
    add_terminal(duality);
    duality->add_option("--probes", f.probes, "Number of random probes")->check(CLI::PositiveNumber);
    CLI::App* rates = app.add_subcommand("rates", "Fit convergence rates of the spike expansion");
    common(rates);
    rates->add_option("--kind", f.kind, "y_moment, z_moment, residual, hgamma or all");
    CLI::App* smp = app.add_subcommand("smp", "Evaluate the Hamiltonian gap");
    common(smp);
    add_terminal(smp);
    smp->add_option("--blocks", f.blocks, "Brute-force search over this many control blocks first");
    smp->add_option("--flip", f.flip, "Contrapositive check: block index to replace, or none");
    CLI::App* oracle = app.add_subcommand("oracle", "Compare against deterministic or affine oracles");
    common(oracle);
    add_terminal(oracle);
    CLI::App* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", f.manifest, "manifest.txt of an earlier run")->required();
    replay->add_option("--out", f.out, "Output root (default: the recorded one)");
    replay->add_option("--threads", f.threads, "Cap on worker threads (0: default)")->check(CLI::NonNegativeNumber);
    replay->add_flag("--quiet", f.quiet, "Silence warnings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    set_warnings_quiet(f.quiet);
    set_max_threads(f.threads);
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == replay) {
        RunManifest m;
        try {
            std::ifstream in(f.manifest, std::ios::binary);
            if (!in) {
                throw ValidationError("cli.manifest", "cannot open '" + f.manifest + "'");
            }
            m = RunManifest::read(in);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }
        return execute(m, f.out, out, err);
    }
    RunManifest m;
    try {
        m = manifest_from_flags(chosen->get_name(), f);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return execute(m, f.out, out, err);
}

} // namespace smplab
