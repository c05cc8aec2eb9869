#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smplab/cli/cli.hpp"
#include "smplab/error.hpp"
#include "smplab/verification/report.hpp"

using namespace smplab;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "smplab");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return Result{code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(SMPLAB_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path run_dir_of(const std::string& out)
{
    const auto pos = out.find("RUN dir=");
    REQUIRE(pos != std::string::npos);
    const auto end = out.find('\n', pos);
    return fs::path(out.substr(pos + 8, end - pos - 8));
}

// Scratch directory removed at scope exit.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("smplab_test_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

std::vector<Verdict> verdicts_in(const std::string& out)
{
    std::vector<Verdict> v;
    std::istringstream is(out);
    std::string line;
    Verdict x;
    while (std::getline(is, line)) {
        if (parse_verdict(line, x)) {
            v.push_back(x);
        }
    }
    return v;
}

} // namespace

TEST_CASE("fnv1a reference values")
{
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("manifest round trip and digest")
{
    RunManifest m;
    m.version = "1.0";
    m.experiment = "duality";
    m.scenario = "x.cfg";
    m.scenario_digest = "0123456789abcdef";
    m.seed = 9;
    m.out_dir = "runs";
    m.overrides = {{"run.paths", "100"}, {"run.seed", "9"}};
    m.options = {{"order", "2"}};
    m.timestamp = "2024-01-01T00:00:00Z";
    std::stringstream buf;
    m.write(buf);
    const RunManifest r = RunManifest::read(buf);
    CHECK(r.experiment == "duality");
    CHECK(r.seed == 9);
    CHECK(r.overrides == m.overrides);
    CHECK(r.option("order") == "2");
    CHECK(r.option("missing", "dflt") == "dflt");
    CHECK(r.digest() == m.digest());
    CHECK(m.digest().size() == 10);

    RunManifest moved = m;
    moved.out_dir = "elsewhere";
    moved.timestamp = "2030-01-01T00:00:00Z";
    CHECK(moved.digest() == m.digest());
    RunManifest other = m;
    other.options = {{"order", "1"}};
    CHECK(other.digest() != m.digest());
    CHECK(m.run_directory() == fs::path("runs") / ("duality_seed9_" + m.digest()));

    std::istringstream bad("tool=smplab\nnosuch=1\n");
    CHECK_THROWS_AS(RunManifest::read(bad), ParseError);
    std::istringstream noeq("tool smplab\n");
    CHECK_THROWS_AS(RunManifest::read(noeq), ParseError);
}

TEST_CASE("usage and configuration errors exit with 2")
{
    CHECK(run({}).code == 2);
    CHECK(run({"nosuch"}).code == 2);
    CHECK(run({"simulate"}).code == 2);
    CHECK(run({"simulate", "--scenario", fixture("tiny.cfg"), "--bogus"}).code == 2);
    CHECK(run({"simulate", "--scenario", "/nonexistent/x.cfg"}).code == 2);
    const Result r = run({"simulate", "--scenario", fixture("tiny.cfg"), "--set", "run.nosuch=1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("config.key") != std::string::npos);
    CHECK(run({"simulate", "--scenario", fixture("tiny.cfg"), "--set", "novalue"}).code == 2);
    CHECK(run({"rates", "--scenario", fixture("degenerate.cfg"), "--kind", "speed"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("malformed scenario files exit with 2 and cite the line")
{
    Scratch tmp("badcfg");
    const fs::path cfg = tmp.dir / "bad.cfg";
    std::ofstream(cfg) << "[grid]\nn = 8\n[time]\nn_t = lots\n";
    const Result r = run({"simulate", "--scenario", cfg.string(), "--out", tmp.dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 4") != std::string::npos);
}

TEST_CASE("simulate writes its outputs and is reproducible")
{
    Scratch tmp("simulate");
    const std::string scenario = fixture("tiny.cfg");
    const std::string before = slurp(scenario);
    const auto a = run({"simulate", "--scenario", scenario, "--paths", "40", "--out", (tmp.dir / "a").string(),
                        "--quiet"});
    const auto b = run({"simulate", "--scenario", scenario, "--paths", "40", "--out", (tmp.dir / "b").string(),
                        "--quiet", "--threads", "2"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const fs::path da = run_dir_of(a.out);
    const fs::path db = run_dir_of(b.out);
    CHECK(da.filename() == db.filename());
    for (const char* f : {"cost.csv", "mean_state.csv", "trajectory.bin", "verdicts.txt", "summary.txt"}) {
        CHECK(fs::exists(da / f));
        CHECK(slurp(da / f) == slurp(db / f));
    }
    CHECK(slurp(scenario) == before);

    const auto v = verdicts_in(a.out);
    REQUIRE(v.size() == 1);
    CHECK(v[0].id == "simulate.cost");

    std::ifstream mf(da / "manifest.txt");
    const RunManifest m = RunManifest::read(mf);
    CHECK(m.experiment == "simulate");
    CHECK(m.seed == 1);
    CHECK(m.scenario_digest == fnv1a_hex(before));
    CHECK(m.option("threads", "none") == "none");
}

TEST_CASE("seed flag and environment override are recorded")
{
    Scratch tmp("seed");
    const auto a = run({"simulate", "--scenario", fixture("tiny.cfg"), "--paths", "40", "--seed", "5", "--out",
                        tmp.dir.string(), "--quiet"});
    REQUIRE(a.code == 0);
    CHECK(run_dir_of(a.out).filename().string().rfind("simulate_seed5_", 0) == 0);

    setenv("SMPLAB_SEED", "6", 1);
    const auto b = run({"simulate", "--scenario", fixture("tiny.cfg"), "--paths", "40", "--out", tmp.dir.string(),
                        "--quiet"});
    unsetenv("SMPLAB_SEED");
    REQUIRE(b.code == 0);
    std::ifstream mf(run_dir_of(b.out) / "manifest.txt");
    const RunManifest m = RunManifest::read(mf);
    CHECK(m.seed == 6);
    REQUIRE_FALSE(m.overrides.empty());
    CHECK(m.overrides.front() == std::pair<std::string, std::string>{"run.seed", "6"});
}

TEST_CASE("replay reproduces a run and refuses a changed scenario")
{
    Scratch tmp("replay");
    const fs::path cfg = tmp.dir / "s.cfg";
    fs::copy_file(fixture("tiny.cfg"), cfg);
    const auto a = run({"simulate", "--scenario", cfg.string(), "--paths", "40", "--out", (tmp.dir / "a").string(),
                        "--quiet"});
    REQUIRE(a.code == 0);
    const fs::path da = run_dir_of(a.out);
    const auto r = run({"replay", "--manifest", (da / "manifest.txt").string(), "--out", (tmp.dir / "r").string(),
                        "--quiet"});
    REQUIRE(r.code == 0);
    const fs::path dr = run_dir_of(r.out);
    CHECK(dr.filename() == da.filename());
    CHECK(slurp(dr / "cost.csv") == slurp(da / "cost.csv"));
    CHECK(slurp(dr / "trajectory.bin") == slurp(da / "trajectory.bin"));

    std::ofstream(cfg, std::ios::app) << "# edited\n";
    const auto changed = run({"replay", "--manifest", (da / "manifest.txt").string(), "--out",
                              (tmp.dir / "c").string(), "--quiet"});
    CHECK(changed.code == 2);
}

TEST_CASE("an identically zero rate statistic is reported, not failed")
{
    Scratch tmp("rates");
    const auto r = run({"rates", "--scenario", fixture("degenerate.cfg"), "--paths", "40", "--kind", "residual",
                        "--out", tmp.dir.string()});
    CHECK(r.code == 0);
    const auto v = verdicts_in(r.out);
    REQUIRE(v.size() == 1);
    CHECK(v[0].id == "rates.residual");
    CHECK(v[0].pass);
    CHECK(v[0].stat == "undefined");
    CHECK(v[0].note.find("slope_undefined") != std::string::npos);
    const std::string csv = slurp(run_dir_of(r.out) / "rates.csv");
    CHECK(csv.rfind("# schema: smplab/rates v1\n", 0) == 0);
}

TEST_CASE("oracle command on the noise-free fixture")
{
    Scratch tmp("oracle");
    const auto r = run({"oracle", "--scenario", fixture("zero_noise.cfg"), "--out", tmp.dir.string()});
    CHECK(r.code == 0);
    const auto v = verdicts_in(r.out);
    REQUIRE(v.size() >= 2);
    for (const auto& x : v) {
        CHECK(x.pass);
    }
    CHECK(fs::exists(run_dir_of(r.out) / "oracle.csv"));
}

TEST_CASE("installed binary runs")
{
    Scratch tmp("binary");
    const std::string cmd = std::string(SMPLAB_BINARY) + " simulate --scenario " + fixture("tiny.cfg") +
                            " --paths 40 --quiet --out " + tmp.dir.string() + " > " + (tmp.dir / "log").string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(slurp(tmp.dir / "log").find("VERDICT id=simulate.cost") != std::string::npos);
    const std::string bad = std::string(SMPLAB_BINARY) + " simulate > /dev/null 2>&1";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 2);
}
