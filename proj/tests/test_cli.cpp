// Round trips through the installed binary: every case here launches the
// real executable (path passed as argv[1]) and inspects exit codes, output
// files, and manifests.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cmllab/manifest.hpp"

namespace {

std::string g_cli;
int g_counter = 0;

std::string fresh_dir() {
    auto d = std::filesystem::temp_directory_path() /
             ("cmllab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(g_counter++));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

void spit(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

struct CmdResult {
    int rc = -1;
    std::string out, err;
};

// env is a prefix like "CMLLAB_THREADS=2 "; the command runs under sh
CmdResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cap = fresh_dir();
    const std::string cmd =
        env + "\"" + g_cli + "\" " + args + " >" + cap + "/out.txt 2>" + cap + "/err.txt";
    int raw = std::system(cmd.c_str());
    CmdResult r;
    r.rc = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(cap + "/out.txt");
    r.err = slurp(cap + "/err.txt");
    return r;
}

double value_after(const std::string& text, const std::string& label) {
    std::size_t pos = text.find(label);
    REQUIRE_MESSAGE(pos != std::string::npos, "label \"" << label << "\" missing in:\n" << text);
    return std::strtod(text.c_str() + pos + label.size(), nullptr);
}

} // namespace

TEST_CASE("exit codes separate config errors from escapes") {
    CHECK(run_cli("").rc == 2);                    // a subcommand is required
    CHECK(run_cli("simulate --bogus 1").rc == 2);  // unknown flag
    CHECK(run_cli("simulate --config /tmp/cmllab_no_such.toml").rc == 2);
    CHECK(run_cli("simulate").rc == 2); // no coupling strength anywhere
    CHECK(run_cli("--help").rc == 0);

    const std::string dir = fresh_dir();
    spit(dir + "/esc.toml", "[coupling]\nkind = \"matrix\"\nm = 2\na = [1, -1, -1, 1]\n"
                            "c = 0.45\n[orbit]\nsteps = 100000\nseed = 3\n");
    CmdResult esc = run_cli("simulate --config " + dir + "/esc.toml --out-dir " + dir);
    CHECK(esc.rc == 3);
    CHECK(esc.err.find("escape") != std::string::npos);
}

TEST_CASE("validate reports the offending row of a bad coupling matrix") {
    const std::string dir = fresh_dir();
    spit(dir + "/bad.toml", "[coupling]\nkind = \"matrix\"\nm = 2\n"
                            "a = [-1, 1, 1, -0.5]\nc = 0.1\n");
    CmdResult bad = run_cli("validate --config " + dir + "/bad.toml");
    CHECK(bad.rc == 2);
    CHECK(bad.err.find("row 1") != std::string::npos);

    spit(dir + "/good.toml", "[coupling]\nc = 0.1\n");
    CmdResult good = run_cli("validate --config " + dir + "/good.toml");
    CHECK(good.rc == 0);
    CHECK(good.out.find("ok") != std::string::npos);
}

TEST_CASE("lemma prints the derived constants table") {
    const std::string dir = fresh_dir();
    CmdResult r = run_cli("lemma --a 4 --m0 6 --delta1 2^-16 --mu 2 --out-dir " + dir);
    REQUIRE(r.rc == 0);
    CHECK(std::fabs(value_after(r.out, "d = ") - 1.0 / 3.0) < 1e-12);
    CHECK(std::fabs(value_after(r.out, "mu_upper = ") - 3.0) < 1e-12);
    CHECK(std::fabs(value_after(r.out, "delta1 = ") - std::ldexp(1.0, -16)) == 0);
    CHECK(std::filesystem::exists(dir + "/lemma.json"));
    CHECK(std::filesystem::exists(dir + "/manifest.json"));
}

TEST_CASE("curve demo reports the two-step growth excess") {
    const std::string dir = fresh_dir();
    CmdResult r = run_cli("curve --demo prop32 --c 0.0 --out-dir " + dir);
    REQUIRE(r.rc == 0);
    CHECK(std::fabs(value_after(r.out, "growth excess e = ") - 1.0 / 3.0) < 1e-12);
    CHECK(value_after(r.out, "fail = ") == 0.0);
    CHECK(std::filesystem::exists(dir + "/growth_report.json"));

    // an unknown demo is a config error
    CHECK(run_cli("curve --demo prop99 --c 0.0 --out-dir " + dir).rc == 2);
}

TEST_CASE("curve forest honors format and svg flags") {
    const std::string dir = fresh_dir();
    CmdResult r = run_cli("curve --c 0.05 --depth 4 --format json --svg --out-dir " + dir);
    REQUIRE(r.rc == 0);
    CHECK(std::filesystem::exists(dir + "/forest.json"));
    CHECK_FALSE(std::filesystem::exists(dir + "/forest.csv"));
    std::string svg = slurp(dir + "/forest.svg");
    CHECK(svg.rfind("<svg", 0) == 0);

    const std::string dir2 = fresh_dir();
    CmdResult r2 = run_cli("curve --c 0.05 --depth 4 --out-dir " + dir2);
    REQUIRE(r2.rc == 0);
    CHECK(std::filesystem::exists(dir2 + "/forest.csv"));
    CHECK_FALSE(std::filesystem::exists(dir2 + "/forest.svg"));
}

TEST_CASE("threads resolve file below environment below flags") {
    const std::string dir = fresh_dir();
    spit(dir + "/scan.toml", "[sweep]\nc_values = [0.1]\nseeds_per_c = 2\nthreads = 4\n"
                             "horizon = 2000\n[orbit]\nsteps = 2000\nburn_in = 100\n");
    const std::string base = "scan --config " + dir + "/scan.toml --out-dir ";

    auto resolved_threads = [](const std::string& out_dir) {
        cmllab::RunManifest man = cmllab::RunManifest::load(out_dir + "/manifest.json");
        std::size_t pos = man.resolved_config.find("threads = ");
        REQUIRE(pos != std::string::npos);
        return man.resolved_config.substr(pos + 10, 1);
    };

    const std::string d1 = fresh_dir();
    REQUIRE(run_cli(base + d1).rc == 0);
    CHECK(resolved_threads(d1) == "4"); // file value survives untouched

    const std::string d2 = fresh_dir();
    REQUIRE(run_cli(base + d2, "CMLLAB_THREADS=2 ").rc == 0);
    CHECK(resolved_threads(d2) == "2"); // environment beats the file

    const std::string d3 = fresh_dir();
    REQUIRE(run_cli(base + d3 + " --threads 1", "CMLLAB_THREADS=2 ").rc == 0);
    CHECK(resolved_threads(d3) == "1"); // flag beats both
}

TEST_CASE("out-dir falls back to the environment") {
    const std::string d1 = fresh_dir();
    REQUIRE(run_cli("lemma", "CMLLAB_OUT_DIR=" + d1 + " ").rc == 0);
    CHECK(std::filesystem::exists(d1 + "/lemma.json"));

    const std::string d2 = fresh_dir(), d3 = fresh_dir();
    REQUIRE(run_cli("lemma --out-dir " + d3, "CMLLAB_OUT_DIR=" + d2 + " ").rc == 0);
    CHECK(std::filesystem::exists(d3 + "/lemma.json")); // flag wins
    CHECK_FALSE(std::filesystem::exists(d2 + "/lemma.json"));
}

TEST_CASE("same seed reproduces bytes, different seed does not") {
    const std::string dir = fresh_dir();
    spit(dir + "/sim.toml", "[coupling]\nc = 0.1\n[orbit]\nsteps = 5000\nburn_in = 100\n"
                            "trace_stride = 100\nseed = 11\n");
    const std::string d1 = fresh_dir(), d2 = fresh_dir(), d3 = fresh_dir();
    REQUIRE(run_cli("simulate --config " + dir + "/sim.toml --out-dir " + d1).rc == 0);
    REQUIRE(run_cli("simulate --config " + dir + "/sim.toml --out-dir " + d2).rc == 0);
    REQUIRE(run_cli("simulate --config " + dir + "/sim.toml --seed 12 --out-dir " + d3).rc == 0);
    CHECK(slurp(d1 + "/stats.jsonl") == slurp(d2 + "/stats.jsonl"));
    CHECK(slurp(d1 + "/trace.csv") == slurp(d2 + "/trace.csv"));
    CHECK(slurp(d1 + "/stats.jsonl") != slurp(d3 + "/stats.jsonl"));

    cmllab::RunManifest man = cmllab::RunManifest::load(d3 + "/manifest.json");
    CHECK(man.master_seed == 12); // the flag reached the manifest
    CHECK(man.command == "simulate");
    REQUIRE(man.inputs.size() == 1);
    CHECK(man.inputs[0].hash_hex == cmllab::hash_file(dir + "/sim.toml"));
}

TEST_CASE("replay verifies scans bit for bit and flags tampering") {
    const std::string dir = fresh_dir();
    spit(dir + "/scan.toml", "[sweep]\nc_values = [0.2, 0.3]\nseeds_per_c = 4\n"
                             "horizon = 20000\nmaster_seed = 5\n"
                             "[orbit]\nsteps = 20000\nburn_in = 500\n");
    const std::string out = fresh_dir();
    REQUIRE(run_cli("scan --config " + dir + "/scan.toml --svg --out-dir " + out).rc == 0);
    CHECK(std::filesystem::exists(out + "/runs.csv"));
    CHECK(std::filesystem::exists(out + "/summary.json"));
    CHECK(std::filesystem::exists(out + "/scan.svg"));

    CmdResult ok = run_cli("replay " + out + "/manifest.json");
    CHECK(ok.rc == 0);
    CHECK(ok.out.find("replay ok") != std::string::npos);
    CHECK(std::filesystem::exists(out + "/replay/runs.csv"));
    CHECK(slurp(out + "/replay/runs.csv") == slurp(out + "/runs.csv"));

    // corrupt one recorded hash; the replay must notice and exit 3
    cmllab::RunManifest man = cmllab::RunManifest::load(out + "/manifest.json");
    REQUIRE_FALSE(man.outputs.empty());
    man.outputs[0].hash_hex = "0000000000000000";
    man.save(out + "/tampered.json");
    CmdResult bad = run_cli("replay " + out + "/tampered.json --out-dir " + fresh_dir());
    CHECK(bad.rc == 3);
    CHECK(bad.err.find("replay mismatch") != std::string::npos);
}

TEST_CASE("polytope run reports and replays") {
    const std::string out = fresh_dir();
    CmdResult r = run_cli("polytope --m 2 --count 40 --seed 9 --out-dir " + out);
    REQUIRE(r.rc == 0);
    CHECK(r.out.find("counterexamples") != std::string::npos);
    CHECK(std::filesystem::exists(out + "/polytope_report.json"));
    CHECK(run_cli("replay " + out + "/manifest.json").rc == 0);
}

int main(int argc, char** argv) {
    if (argc < 2 || argv[1][0] == '-') {
        std::fprintf(stderr, "usage: test_cli <cmllab binary> [doctest options]\n");
        return 1;
    }
    g_cli = argv[1];
    std::vector<char*> args;
    args.push_back(argv[0]);
    for (int i = 2; i < argc; ++i) args.push_back(argv[i]);
    doctest::Context ctx(static_cast<int>(args.size()), args.data());
    return ctx.run();
}
