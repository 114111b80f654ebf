#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using hype::testing::model_path;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hype_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs the CLI in `dir` through the shell; `env` is prepended verbatim.
Result run(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" HYPE_CLI "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string quoted(const std::string& path) { return "'" + path + "'"; }

} // namespace

TEST_CASE("check summarizes a model") {
    const auto dir = scratch("check");
    const auto r = run("check " + quoted(model_path("orbiter_extended.hype")), dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("model OrbiterExtended: ok") != std::string::npos);
    CHECK(r.out.find("subcomponents (6)") != std::string::npos);
    CHECK(r.out.find("stochastic events (2)") != std::string::npos);
    CHECK(r.out.find("variables (3): K, T, D") != std::string::npos);
}

TEST_CASE("model errors exit with 1") {
    const auto dir = scratch("bad");
    std::ofstream(dir / "broken.hype") << "model Broken;\nvar X\n";
    const auto r = run("check broken.hype", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("broken.hype:") != std::string::npos);
    CHECK(run("check does_not_exist.hype", dir).code == 1);
    CHECK(run("compile does_not_exist.hype", dir).code == 1);
}

TEST_CASE("usage errors exit with 3") {
    const auto dir = scratch("usage");
    const auto model = quoted(model_path("downloader.hype"));
    CHECK(run("", dir).code == 3);
    CHECK(run("frobnicate", dir).code == 3);
    CHECK(run("simulate " + model + " --t-end -1", dir).code == 3);
    CHECK(run("simulate " + model + " --t-end abc", dir).code == 3);
    CHECK(run("simulate " + model + " --set nosuch=1", dir).code == 3);
    CHECK(run("simulate " + model + " --set mu", dir).code == 3);
    CHECK(run("compile " + model + " --prune sometimes", dir).code == 3);
    CHECK(run("compile " + model + " --emit pictures", dir).code == 3);
    CHECK(run("ensemble " + model + " --runs 0", dir).code == 3);
    CHECK(run("--help", dir).code == 0);
}

TEST_CASE("compile writes the requested artifacts") {
    const auto dir = scratch("compile");
    const auto r = run("compile " + quoted(model_path("downloader.hype")) + " --emit automaton,graph,report", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("modes: 4 → 2 (pruned)") != std::string::npos);
    CHECK(fs::exists(dir / "downloader.tdsha.json"));
    CHECK(fs::exists(dir / "downloader.dot"));
    CHECK(fs::exists(dir / "downloader.report.json"));
    const auto doc = nlohmann::json::parse(slurp(dir / "downloader.tdsha.json"));
    CHECK(doc["modes"].size() == 2);
    const auto off = run("compile " + quoted(model_path("downloader.hype")) + " --prune off", dir);
    CHECK(off.out.find("modes: 4 (not pruned)") != std::string::npos);
}

TEST_CASE("the output directory comes from the environment") {
    const auto dir = scratch("env");
    const auto target = dir / "artifacts";
    const auto r = run("simulate " + quoted(model_path("downloader.hype")) + " --t-end 50",
                       dir, "HYPE_OUTPUT_DIR='" + target.string() + "'");
    CHECK(r.code == 0);
    CHECK(fs::exists(target / "downloader.trace.csv"));
    CHECK(fs::exists(target / "downloader.events.csv"));
    CHECK(fs::exists(target / "downloader.meta.json"));
    const auto flag = dir / "flag";
    run("simulate " + quoted(model_path("downloader.hype")) + " --t-end 50 -o '" + flag.string() + "'", dir,
        "HYPE_OUTPUT_DIR='" + target.string() + "'");
    CHECK(fs::exists(flag / "downloader.trace.csv"));
}

TEST_CASE("simulate is reproducible and honours --set") {
    const auto a = scratch("seed_a");
    const auto b = scratch("seed_b");
    const auto model = quoted(model_path("downloader.hype"));
    CHECK(run("simulate " + model + " --seed 5 --t-end 300", a).code == 0);
    CHECK(run("simulate " + model + " --seed 5 --t-end 300", b).code == 0);
    CHECK(slurp(a / "downloader.trace.csv") == slurp(b / "downloader.trace.csv"));
    CHECK(run("simulate " + model + " --seed 5 --t-end 300 --set lambda_r=0.5", b).code == 0);
    CHECK(slurp(a / "downloader.trace.csv") != slurp(b / "downloader.trace.csv"));
    const auto meta = nlohmann::json::parse(slurp(a / "downloader.meta.json"));
    CHECK(meta["termination"] == "horizon");
    CHECK(meta["seed"] == 5);
}

TEST_CASE("a Zeno configuration exits with 2") {
    const auto dir = scratch("zeno");
    const auto r = run("simulate " + quoted(model_path("orbiter_tempdep.hype")) + " --t-end 100 --set k4=300", dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("chain-limit-exceeded") != std::string::npos);
    // the partial trace is still written
    CHECK(fs::exists(dir / "orbiter_tempdep.trace.csv"));
    const auto ok = run("simulate " + quoted(model_path("orbiter_tempdep.hype")) + " --t-end 100", dir);
    CHECK(ok.code == 0);
}

TEST_CASE("ensemble summary") {
    const auto dir = scratch("ensemble");
    const auto r = run("ensemble " + quoted(model_path("downloader.hype")) + " --runs 8 --threads 2 --t-end 100", dir);
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "downloader.summary.json"));
    CHECK(doc["runs"] == 8);
    CHECK(doc["outcomes"].size() == 8);
    const auto zeno = run("ensemble " + quoted(model_path("orbiter_tempdep.hype")) +
                              " --runs 2 --t-end 50 --set k4=300", dir);
    CHECK(zeno.code == 2);
    CHECK(nlohmann::json::parse(slurp(dir / "orbiter_tempdep.summary.json"))["partial"] == true);
}
