#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dynlab/io.hpp"
#include "json.hpp"

using namespace dynlab;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "dynlab_cli_test";

int run(const std::string& args, const std::string& env = "") {
    fs::create_directories(kDir);
    const std::string cmd = "cd '" + kDir.string() + "' && " + env + " " DYNLAB_CLI " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
    std::ifstream is(kDir / name, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

nlohmann::json manifest(const std::string& out) { return nlohmann::json::parse(slurp(out + ".manifest.json")); }

}  // namespace

TEST_CASE("centers writes a table and a manifest") {
    REQUIRE(run("centers --d 2 --n 3 --exact --out c.csv") == 0);
    std::istringstream is(slurp("c.csv"));
    const PointTable t = read_points(is);
    CHECK(t.dim == 1);
    CHECK(t.points.size() == 3);
    const auto m = manifest("c.csv");
    CHECK(m["command"] == "centers");
    CHECK(m["params"]["n"] == 3);
    CHECK(m["params"]["exact"] == true);
    CHECK(m["version"] == std::string(kVersion));
    CHECK(m["outputs"].size() == 1);
    CHECK(m["failures"].empty());
    CHECK(m["exit_code"] == 0);
}

TEST_CASE("multiplier closed form") {
    REQUIRE(run("multiplier --d 2 --n 2 --w 0.4+0i --exact --out m.csv") == 0);
    std::istringstream is(slurp("m.csv"));
    const PointTable t = read_points(is);
    REQUIRE(t.points.size() == 1);
    CHECK(std::abs(t.points[0][0] - Complex(-0.9, 0.0)) < 1e-14);
    REQUIRE(run("multiplier --d 2 --n 2 --w 0.4+0i --out m2.csv") == 0);
    std::istringstream is2(slurp("m2.csv"));
    CHECK(read_points(is2).points.size() == 2);
}

TEST_CASE("ratefit emits JSON") {
    std::vector<DiscrepancySample> s;
    for (int n = 3; n <= 12; ++n) s.push_back({n, 5.0 * n / std::ldexp(1.0, n)});
    {
        std::ofstream os(kDir / "disc.csv");
        write_series(os, s);
    }
    REQUIRE(run("ratefit --in disc.csv --model n_over_dn --d 2 --out fit.json") == 0);
    const auto j = nlohmann::json::parse(slurp("fit.json"));
    CHECK(j["C_hat"].get<double>() == doctest::Approx(5.0));
    CHECK(j["r2"].get<double>() == doctest::Approx(1.0));
    CHECK(j["n_min"] == 3);
    CHECK(j["n_max"] == 12);
}

TEST_CASE("exit codes") {
    CHECK(run("") == 1);
    CHECK(run("centers --d 1") == 1);
    CHECK(run("multiplier --w 1.5 --out bad.csv") == 1);
    CHECK(manifest("bad.csv")["exit_code"] == 1);
    CHECK(run("preimages --z 1+2") == 1);
    CHECK(run("ratefit --in missing.csv") == 1);
    // A seeding grid far too coarse finds only part of the locus.
    CHECK(run("cubic-centers --n0 3 --n1 1 --solver multistart --grid 2 --refinements 0 --out few.csv") == 2);
    const auto m = manifest("few.csv");
    CHECK(m["exit_code"] == 2);
    CHECK(m["failures"].size() == 1);
    CHECK_FALSE(fs::exists(kDir / "few.csv"));
}

TEST_CASE("property: output is independent of the thread count") {
    for (const std::string args : {"preimages --d 2 --n 10 --z 4", "harmonic --d 2 --K 64 --tmin 1e-4",
                                   "multiplier --d 3 --n 4 --w 0.3", "cubic-centers --n0 2 --n1 1"}) {
        REQUIRE(run(args + " --threads 1 --out t1.csv") == 0);
        REQUIRE(run(args + " --threads 3 --out t3.csv") == 0);
        CHECK(slurp("t1.csv") == slurp("t3.csv"));
        CHECK(manifest("t3.csv")["threads"] == 3);
    }
}

TEST_CASE("thread count from the environment, overridden by the flag") {
    REQUIRE(run("centers --n 4 --out e.csv", "DYNLAB_THREADS=2") == 0);
    CHECK(manifest("e.csv")["threads"] == 2);
    REQUIRE(run("centers --n 4 --threads 1 --out e.csv", "DYNLAB_THREADS=2") == 0);
    CHECK(manifest("e.csv")["threads"] == 1);
}

TEST_CASE("property: emitted CSV re-parses to the same table") {
    for (const std::string args : {"centers --d 3 --n 5", "cubic-multiplier --n0 2 --n1 1 --w0 0.3 --w1 -0.2"}) {
        REQUIRE(run(args + " --out rt.csv") == 0);
        const std::string text = slurp("rt.csv");
        std::istringstream is(text);
        const PointTable t = read_points(is);
        std::ostringstream os;
        write_points(os, t);
        CHECK(os.str() == text);
    }
    REQUIRE(run("discrepancy --n-min 4 --n-max 7 --out s.csv") == 0);
    const std::string text = slurp("s.csv");
    std::istringstream is(text);
    const auto series = read_series(is);
    CHECK(series.size() == 4);
    std::ostringstream os;
    write_series(os, series);
    CHECK(os.str() == text);
}

TEST_CASE("plots") {
    REQUIRE(run("centers --n 6 --out p.csv --plot p.svg") == 0);
    CHECK(slurp("p.svg").rfind("<svg", 0) == 0);
    CHECK(manifest("p.csv")["outputs"].size() == 2);
    REQUIRE(run("przytycki --c 0+1i --N 40 --out g.csv --plot g.svg") == 0);
    CHECK(slurp("g.svg").find("polyline") != std::string::npos);
    CHECK(slurp("g.csv").rfind("n,gap\n", 0) == 0);
}
