#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(QCLRING_CLI) + " " + args + " 2>&1";
    Run r{-1, {}};
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("qclring_cli_test_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage errors exit with status 2") {
    auto none = run("");
    CHECK(none.code == 2);
    CHECK(none.out.find("Usage") != std::string::npos);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("facet --bogus-flag").code == 2);
}

TEST_CASE("parse-stack prints one row per sublayer") {
    auto r = run("parse-stack 35/11/13/38");
    CHECK(r.code == 0);
    CHECK(r.out.find("0,barrier,35") != std::string::npos);
    CHECK(r.out.find("3,well,38") != std::string::npos);
    CHECK(r.out.find("4,") == std::string::npos);
}

TEST_CASE("facet reflectivity of an index-3.19 facet") {
    auto r = run("facet --n 3.19");
    CHECK(r.code == 0);
    CHECK(r.out.find("R_uncoated = 0.273") != std::string::npos);
}

TEST_CASE("configuration errors exit 1 with a one-line record naming the field") {
    auto d = scratch("badcfg");
    fs::create_directories(d);
    std::ofstream(d / "bad.ini") << "[stack]\nA = InP, 1\n[geometry]\nspacing = nope\n";
    auto r = run("modes -c " + (d / "bad.ini").string());
    CHECK(r.code == 1);
    CHECK(r.out.find("\"path\":\"geometry.spacing\"") != std::string::npos);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
    auto s = run("comb --set mode_count=4");
    CHECK(s.code == 1);
    CHECK(s.out.find("comb.mode_count") != std::string::npos);
}

TEST_CASE("output directory comes from the environment unless given") {
    auto d = scratch("env");
    std::string env = "QCLRING_OUTPUT_DIR=" + d.string() + " ";
    std::string cmd = env + QCLRING_CLI " comb --set mode_count=33 --set t_end=20 --set gain_width=5 > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    REQUIRE(fs::exists(d / "comb_spectrum.csv"));
    REQUIRE(fs::exists(d / "comb.json"));
    auto csv = slurp(d / "comb_spectrum.csv");
    CHECK(csv.rfind("site,offset[cm-1],intensity[dB]\n", 0) == 0);
    CHECK(slurp(d / "comb.json").find("\"seed\"") != std::string::npos);
}

TEST_CASE("rf-map output re-parses with analyze-map and is seed-deterministic") {
    auto a = scratch("rf_a"), b = scratch("rf_b");
    std::string args = " rf-map --set mode_count=33 --set t_end=20 --set gain_width=5 --steps 3 --seed 9";
    REQUIRE(run("-o " + a.string() + args).code == 0);
    REQUIRE(run("-o " + b.string() + args + " -j 2").code == 0);
    CHECK(slurp(a / "rf_map.csv") == slurp(b / "rf_map.csv"));
    CHECK(slurp(a / "rf_map.json") == slurp(b / "rf_map.json"));
    auto r = run("analyze-map " + (a / "rf_map.csv").string());
    CHECK(r.code == 0);
    CHECK(r.out.find("max bandwidth") != std::string::npos);
}

TEST_CASE("analyze-liv reads an LIV file") {
    auto d = scratch("liv");
    fs::create_directories(d);
    {
        std::ofstream f(d / "liv.csv");
        f << "# area_cm2 = 1.5e-4\ncurrent_mA,voltage_V,power_mW\n";
        for (int k = 0; k <= 100; ++k) f << 10 * k << ",1," << std::max(0.0, 0.2 * (10 * k - 405)) << "\n";
    }
    auto r = run("analyze-liv " + (d / "liv.csv").string());
    CHECK(r.code == 0);
    CHECK(r.out.find("threshold = 405 mA") != std::string::npos);
    CHECK(r.out.find("slope = 0.2 mW/mA") != std::string::npos);
    CHECK(run("analyze-liv " + (d / "missing.csv").string()).code == 1);
}

TEST_SUITE_END();
