#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "pulsekit-cli-test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(PULSEKIT_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("catalog: full listing has all 15 entries") {
    const RunResult r = run("catalog");
    CHECK(r.exit_code == 0);
    CHECK(count_lines(r.out) == 16);  // header + 15 rows
    CHECK(r.out.find("CORPSE-Pi") != std::string::npos);
    CHECK(r.out.find("CONT-SYM2ND-Pi2") != std::string::npos);
}

TEST_CASE("catalog: filters") {
    const RunResult r = run("catalog --theta pi --order second");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("SYM2ND-Pi ") != std::string::npos);
    CHECK(r.out.find("ASYM2ND-Pi ") != std::string::npos);
    CHECK(r.out.find("CONT-SYM2ND-Pi ") != std::string::npos);
    CHECK(count_lines(r.out) == 4);
    CHECK(r.out.find("Pi2") == std::string::npos);
}

TEST_CASE("catalog: unknown name gives an empty table, exit 0") {
    const RunResult r = run("catalog --name NOPE");
    CHECK(r.exit_code == 0);
    CHECK(count_lines(r.out) == 1);  // header only
}

TEST_CASE("catalog: json output parses") {
    const RunResult r = run("catalog --format json --name SYM2ND-Pi2");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["order"] == "second");
    CHECK(j[0]["pulse"]["kind"] == "piecewise-constant");
}

TEST_CASE("unknown flag is a usage error") {
    const RunResult r = run("catalog --nope 3");
    CHECK(r.exit_code == 1);
}

TEST_CASE("residuals: catalog entries") {
    const RunResult r = run("residuals --name CORPSE-Pi --format json");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(std::abs(j["eta11"].get<double>()) < 1e-5);
    CHECK(std::abs(j["eta12"].get<double>()) < 1e-5);

    const RunResult r2 = run("residuals --name SYM2ND-Pi2 --format json");
    const json j2 = json::parse(r2.out);
    for (const char* k : {"eta11", "eta12", "eta21", "eta22", "eta23"})
        CHECK(std::abs(j2[k].get<double>()) < 1e-4);
}

TEST_CASE("residuals: definition file with the constant pulse") {
    const fs::path file = work_dir() / "constant_pi.json";
    {
        std::ofstream out(file);
        out << std::setprecision(17);
        out << "{\n"
               "  \"kind\": \"piecewise-constant\",\n"
               "  \"theta\": " << std::numbers::pi << ",\n"
               "  \"axis\": [0, 1, 0],\n"
               "  \"segments\": [{\"end\": 1.0, \"amplitude\": " << std::numbers::pi / 2
            << "}]\n}\n";
    }
    const RunResult r = run("residuals --file " + file.string() + " --format json");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["eta11"].get<double>() == doctest::Approx(2 / std::numbers::pi).epsilon(1e-12));
    CHECK(std::abs(j["eta12"].get<double>()) < 1e-14);
}

TEST_CASE("residuals: malformed file reports the line and fails") {
    const fs::path file = work_dir() / "broken.json";
    {
        std::ofstream out(file);
        out << "{\n  \"kind\": \"piecewise-constant\",\n  \"theta\": oops\n}\n";
    }
    const RunResult r = run("residuals --file " + file.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("residuals: needs exactly one source") {
    CHECK(run("residuals").exit_code == 1);
    CHECK(run("residuals --name CORPSE-Pi --file x.json").exit_code == 1);
}

TEST_CASE("design: harmonic38 reproduces the printed amplitude") {
    const fs::path out = work_dir() / "h38.json";
    const RunResult r =
        run("design --family harmonic38 --theta pi --guess -2 --format json --out " +
            out.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["converged"] == true);
    CHECK(std::abs(j["params"][0].get<double>() - (-2.159224)) < 1e-5);

    // Round trip: the written pulse is accepted by residuals and scaling.
    const RunResult rr = run("residuals --file " + out.string() + " --format json");
    CHECK(rr.exit_code == 0);
    const json jr = json::parse(rr.out);
    CHECK(std::abs(jr["eta11"].get<double>()) < 1e-10);
    CHECK(std::abs(jr["psi1"].get<double>() - std::numbers::pi) < 1e-10);
}

TEST_CASE("design: named guess resolves against theta") {
    const fs::path out = work_dir() / "corpse2.json";
    const RunResult r =
        run("design --family composite3-asym --theta pi/2 --guess corpse --format json --out " +
            out.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(std::abs(j["params"][0].get<double>() - 6.345849) < 1e-4);
    CHECK(std::abs(j["params"][1].get<double>() - 0.033410) < 1e-4);
    CHECK(std::abs(j["params"][2].get<double>() - 0.471527) < 1e-4);
}

TEST_CASE("design: non-convergence exits 2 and writes a warning marker") {
    const fs::path out = work_dir() / "bad.json";
    const RunResult r = run(
        "design --family harmonic40 --theta pi --guess 10,7,2 --max-iter 1 --format json --out " +
        out.string());
    CHECK(r.exit_code == 2);
    const json j = json::parse(r.out);
    CHECK(j["converged"] == false);
    CHECK(j.contains("warning"));
    const json pulse_doc = json::parse(slurp(out));
    CHECK(pulse_doc.contains("warning"));  // best iterate marked in the file
}

TEST_CASE("scaling: CONST-Pi has slope 1, CSV trailer carries the fit") {
    const fs::path out = work_dir() / "scale_const.csv";
    const RunResult r =
        run("scaling --name CONST-Pi --bath z-dyn --seed 7 --threads 2 --out " + out.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("tau_p,distance") != std::string::npos);
    const auto pos = csv.find("# slope = ");
    REQUIRE(pos != std::string::npos);
    const double slope = std::stod(csv.substr(pos + 10));
    CHECK(slope > 0.9);
    CHECK(slope < 1.1);
}

TEST_CASE("scaling: refined catalog pulse slopes and json output") {
    const fs::path out = work_dir() / "scale_corpse.json";
    const RunResult r = run("scaling --name CORPSE-Pi --bath z-dyn --seed 7 --threads 2 "
                            "--format json --out " + out.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(slurp(out));
    CHECK(std::abs(j["slope"].get<double>() - 2.0) < 0.15);
    CHECK(j["points"].size() == 8);

    // Identical flags give byte-identical reports.
    const fs::path out2 = work_dir() / "scale_corpse2.json";
    const RunResult r2 = run("scaling --name CORPSE-Pi --bath z-dyn --seed 7 --threads 2 "
                             "--format json --out " + out2.string());
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out) == slurp(out2));
}

TEST_CASE("scaling: designed pulse file goes straight in") {
    const fs::path pulse = work_dir() / "h38.json";
    if (!fs::exists(pulse))
        (void)run("design --family harmonic38 --theta pi --guess -2 --out " + pulse.string());
    const fs::path out = work_dir() / "scale_h38.csv";
    const RunResult r =
        run("scaling --file " + pulse.string() + " --bath z-dyn --seed 7 --threads 2 --out " +
            out.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(out);
    const auto pos = csv.find("# slope = ");
    REQUIRE(pos != std::string::npos);
    const double slope = std::stod(csv.substr(pos + 10));
    CHECK(slope > 1.85);
    CHECK(slope < 2.15);
}

TEST_CASE("scaling: floor-contaminated grid exits 2 with the partial report") {
    const fs::path out = work_dir() / "scale_floor.csv";
    const RunResult r = run("scaling --name CONT-SYM2ND-Pi --bath z-dyn --seed 7 --threads 2 "
                            "--grid-min 1e-3 --grid-max 3e-3 --grid-points 5 --out " +
                            out.string());
    CHECK(r.exit_code == 2);
    const std::string csv = slurp(out);
    CHECK(csv.find("# error:") != std::string::npos);
    CHECK(csv.find("# warning:") != std::string::npos);
}

TEST_CASE("PULSEKIT_OUT_DIR redirects relative outputs") {
    const fs::path dir = work_dir() / "outdir";
    fs::create_directories(dir);
    const std::string cmd = "PULSEKIT_OUT_DIR=" + dir.string() + " " + PULSEKIT_CLI_PATH +
                            " design --family harmonic38 --theta pi --guess -2 --out env.json "
                            "> /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "env.json"));
}
