// Runs the ztot binary end to end on the files in tests/data.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("ztot_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string data(const char* name) { return std::string(ZTOT_DATA_DIR) + "/" + name; }

Run ztot(const std::string& args, const std::string& env = "") {
    const fs::path out = scratch_dir() / "stdout";
    const fs::path err = scratch_dir() / "stderr";
    const std::string cmd = env + (env.empty() ? "" : " ") + ZTOT_BIN + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("solve on the constant-cost file") {
    const auto r = ztot("solve --beta 1 " + data("constant_cost.json"));
    REQUIRE(r.status == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["pressure"].get<double>() == doctest::Approx(-3.0).epsilon(1e-14));
    const double mu[] = {0.2, 0.3, 0.5};
    const double nu[] = {0.4, 0.6};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(doc["plan"][i][j].get<double>() - mu[i] * nu[j]) <= 1e-15);
    CHECK(doc["residual"].get<double>() <= 1e-10);
}

TEST_CASE("anneal on the two-point identity cost") {
    const auto r = ztot("anneal --beta-max 16384 " + data("identity_2x2.json"));
    REQUIRE(r.status == 0);
    const auto doc = json::parse(r.out);
    CHECK(std::abs(doc["finalExcess"].get<double>() + std::log(2.0)) <= 1e-3);
    CHECK(doc["converged"].get<bool>());

    const auto csv = ztot("anneal --format csv --beta-max 64 " + data("identity_2x2.json"));
    REQUIRE(csv.status == 0);
    CHECK(csv.out.rfind("beta,pressure,excess,entropy,cost,maxPhiDelta\n", 0) == 0);
    CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 1 + 7);

    const fs::path base = scratch_dir() / "run.csv";
    REQUIRE(ztot("anneal --beta-max 64 --out " + base.string() + " " + data("identity_2x2.json")).status == 0);
    CHECK(slurp(scratch_dir() / "run.csv") == csv.out);
    CHECK(json::parse(slurp(scratch_dir() / "run.json"))["command"] == "anneal");
}

TEST_CASE("oracle on the zero-cost file") {
    const auto r = ztot("oracle " + data("zero_cost_2x2.json"));
    REQUIRE(r.status == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["alpha"].get<double>() == 0.0);
    CHECK(doc["vertexCount"].get<int>() == 2);
    for (const auto& row : doc["maxEntropyPlan"])
        for (const auto& v : row) CHECK(std::abs(v.get<double>() - 0.25) <= 1e-12);
}

TEST_CASE("duality certificate on the two-point KR instance") {
    const auto r = ztot("duality " + data("kr_two_point.json"));
    REQUIRE(r.status == 0);
    const auto doc = json::parse(r.out);
    for (const char* key : {"primalValue", "dualValue", "gap", "feasible", "conjugate"}) CHECK(doc.contains(key));
    CHECK(doc["feasible"].get<bool>());
    CHECK(std::abs(doc["krValue"].get<double>() - 0.8) <= 1e-3);
    CHECK(doc["gap"].get<double>() >= 0.0);
}

TEST_CASE("ldp and pressure-curve CSV") {
    const auto ldp = ztot("ldp " + data("identity_2x2.json"));
    REQUIRE(ldp.status == 0);
    CHECK(ldp.out.rfind("beta,cell,r_beta,I\n", 0) == 0);
    CHECK(ldp.out.find('\r') == std::string::npos);

    const auto curve = ztot("pressure-curve --beta-max 8 " + data("identity_2x2.json"));
    REQUIRE(curve.status == 0);
    CHECK(curve.out.rfind("beta,excess\n1,", 0) == 0);
    CHECK(std::count(curve.out.begin(), curve.out.end(), '\n') == 5);
}

TEST_CASE("output is byte-identical across runs") {
    for (const char* args : {"solve --beta 7", "anneal", "duality", "oracle"}) {
        const auto a = ztot(std::string(args) + " " + data("kr_two_point.json"));
        const auto b = ztot(std::string(args) + " " + data("kr_two_point.json"));
        CHECK(a.status == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("validate, version and logging") {
    const auto v = ztot("validate " + data("kr_two_point.json"));
    REQUIRE(v.status == 0);
    CHECK(json::parse(v.out)["distanceCost"].get<bool>());
    CHECK(ztot("version").out.rfind("ztot ", 0) == 0);

    const auto quiet = ztot("solve --beta 2 " + data("identity_2x2.json"));
    const auto loud = ztot("solve --beta 2 " + data("identity_2x2.json"), "ZT_LOG_LEVEL=debug");
    CHECK(quiet.err.empty());
    CHECK(loud.err.find("[info]") != std::string::npos);
    CHECK(loud.out == quiet.out);
    CHECK(ztot("validate " + data("identity_2x2.json"), "ZT_LOG_LEVEL=loud").status == 1);
}

TEST_CASE("exit codes") {
    SUBCASE("malformed input is 1 with position context") {
        const auto r = ztot("validate " + data("malformed.json"));
        CHECK(r.status == 1);
        CHECK(r.err.find("line") != std::string::npos);
        CHECK(ztot("validate " + data("no_such_file.json")).status == 1);
        CHECK(ztot("solve --tol 0 " + data("identity_2x2.json")).status == 1);
        CHECK(ztot("anneal --beta-max 1 " + data("identity_2x2.json")).status == 1);
        CHECK(ztot("solve --format csv " + data("identity_2x2.json")).status == 1);
        CHECK(ztot("solve --format xml " + data("identity_2x2.json")).status == 1);
        CHECK(ztot("frobnicate").status == 1);
        CHECK(ztot("").status == 1);
    }
    SUBCASE("invariant violation is 2") {
        const auto r = ztot("validate " + data("broken_triangle.json"));
        CHECK(r.status == 2);
        CHECK(ztot("validate --no-triangle-check " + data("broken_triangle.json")).status == 0);
    }
    SUBCASE("non-convergence is 3") {
        // Three values of beta are too few for the limit the rate needs.
        CHECK(ztot("ldp --beta-max 4 " + data("identity_2x2.json")).status == 3);
    }
    SUBCASE("capacity is 4") {
        CHECK(ztot("oracle --oracle-cap 3 " + data("constant_cost.json")).status == 4);
        // Six optimal vertices exceed the max-entropy cap.
        CHECK(ztot("oracle " + data("zero_cost_3x3.json")).status == 4);
    }
}
