// End-to-end tests of the mabs binary: exit codes, file formats, determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "mabs_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = std::string(MABS_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                      err.string();
    int status = std::system(cmd.c_str());
    int code = -1;
    if (status != -1) code = WEXITSTATUS(status);
    return RunResult{code, slurp(out), slurp(err)};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body,
                                                std::string* header = nullptr) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(body);
    std::string line;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            seen_header = true;
            if (header) *header = line;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

fs::path write_config(const json& j, const std::string& name) {
    fs::path p = scratch_dir() / name;
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

json base_call_config() {
    return json{{"schema_version", 1},
                {"rate", 0.05},
                {"vols", {0.2, 0.2}},
                {"maturity", 1.0},
                {"correlations", {0.0}},
                {"spot", {100.0, 100.0}},
                {"payoff", {{"kind", "vanilla_call"}, {"asset", 0}, {"strike", 100.0}}},
                {"method", {{"kind", "quadrature"}, {"order", 64}}}};
}

}  // namespace

TEST_CASE("classify exit codes and report") {
    auto interior = run_cli("classify 0 0 0");
    CHECK(interior.exit_code == 0);
    CHECK(interior.out.find("Interior") != std::string::npos);
    CHECK(interior.out.find("determinant:  1") != std::string::npos);

    auto kummer = run_cli("classify 1 1 1");
    CHECK(kummer.exit_code == 2);
    CHECK(kummer.out.find("KummerSurface") != std::string::npos);
    CHECK(kummer.out.find("rank:         1") != std::string::npos);

    auto indefinite = run_cli("classify 0.9 0.9 -0.9");
    CHECK(indefinite.exit_code == 3);
    CHECK(indefinite.out.find("Indefinite") != std::string::npos);

    CHECK(run_cli("classify 0 0").exit_code == 64);     // M=2 matches no N
    CHECK(run_cli("classify 2 0 0").exit_code == 64);   // out of range
    CHECK(run_cli("classify a b c").exit_code == 64);   // not numbers
    CHECK(run_cli("classify").exit_code == 64);
    CHECK(run_cli("frobnicate").exit_code == 64);
}

TEST_CASE("surface emission") {
    fs::path out = scratch_dir() / "surface0.csv";
    auto res = run_cli("surface 0 --resolution 64 --out " + out.string());
    CHECK(res.exit_code == 0);
    std::string header;
    auto rows = parse_csv(slurp(out), &header);
    CHECK(header == "x,y,z,det,branch");
    REQUIRE(!rows.empty());
    bool plus = false, minus = false;
    int vertices = 0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 5);
        double x = std::stod(row[0]), y = std::stod(row[1]), z = std::stod(row[2]),
               det = std::stod(row[3]);
        CHECK(std::fabs(2 * x * y * z - x * x - y * y - z * z + 1.0) <= 1e-9);
        CHECK(std::fabs(det) <= 1e-9);
        if (row[4] == "plus") plus = true;
        if (row[4] == "minus") minus = true;
        if (std::fabs(std::fabs(x) - 1) < 1e-12 && std::fabs(std::fabs(y) - 1) < 1e-12 &&
            std::fabs(std::fabs(z) - 1) < 1e-12)
            ++vertices;
    }
    CHECK(plus);
    CHECK(minus);
    CHECK(vertices >= 4);

    // byte-stable across runs
    fs::path out2 = scratch_dir() / "surface0_again.csv";
    run_cli("surface 0 --resolution 64 --out " + out2.string());
    CHECK(slurp(out) == slurp(out2));

    // positive level: no branch column, near-origin shell
    fs::path shell = scratch_dir() / "surface09.csv";
    CHECK(run_cli("surface 0.9 --resolution 64 --out " + shell.string()).exit_code == 0);
    std::string shell_header;
    auto shell_rows = parse_csv(slurp(shell), &shell_header);
    CHECK(shell_header == "x,y,z,det");
    for (const auto& row : shell_rows) {
        double x = std::stod(row[0]), y = std::stod(row[1]), z = std::stod(row[2]);
        CHECK(std::sqrt(x * x + y * y + z * z) <= 0.35);
        CHECK(std::fabs(std::stod(row[3]) - 0.9) <= 1e-9);
    }

    CHECK(run_cli("surface 1.0").exit_code == 64);
    CHECK(run_cli("surface -- -4.0").exit_code == 64);
    CHECK(run_cli("surface 0 --format xml").exit_code == 64);

    // json format variant
    fs::path jf = scratch_dir() / "surface.json";
    CHECK(run_cli("surface 0.5 --resolution 32 --format json --out " + jf.string()).exit_code ==
          0);
    json parsed = json::parse(slurp(jf));
    CHECK(parsed["schema_version"] == 1);
    CHECK(parsed["C"] == 0.5);
    REQUIRE(!parsed["points"].empty());
    for (const auto& row : parsed["points"])
        CHECK(std::fabs(row["det"].get<double>() - 0.5) <= 1e-9);
}

TEST_CASE("eigen-grid emission") {
    fs::path out = scratch_dir() / "eigen.csv";
    auto res = run_cli("eigen-grid --branch plus --resolution 101 --out " + out.string());
    CHECK(res.exit_code == 0);
    std::string header;
    auto rows = parse_csv(slurp(out), &header);
    CHECK(header == "x,y,lambda1,lambda2");
    CHECK(rows.size() == 101 * 101);

    bool saw_origin = false, saw_corner = false;
    for (const auto& row : rows) {
        double x = std::stod(row[0]), y = std::stod(row[1]);
        double l1 = std::stod(row[2]), l2 = std::stod(row[3]);
        CHECK(std::fabs(l1 + l2 - 3.0) <= 1e-12);
        if (l2 <= 1e-6) {
            double d = std::min({std::hypot(x - 1, y - 1), std::hypot(x - 1, y + 1),
                                 std::hypot(x + 1, y - 1), std::hypot(x + 1, y + 1)});
            CHECK(d <= 1e-6);
        }
        if (x == 0.0 && y == 0.0) {
            saw_origin = true;
            CHECK(l1 == doctest::Approx(2.0).epsilon(1e-13));
            CHECK(l2 == doctest::Approx(1.0).epsilon(1e-13));
        }
        if (x == 1.0 && y == 1.0) {
            saw_corner = true;
            CHECK(l1 == doctest::Approx(3.0).epsilon(1e-13));
            CHECK(std::fabs(l2) <= 1e-13);
        }
    }
    CHECK(saw_origin);
    CHECK(saw_corner);

    CHECK(run_cli("eigen-grid --branch minus --resolution 31").exit_code == 0);
    CHECK(run_cli("eigen-grid --branch sideways").exit_code == 64);
}

TEST_CASE("price from config") {
    SUBCASE("vanilla call matches the closed form") {
        fs::path result = scratch_dir() / "call_result.json";
        auto cfg = write_config(base_call_config(), "call.json");
        auto res = run_cli("price " + cfg.string() + " --out " + result.string());
        CHECK(res.exit_code == 0);
        json out = json::parse(slurp(result));
        CHECK(std::fabs(out["value"].get<double>() - 10.450583572185565) <= 1e-6);
        CHECK(out["region"]["verdict"] == "Interior");
        CHECK(out["method"] == "quadrature");
    }

    SUBCASE("kummer vertex runs the degenerate path with diagnostics") {
        json cfg{{"schema_version", 1},
                 {"rate", 0.05},
                 {"vols", {0.2, 0.25, 0.3}},
                 {"maturity", 1.0},
                 {"correlations", {1.0, 1.0, 1.0}},
                 {"spot", {100.0, 95.0, 105.0}},
                 {"payoff",
                  {{"kind", "basket_call"},
                   {"weights", {0.3333333333333333, 0.3333333333333333, 0.3333333333333334}},
                   {"strike", 100.0}}},
                 {"method", {{"kind", "quadrature"}, {"order", 64}}}};
        fs::path result = scratch_dir() / "vertex_result.json";
        auto path = write_config(cfg, "vertex.json");
        auto res = run_cli("price " + path.string() + " --out " + result.string());
        CHECK(res.exit_code == 0);
        json out = json::parse(slurp(result));
        CHECK(out["region"]["verdict"] == "KummerSurface");
        CHECK(out["n_a"] == 1);
        CHECK(out["n_b"] == 2);
    }

    SUBCASE("indefinite config exits 3 and cites the determinant") {
        json cfg = base_call_config();
        cfg["vols"] = {0.2, 0.2, 0.2};
        cfg["spot"] = {100.0, 100.0, 100.0};
        cfg["correlations"] = {0.9, 0.9, -0.9};
        cfg["payoff"] = {{"kind", "max_call"}, {"strike", 100.0}};
        auto path = write_config(cfg, "indef.json");
        auto res = run_cli("price " + path.string());
        CHECK(res.exit_code == 3);
        CHECK(res.err.find("-2.888") != std::string::npos);
        CHECK(res.out.find("value") == std::string::npos);
    }

    SUBCASE("schema violations exit 64") {
        json cfg = base_call_config();
        cfg["surprise"] = true;
        CHECK(run_cli("price " + write_config(cfg, "unknown_key.json").string()).exit_code ==
              64);

        cfg = base_call_config();
        cfg["payoff"]["mystery"] = 1;
        CHECK(run_cli("price " + write_config(cfg, "unknown_payoff.json").string()).exit_code ==
              64);

        cfg = base_call_config();
        cfg.erase("schema_version");
        CHECK(run_cli("price " + write_config(cfg, "no_version.json").string()).exit_code == 64);

        cfg = base_call_config();
        cfg["correlations"] = {0.5, 0.5};
        CHECK(run_cli("price " + write_config(cfg, "bad_corr.json").string()).exit_code == 64);

        fs::path garbled = scratch_dir() / "garbled.json";
        std::ofstream(garbled) << "{ not json";
        CHECK(run_cli("price " + garbled.string()).exit_code == 64);
        CHECK(run_cli("price /nonexistent/config.json").exit_code == 64);
    }

    SUBCASE("monte carlo overrides are honored and deterministic") {
        json cfg = base_call_config();
        cfg["method"] = {{"kind", "monte_carlo"}, {"paths", 50000}, {"seed", 1}};
        auto path = write_config(cfg, "mc.json");
        fs::path r1 = scratch_dir() / "mc1.json", r2 = scratch_dir() / "mc2.json",
                 r3 = scratch_dir() / "mc3.json";
        CHECK(run_cli("price " + path.string() + " --seed 9 --out " + r1.string()).exit_code ==
              0);
        CHECK(run_cli("price " + path.string() + " --seed 9 --out " + r2.string()).exit_code ==
              0);
        CHECK(run_cli("price " + path.string() + " --seed 10 --out " + r3.string()).exit_code ==
              0);
        CHECK(slurp(r1) == slurp(r2));
        json a = json::parse(slurp(r1)), c = json::parse(slurp(r3));
        CHECK(a["value"] != c["value"]);
        CHECK(a.contains("std_error"));
    }

    SUBCASE("quadrature order override") {
        auto cfg = write_config(base_call_config(), "order_override.json");
        fs::path out = scratch_dir() / "order_override_result.json";
        CHECK(run_cli("price " + cfg.string() + " --quad-order 16 --out " + out.string())
                  .exit_code == 0);
        json res = json::parse(slurp(out));
        CHECK(std::fabs(res["value"].get<double>() - 10.450583572185565) <= 1e-6);
        CHECK(run_cli("price " + cfg.string() + " --quad-order 2").exit_code == 64);
    }
}

TEST_CASE("validate suites") {
    fs::path j1 = scratch_dir() / "validate1.json";
    fs::path j2 = scratch_dir() / "validate2.json";

    auto started = std::chrono::steady_clock::now();
    auto res = run_cli("validate geometry --seed 42 --out " + j1.string());
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    CHECK(res.exit_code == 0);
    CHECK(elapsed < 30.0);
    json summary = json::parse(slurp(j1));
    CHECK(summary["failed"] == 0);
    CHECK(summary["suite"] == "geometry");

    // identical seeds give byte-identical JSON
    run_cli("validate geometry --seed 42 --out " + j2.string());
    CHECK(slurp(j1) == slurp(j2));

    fs::path k1 = scratch_dir() / "kernels1.json", k2 = scratch_dir() / "kernels2.json";
    CHECK(run_cli("validate kernels --seed 7 --out " + k1.string()).exit_code == 0);
    CHECK(run_cli("validate kernels --seed 7 --out " + k2.string()).exit_code == 0);
    CHECK(slurp(k1) == slurp(k2));

    CHECK(run_cli("validate everything").exit_code == 64);

    // the full suite run twice with one seed is byte-identical
    fs::path a1 = scratch_dir() / "all1.json", a2 = scratch_dir() / "all2.json";
    CHECK(run_cli("validate all --seed 42 --out " + a1.string()).exit_code == 0);
    CHECK(run_cli("validate all --seed 42 --out " + a2.string()).exit_code == 0);
    CHECK(slurp(a1) == slurp(a2));
    json all = json::parse(slurp(a1));
    CHECK(all["failed"] == 0);
    CHECK(all["checks"].size() >= 25);

    // the injected fault must fail the named invariant
    fs::path fault = scratch_dir() / "fault.json";
    auto broken = run_cli("validate kernels --seed 7 --inject-fault --out " + fault.string());
    CHECK(broken.exit_code != 0);
    json fault_summary = json::parse(slurp(fault));
    bool found = false;
    for (const auto& check : fault_summary["checks"]) {
        if (check["name"] == "kernels/normalization_gh64") {
            found = true;
            CHECK(check["pass"] == false);
        }
    }
    CHECK(found);
}
