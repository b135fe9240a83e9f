// mabs: correlation-geometry aware multi-asset option pricer.
//
// Subcommands: classify, surface, eigen-grid, price, validate.
// Exit codes: 0 success/Interior, 2 Kummer classification (classify only),
// 3 pricing undefined (indefinite correlation), 64 usage/config error,
// 1 internal failure.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mabs/correlation.hpp"
#include "mabs/errors.hpp"
#include "mabs/pricing.hpp"
#include "mabs/validation.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitKummer = 2;
constexpr int kExitIndefinite = 3;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 1;

// shortest round-trip decimal representation
std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mabs::ConfigError("cannot open output file: " + path);
    out << body;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw mabs::ConfigError("unknown key '" + it.key() + "' in " + context);
    }
}

double need_number(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_number())
        throw mabs::ConfigError("missing or non-numeric '" + key + "' in " + context);
    return j[key].get<double>();
}

// ---------------------------------------------------------------------------

int cmd_classify(const std::vector<double>& values, std::optional<double> eps_rank_opt) {
    mabs::CorrelationPoint point = mabs::CorrelationPoint::from_flat(values);
    auto decomp = mabs::spectral_decompose(mabs::assemble_matrix(point));
    double eps = eps_rank_opt.value_or(mabs::default_eps_rank(decomp));
    auto region = mabs::classify(decomp, eps);

    std::cout << "verdict:      " << mabs::to_string(region.verdict) << "\n";
    std::cout << "determinant:  " << fmt(region.determinant) << "\n";
    std::cout << "eigenvalues: ";
    for (int i = 0; i < decomp.n(); ++i) std::cout << " " << fmt(decomp.eigenvalues(i));
    std::cout << "\n";
    std::cout << "rank:         " << region.rank << "\n";
    std::cout << "null_count:   " << region.null_count << "\n";
    std::cout << "eps_rank:     " << fmt(region.tolerance_used) << "\n";

    switch (region.verdict) {
        case mabs::Verdict::Interior: return kExitOk;
        case mabs::Verdict::KummerSurface: return kExitKummer;
        case mabs::Verdict::Indefinite: return kExitIndefinite;
    }
    return kExitInternal;
}

int cmd_surface(double c, int resolution, const std::string& out_path,
                const std::string& format) {
    auto points = mabs::sample_level_surface(c, resolution);
    bool with_branch = c == 0.0;

    std::ostringstream body;
    if (format == "csv") {
        body << "# mabs surface v1\n";
        body << "# C=" << fmt(c) << " resolution=" << resolution << "\n";
        body << (with_branch ? "x,y,z,det,branch\n" : "x,y,z,det\n");
        for (const auto& p : points) {
            double x = p.entries()[0], y = p.entries()[1], z = p.entries()[2];
            body << fmt(x) << "," << fmt(y) << "," << fmt(z) << ","
                 << fmt(mabs::determinant_closed3(x, y, z));
            if (with_branch) body << "," << (z >= x * y ? "plus" : "minus");
            body << "\n";
        }
    } else {
        json rows = json::array();
        for (const auto& p : points) {
            double x = p.entries()[0], y = p.entries()[1], z = p.entries()[2];
            json row{{"x", x}, {"y", y}, {"z", z}, {"det", mabs::determinant_closed3(x, y, z)}};
            if (with_branch) row["branch"] = z >= x * y ? "plus" : "minus";
            rows.push_back(row);
        }
        body << json{{"schema_version", 1}, {"C", c}, {"resolution", resolution},
                     {"points", rows}}
                    .dump(2)
             << "\n";
    }

    if (out_path.empty())
        std::cout << body.str();
    else
        write_text(out_path, body.str());
    std::cerr << "surface: " << points.size() << " samples at C=" << fmt(c) << "\n";
    return kExitOk;
}

int cmd_eigen_grid(const std::string& branch_name, int resolution, const std::string& out_path,
                   const std::string& format) {
    mabs::SheetBranch branch;
    if (branch_name == "plus")
        branch = mabs::SheetBranch::plus;
    else if (branch_name == "minus")
        branch = mabs::SheetBranch::minus;
    else
        throw mabs::ConfigError("branch must be plus or minus");

    std::ostringstream body;
    json rows = json::array();
    if (format == "csv") {
        body << "# mabs eigen-grid v1\n";
        body << "# branch=" << branch_name << " resolution=" << resolution << "\n";
        body << "x,y,lambda1,lambda2\n";
    }
    for (int ix = 0; ix < resolution; ++ix) {
        double x = -1.0 + 2.0 * ix / (resolution - 1);
        for (int iy = 0; iy < resolution; ++iy) {
            double y = -1.0 + 2.0 * iy / (resolution - 1);
            if (!mabs::kummer_sheet_z(x, y, branch)) continue;
            auto [l1, l2] = mabs::closed3_sheet_eigenvalues(x, y, branch);
            if (format == "csv")
                body << fmt(x) << "," << fmt(y) << "," << fmt(l1) << "," << fmt(l2) << "\n";
            else
                rows.push_back(json{{"x", x}, {"y", y}, {"lambda1", l1}, {"lambda2", l2}});
        }
    }
    if (format != "csv")
        body << json{{"schema_version", 1}, {"branch", branch_name},
                     {"resolution", resolution}, {"rows", rows}}
                    .dump(2)
             << "\n";

    if (out_path.empty())
        std::cout << body.str();
    else
        write_text(out_path, body.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------

mabs::PayoffDescriptor parse_payoff(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw mabs::ConfigError("payoff must be an object with a string 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "vanilla_call" || kind == "vanilla_put") {
        reject_unknown_keys(j, {"kind", "asset", "strike"}, "payoff");
        int asset = static_cast<int>(need_number(j, "asset", "payoff"));
        double strike = need_number(j, "strike", "payoff");
        return kind == "vanilla_call" ? mabs::PayoffDescriptor::vanilla_call(asset, strike)
                                      : mabs::PayoffDescriptor::vanilla_put(asset, strike);
    }
    if (kind == "basket_call") {
        reject_unknown_keys(j, {"kind", "weights", "strike"}, "payoff");
        if (!j.contains("weights") || !j["weights"].is_array())
            throw mabs::ConfigError("basket_call payoff needs a 'weights' array");
        std::vector<double> w;
        for (const auto& v : j["weights"]) {
            if (!v.is_number()) throw mabs::ConfigError("basket weights must be numbers");
            w.push_back(v.get<double>());
        }
        return mabs::PayoffDescriptor::basket_call(std::move(w),
                                                   need_number(j, "strike", "payoff"));
    }
    if (kind == "exchange") {
        reject_unknown_keys(j, {"kind", "asset_long", "asset_short", "units"}, "payoff");
        int al = static_cast<int>(need_number(j, "asset_long", "payoff"));
        int as = static_cast<int>(need_number(j, "asset_short", "payoff"));
        double units = j.contains("units") ? need_number(j, "units", "payoff") : 1.0;
        return mabs::PayoffDescriptor::exchange(al, as, units);
    }
    if (kind == "max_call" || kind == "min_call") {
        reject_unknown_keys(j, {"kind", "strike"}, "payoff");
        double strike = need_number(j, "strike", "payoff");
        return kind == "max_call" ? mabs::PayoffDescriptor::max_call(strike)
                                  : mabs::PayoffDescriptor::min_call(strike);
    }
    throw mabs::ConfigError("unknown payoff kind '" + kind + "'");
}

struct PriceRun {
    mabs::PricingRequest request;
    std::string out_path;
    std::string format = "json";
};

PriceRun parse_price_config(const json& j) {
    if (!j.is_object()) throw mabs::ConfigError("config root must be an object");
    reject_unknown_keys(j,
                        {"schema_version", "rate", "vols", "maturity", "correlations", "spot",
                         "valuation_time", "payoff", "method", "eps_rank", "output", "format"},
                        "config");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw mabs::ConfigError("config requires schema_version = 1");

    auto vec = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array())
            throw mabs::ConfigError(std::string("missing array '") + key + "' in config");
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number())
                throw mabs::ConfigError(std::string("non-numeric entry in '") + key + "'");
            v.push_back(e.get<double>());
        }
        return v;
    };

    std::vector<double> vols = vec("vols");
    std::vector<double> spot_v = vec("spot");
    std::vector<double> corr = vec("correlations");
    mabs::MarketParams params(need_number(j, "rate", "config"), vols,
                              need_number(j, "maturity", "config"));
    if (spot_v.size() != vols.size())
        throw mabs::ConfigError("spot and vols must have the same length");
    mabs::CorrelationPoint point = mabs::CorrelationPoint::from_flat(corr);
    if (point.n_assets() != static_cast<int>(vols.size()))
        throw mabs::ConfigError("correlations length does not match the asset count");
    Eigen::VectorXd spot(spot_v.size());
    for (std::size_t i = 0; i < spot_v.size(); ++i) spot(i) = spot_v[i];

    if (!j.contains("payoff")) throw mabs::ConfigError("config needs a payoff");
    mabs::PayoffDescriptor payoff = parse_payoff(j["payoff"]);

    mabs::PricingMethod method = mabs::QuadratureSpec{};
    if (j.contains("method")) {
        const json& m = j["method"];
        if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string())
            throw mabs::ConfigError("method must be an object with a string 'kind'");
        std::string kind = m["kind"].get<std::string>();
        if (kind == "quadrature") {
            reject_unknown_keys(m, {"kind", "order", "tol"}, "method");
            mabs::QuadratureSpec q;
            if (m.contains("order")) q.order = static_cast<int>(need_number(m, "order", "method"));
            if (m.contains("tol")) q.tol = need_number(m, "tol", "method");
            method = q;
        } else if (kind == "monte_carlo") {
            reject_unknown_keys(m, {"kind", "paths", "seed"}, "method");
            mabs::MonteCarloSpec mc;
            if (m.contains("paths")) mc.paths = static_cast<long>(need_number(m, "paths", "method"));
            if (m.contains("seed"))
                mc.seed = static_cast<std::uint64_t>(need_number(m, "seed", "method"));
            method = mc;
        } else {
            throw mabs::ConfigError("unknown method kind '" + kind + "'");
        }
    }

    PriceRun run{{params, point, spot,
                  j.contains("valuation_time") ? need_number(j, "valuation_time", "config") : 0.0,
                  payoff, method},
                 "",
                 "json"};
    if (j.contains("eps_rank")) run.request.eps_rank = need_number(j, "eps_rank", "config");
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw mabs::ConfigError("'output' must be a string");
        run.out_path = j["output"].get<std::string>();
    }
    if (j.contains("format")) {
        if (!j["format"].is_string() || j["format"].get<std::string>() != "json")
            throw mabs::ConfigError("price result 'format' supports only \"json\"");
    }
    return run;
}

json region_to_json(const mabs::RegionClassification& region) {
    return json{{"verdict", mabs::to_string(region.verdict)},
                {"rank", region.rank},
                {"null_count", region.null_count},
                {"determinant", region.determinant},
                {"eps_rank", region.tolerance_used}};
}

int cmd_price(const std::string& config_path, std::optional<long> paths_override,
              std::optional<std::uint64_t> seed_override, std::optional<int> order_override,
              std::optional<double> eps_rank_override, const std::string& out_override) {
    std::ifstream in(config_path);
    if (!in) throw mabs::ConfigError("cannot open config file: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw mabs::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    PriceRun run = parse_price_config(j);
    if (auto* mc = std::get_if<mabs::MonteCarloSpec>(&run.request.method)) {
        if (paths_override) mc->paths = *paths_override;
        if (seed_override) mc->seed = *seed_override;
    } else if (auto* q = std::get_if<mabs::QuadratureSpec>(&run.request.method)) {
        if (order_override) q->order = *order_override;
    }
    if (eps_rank_override) run.request.eps_rank = *eps_rank_override;
    if (!out_override.empty()) run.out_path = out_override;

    mabs::PriceResult result = mabs::price(run.request);

    std::cout << "value:      " << fmt(result.value) << "\n";
    if (result.std_error) std::cout << "std_error:  " << fmt(*result.std_error) << "\n";
    std::cout << "method:     " << result.method_used << "\n";
    std::cout << "region:     " << mabs::to_string(result.region.verdict)
              << " (det=" << fmt(result.region.determinant) << ", rank=" << result.region.rank
              << ")\n";
    if (result.n_a) std::cout << "degenerate: N_A=" << *result.n_a << " N_B=" << *result.n_b << "\n";

    if (!run.out_path.empty()) {
        json out{{"schema_version", 1},
                 {"value", result.value},
                 {"method", result.method_used},
                 {"region", region_to_json(result.region)}};
        if (result.std_error) out["std_error"] = *result.std_error;
        if (result.n_a) {
            out["n_a"] = *result.n_a;
            out["n_b"] = *result.n_b;
        }
        write_text(run.out_path, out.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_validate(const std::string& suite, std::uint64_t seed, bool inject_fault,
                 const std::string& out_path) {
    mabs::SuiteOptions opt;
    opt.seed = seed;
    opt.inject_fault = inject_fault;
    auto results = mabs::run_validation_suite(suite, opt);

    int failed = 0;
    json checks = json::array();
    for (const auto& r : results) {
        if (!r.pass) ++failed;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  measured=" << fmt(r.measured)
                  << " threshold=" << fmt(r.threshold);
        if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
        std::cout << "  [" << fmt(r.seconds) << " s]";
        std::cout << "\n";
        checks.push_back(json{{"name", r.name},
                              {"pass", r.pass},
                              {"measured", r.measured},
                              {"threshold", r.threshold},
                              {"detail", r.detail}});
    }
    json summary{{"schema_version", 1},
                 {"suite", suite},
                 {"seed", seed},
                 {"checks", checks},
                 {"passed", static_cast<int>(results.size()) - failed},
                 {"failed", failed}};
    std::string body = summary.dump(2) + "\n";
    if (!out_path.empty())
        write_text(out_path, body);
    else
        std::cout << body;
    std::cout << (failed == 0 ? "ALL PASS" : "FAILURES") << " (" << results.size() - failed << "/"
              << results.size() << ")\n";
    return failed == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-geometry aware multi-asset Black-Scholes pricer"};
    app.require_subcommand(1);

    // classify
    auto* classify_cmd =
        app.add_subcommand("classify", "classify a correlation point against the det = 0 surface");
    std::vector<double> corr_values;
    double eps_rank = 0.0;
    classify_cmd->add_option("values", corr_values, "off-diagonal correlations, lexicographic")
        ->required()
        ->expected(-1);
    classify_cmd->add_option("--eps-rank", eps_rank, "null-eigenvalue threshold");

    // surface
    auto* surface_cmd = app.add_subcommand("surface", "sample a constant-determinant level set");
    double surface_c = 0.0;
    int resolution = 64;
    std::string out_path, format = "csv";
    surface_cmd->add_option("C", surface_c, "determinant level, -3 <= C < 1")->required();
    surface_cmd->add_option("--resolution", resolution, "grid points per axis");
    surface_cmd->add_option("--out", out_path, "output file (default stdout)");
    surface_cmd->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // eigen-grid
    auto* eigen_cmd =
        app.add_subcommand("eigen-grid", "nonzero sheet eigenvalues over the (x,y) grid");
    std::string branch = "plus";
    int eigen_resolution = 101;
    std::string eigen_out, eigen_format = "csv";
    eigen_cmd->add_option("--branch", branch, "plus|minus")
        ->check(CLI::IsMember({"plus", "minus"}));
    eigen_cmd->add_option("--resolution", eigen_resolution, "grid points per axis");
    eigen_cmd->add_option("--out", eigen_out, "output file (default stdout)");
    eigen_cmd->add_option("--format", eigen_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // price
    auto* price_cmd = app.add_subcommand("price", "price a claim from a JSON config");
    std::string config_path, price_out;
    long paths_override = -1;
    std::int64_t seed_override = -1;
    int order_override = -1;
    double price_eps_rank = 0.0;
    price_cmd->add_option("config", config_path, "JSON config path")->required();
    price_cmd->add_option("--paths", paths_override, "override Monte Carlo paths");
    price_cmd->add_option("--seed", seed_override, "override Monte Carlo seed");
    price_cmd->add_option("--quad-order", order_override, "override quadrature order");
    price_cmd->add_option("--eps-rank", price_eps_rank, "override the null-eigenvalue threshold");
    price_cmd->add_option("--out", price_out, "write the result JSON here");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "run a validation suite");
    std::string suite;
    std::uint64_t validate_seed = 42;
    bool inject_fault = false;
    std::string validate_out;
    validate_cmd->add_option("suite", suite, "geometry|kernels|pricing|all")->required();
    validate_cmd->add_option("--seed", validate_seed, "random seed for the suite");
    validate_cmd->add_option("--out", validate_out, "write the JSON summary here");
    validate_cmd
        ->add_flag("--inject-fault", inject_fault,
                   "self-check: flip a sign so a named invariant must fail")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (classify_cmd->parsed())
            return cmd_classify(corr_values, classify_cmd->count("--eps-rank")
                                                 ? std::optional<double>(eps_rank)
                                                 : std::nullopt);
        if (surface_cmd->parsed()) return cmd_surface(surface_c, resolution, out_path, format);
        if (eigen_cmd->parsed())
            return cmd_eigen_grid(branch, eigen_resolution, eigen_out, eigen_format);
        if (price_cmd->parsed())
            return cmd_price(config_path,
                             paths_override >= 0 ? std::optional<long>(paths_override)
                                                 : std::nullopt,
                             seed_override >= 0
                                 ? std::optional<std::uint64_t>(
                                       static_cast<std::uint64_t>(seed_override))
                                 : std::nullopt,
                             order_override >= 0 ? std::optional<int>(order_override)
                                                 : std::nullopt,
                             price_cmd->count("--eps-rank")
                                 ? std::optional<double>(price_eps_rank)
                                 : std::nullopt,
                             price_out);
        if (validate_cmd->parsed())
            return cmd_validate(suite, validate_seed, inject_fault, validate_out);
    } catch (const mabs::IndefiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIndefinite;
    } catch (const mabs::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const mabs::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
