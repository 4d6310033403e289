#include "otlim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace otlim {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Check {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

void add_check(std::vector<Check>& checks, const std::string& name, double value,
               double threshold) {
    checks.push_back({name, value, threshold, value <= threshold});
}

json checks_to_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"pass", c.pass}});
    return arr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

}  // namespace

void RunConfig::validate() const {
    problem.validate();
    if (simplex_resolution < 2) throw ConfigError("simplex_resolution: must be >= 2");
    if (dual_resolution < 2) throw ConfigError("dual_resolution: must be >= 2");
    if (solver != "exact" && solver != "entropic")
        throw ConfigError("solver: must be \"exact\" or \"entropic\"");
    entropic.validate();
    if (pushforward_bins < 1) throw ConfigError("pushforward_bins: must be >= 1");
    if (!(delta_wall > 0.0)) throw ConfigError("delta_wall: must be > 0");
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }

    RunConfig cfg;
    auto require = [&](const char* field) -> const json& {
        if (!j.contains(field))
            throw ConfigError(std::string("config: missing field \"") + field + "\"");
        return j.at(field);
    };
    auto get_int = [&](const json& v, const char* field) -> int {
        if (!v.is_number_integer())
            throw ConfigError(std::string("config: field \"") + field +
                              "\" must be an integer");
        return v.get<int>();
    };

    cfg.problem.n = get_int(require("n"), "n");
    cfg.problem.m = get_int(require("m"), "m");
    const char* dkey = j.contains("degrees") ? "degrees" : "d";
    const json& dv = require(dkey);
    if (!dv.is_array()) throw ConfigError(std::string("config: field \"") + dkey +
                                          "\" must be an array of integers");
    for (const auto& e : dv) cfg.problem.degrees.push_back(get_int(e, dkey));

    int N = j.contains("N") ? get_int(j.at("N"), "N") : 0;
    cfg.simplex_resolution =
        j.contains("simplex_resolution") ? get_int(j.at("simplex_resolution"),
                                                   "simplex_resolution")
                                         : N;
    cfg.dual_resolution =
        j.contains("dual_resolution") ? get_int(j.at("dual_resolution"), "dual_resolution")
                                      : N;
    if (j.contains("solver")) {
        if (!j.at("solver").is_string())
            throw ConfigError("config: field \"solver\" must be a string");
        cfg.solver = j.at("solver").get<std::string>();
    }
    if (j.contains("entropic")) {
        const json& e = j.at("entropic");
        if (e.contains("eps_start")) cfg.entropic.eps_start = e.at("eps_start").get<double>();
        if (e.contains("eps_final")) cfg.entropic.eps_final = e.at("eps_final").get<double>();
        if (e.contains("factor")) cfg.entropic.factor = e.at("factor").get<double>();
        if (e.contains("max_iterations_per_level"))
            cfg.entropic.max_iterations_per_level =
                e.at("max_iterations_per_level").get<long>();
        if (e.contains("marginal_tol_l1"))
            cfg.entropic.marginal_tol_l1 = e.at("marginal_tol_l1").get<double>();
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("pushforward_bins"))
        cfg.pushforward_bins = get_int(j.at("pushforward_bins"), "pushforward_bins");
    if (j.contains("delta_wall")) cfg.delta_wall = j.at("delta_wall").get<double>();
    if (j.contains("emit_plan")) cfg.emit_plan = j.at("emit_plan").get<bool>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("reports")) {
        const json& r = j.at("reports");
        if (r.contains("oracle_comparison"))
            cfg.reports.oracle_comparison = r.at("oracle_comparison").get<bool>();
        if (r.contains("chamber_map")) cfg.reports.chamber_map = r.at("chamber_map").get<bool>();
        if (r.contains("fs_ks")) cfg.reports.fs_ks = r.at("fs_ks").get<std::vector<int>>();
        if (r.contains("mu_checks")) cfg.reports.mu_checks = r.at("mu_checks").get<bool>();
        if (r.contains("independence"))
            cfg.reports.independence = r.at("independence").get<bool>();
        if (r.contains("symmetry")) cfg.reports.symmetry = r.at("symmetry").get<bool>();
    }

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

namespace {

void write_measure_csv(const std::filesystem::path& path,
                       const std::vector<SimplexPoint>& pts, const Vec& w) {
    std::string out;
    const int m = static_cast<int>(pts[0].x.size()) - 1;
    for (int i = 0; i <= m; ++i) out += "x_" + std::to_string(i) + ",";
    out += "weight\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (double v : pts[i].x) out += fmt17(v) + ",";
        out += fmt17(w[i]) + "\n";
    }
    write_text(path, out);
}

int label_code(const PointLabel& l) {
    switch (l.kind) {
        case LabelKind::Chamber: return l.chamber;
        case LabelKind::Wall: return -1;
        default: return -2;
    }
}

}  // namespace

int validate_pipeline(const RunConfig& cfg, bool strict) {
    cfg.validate();
    const auto& pb = cfg.problem;
    std::vector<Check> checks;

    SimplexGrid grid = SimplexGrid::make(pb.m, cfg.simplex_resolution);
    DualGrid dual = DualGrid::make(pb, cfg.dual_resolution);
    const auto mu = source_measure(grid);
    const auto nu = target_measure(dual);

    const double c1_cf = C1_closed_form(pb);
    const double c1_q = C1_quadrature(pb, std::max(50, cfg.simplex_resolution / 4));
    const double c1_rel = std::fabs(c1_q - c1_cf) / c1_cf;
    add_check(checks, "c1_relative_error", c1_rel, 1e-6);

    const double expected_count = static_cast<double>(
        binomial(cfg.simplex_resolution + pb.m, pb.m));
    add_check(checks, "grid_count_mismatch",
              std::fabs(static_cast<double>(grid.points.size()) - expected_count), 0.0);

    const double mu_mass = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    const double nu_mass = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    add_check(checks, "source_mass_error", std::fabs(mu_mass - 1.0), 1e-12);
    add_check(checks, "target_mass_error", std::fabs(nu_mass - 1.0), 1e-12);

    json report;
    report["schema_version"] = 1;
    report["mode"] = "validate";
    report["problem"] = {{"n", pb.n}, {"m", pb.m}, {"degrees", pb.degrees}};
    report["resolutions"] = {{"simplex", cfg.simplex_resolution},
                             {"dual", cfg.dual_resolution}};
    report["grid_counts"] = {{"simplex", grid.points.size()},
                             {"dual", dual.points.size()}};
    report["c1"] = {{"closed_form", c1_cf},
                    {"quadrature", c1_q},
                    {"relative_error", c1_rel}};
    report["checks"] = checks_to_json(checks);
    report["strict"] = strict;

    std::filesystem::create_directories(cfg.output_dir);
    write_text(std::filesystem::path(cfg.output_dir) / "report.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << std::endl;

    if (strict)
        for (const auto& c : checks)
            if (!c.pass) return kExitValidationError;
    return 0;
}

int run_pipeline(const RunConfig& cfg, bool strict) {
    cfg.validate();
    const auto& pb = cfg.problem;
    std::vector<Check> checks;
    json report;
    report["schema_version"] = 1;
    report["mode"] = "run";
    report["problem"] = {{"n", pb.n}, {"m", pb.m}, {"degrees", pb.degrees}};
    report["resolutions"] = {{"simplex", cfg.simplex_resolution},
                             {"dual", cfg.dual_resolution}};

    SimplexGrid grid = SimplexGrid::make(pb.m, cfg.simplex_resolution);
    DualGrid dual = DualGrid::make(pb, cfg.dual_resolution);
    const auto mu = source_measure(grid);
    const auto nu = target_measure(dual);
    const auto cost = CostSpec::make(grid, dual);
    report["grid_counts"] = {{"simplex", grid.points.size()},
                             {"dual", dual.points.size()}};

    const double c1_cf = C1_closed_form(pb);
    const double c1_q = C1_quadrature(pb, std::max(50, cfg.simplex_resolution / 4));
    const double c1_rel = std::fabs(c1_q - c1_cf) / c1_cf;
    report["c1"] = {{"closed_form", c1_cf},
                    {"quadrature", c1_q},
                    {"relative_error", c1_rel}};
    add_check(checks, "c1_relative_error", c1_rel, 1e-6);

    TransportPlan plan;
    try {
        if (cfg.solver == "exact")
            plan = solve_exact(mu, nu, cost);
        else
            plan = solve_entropic(mu, nu, cost, cfg.entropic);
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << std::endl;
        return kExitSolverError;
    }
    report["solver"] = {{"backend", plan.report.backend},
                        {"iterations", plan.report.iterations},
                        {"final_eps", plan.report.final_eps},
                        {"achieved_cost", plan.achieved_cost},
                        {"duality_gap", plan.report.duality_gap},
                        {"marginal_error_l1", plan.report.marginal_error_l1},
                        {"runtime_seconds", plan.report.runtime_seconds}};
    add_check(checks, "marginal_error_l1", plan.report.marginal_error_l1, 1e-7);
    if (cfg.solver == "exact")
        add_check(checks, "duality_gap", std::fabs(plan.report.duality_gap),
                  std::max(1e-9 * plan.achieved_cost, 1e-12));
    else
        add_check(checks, "duality_gap", std::fabs(plan.report.duality_gap),
                  cfg.entropic.eps_final *
                          std::log(static_cast<double>(plan.n_source) *
                                   static_cast<double>(plan.n_target)) +
                      1e-6);

    const auto map = brenier_map(plan, cost, pb);
    const auto pot = ConvexPotential::from_duals(plan, grid, dual);
    const auto cmap = classify(grid, map, cfg.delta_wall, pb);

    // pushforward histogram against coarse dual bins
    {
        DualGrid bins = DualGrid::make(pb, cfg.pushforward_bins);
        const auto pf = pushforward_histogram(map, mu, dual, nu, bins);
        report["pushforward"] = {{"bins_resolution", cfg.pushforward_bins},
                                 {"bin_count", bins.points.size()},
                                 {"tv", pf.tv}};
        add_check(checks, "pushforward_tv", pf.tv, pb.m == 1 ? 0.05 : 0.08);
    }

    // oracle comparison and wall location (m = 1)
    if (pb.m == 1 && cfg.reports.oracle_comparison) {
        M1ClosedForm oracle(pb);
        double sup = 0.0;
        for (std::size_t i = 0; i < grid.points.size(); ++i) {
            const double x0 = grid.points[i].x[0];
            if (x0 < 0.02 || x0 > 0.98) continue;
            sup = std::max(sup, std::fabs(-map.t_phat[i][0] - oracle.uprime(x0)));
        }
        report["oracle"] = {{"sup_error_interior", sup}, {"interior_margin", 0.02}};
        add_check(checks, "oracle_sup_error", sup, cfg.solver == "exact" ? 0.03 : 0.05);
        try {
            const double wall_x = wall_location_m1(grid, map);
            const double expected = oracle.kink();
            report["wall"] = {{"location", wall_x},
                              {"expected", expected},
                              {"abs_error", std::fabs(wall_x - expected)},
                              {"delta_wall", cfg.delta_wall},
                              {"fraction", wall_fraction(cmap, mu)}};
            add_check(checks, "wall_abs_error", std::fabs(wall_x - expected),
                      1.0 / cfg.simplex_resolution);
        } catch (const EmptyChamberError&) {
            report["wall"] = {{"location", nullptr},
                              {"delta_wall", cfg.delta_wall},
                              {"fraction", wall_fraction(cmap, mu)}};
            add_check(checks, "wall_abs_error",
                      std::numeric_limits<double>::infinity(),
                      1.0 / cfg.simplex_resolution);
        }
    }

    report["chambers"] = {{"counts", cmap.chamber_counts},
                          {"wall", cmap.wall_count},
                          {"unresolved", cmap.unresolved_count},
                          {"wall_fraction", wall_fraction(cmap, mu)}};

    // double Legendre idempotence on the grid
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.points.size(); ++i)
            worst = std::max(worst,
                             std::fabs(pot.double_legendre(grid.points[i].x) - pot.u[i]));
        report["double_legendre"] = {{"max_abs_error", worst}};
        add_check(checks, "double_legendre_max_abs_error", worst,
                  cfg.solver == "exact" ? 5e-3 : 2e-2);
    }

    // FS approximant sandwich table
    if (!cfg.reports.fs_ks.empty()) {
        // measured Lipschitz constant of u* over adjacent dual points
        double lip = 0.0;
        for (std::size_t a = 0; a < dual.points.size(); ++a)
            for (std::size_t b = a + 1; b < dual.points.size(); ++b) {
                const double dist =
                    std::sqrt(sq_dist(dual.points[a].reduced(), dual.points[b].reduced()));
                if (dist > 1.5 * dual.spacing() || dist == 0.0) continue;
                lip = std::max(lip, std::fabs(pot.u_star[a] - pot.u_star[b]) / dist);
            }
        double lip_u = 0.0;
        for (std::size_t i = 0; i + 1 < grid.points.size(); ++i) {
            const double dist = std::sqrt(
                sq_dist(grid.points[i].reduced(), grid.points[i + 1].reduced()));
            if (dist == 0.0 || dist > 2.0 / cfg.simplex_resolution) continue;
            lip_u = std::max(lip_u, std::fabs(pot.u[i + 1] - pot.u[i]) / dist);
        }
        const double slack = 2.0 * lip_u / cfg.simplex_resolution;
        json fs = json::array();
        for (int k : cfg.reports.fs_ks) {
            const Vec phi = fs_approximant_grid(pot, k);
            double deficit = 0.0, excess = 0.0;
            for (std::size_t i = 0; i < phi.size(); ++i) {
                deficit = std::max(deficit, pot.u[i] - phi[i]);
                excess = std::max(excess, phi[i] - pot.u[i]);
            }
            fs.push_back({{"k", k},
                          {"max_deficit", deficit},
                          {"max_excess", excess},
                          {"lipschitz_bound", lip / k}});
            add_check(checks, "fs_deficit_k" + std::to_string(k), deficit,
                      lip / k + slack);
            add_check(checks, "fs_excess_k" + std::to_string(k), excess, slack);
        }
        report["fs_sandwich"] = fs;
        report["fs_lipschitz_ustar"] = lip;
        report["fs_grid_slack"] = slack;
    }

    // Mu checks (m <= 2)
    if (cfg.reports.mu_checks && pb.m <= 2) {
        const auto cells = simplex_grid_cells(grid);
        const double mu_total = ma_measure(pot, cells, map, pb);
        const double total_rel = std::fabs(mu_total - c1_cf) / c1_cf;
        json mu_report = {{"total", mu_total},
                          {"c1", c1_cf},
                          {"total_relative_error", total_rel}};
        add_check(checks, "mu_total_relative_error", total_rel, 0.02);
        if (pb.m == 1) {
            const double cell_mass =
                c1_cf / std::pow(static_cast<double>(cfg.simplex_resolution),
                                 static_cast<double>(pb.m));
            double rel_sum = 0.0;
            std::size_t count = 0;
            for (const auto& cell : cells) {
                bool interior = true;
                for (std::size_t c : cell.corners) {
                    const double x0 = grid.points[c].x[0];
                    if (x0 < 0.02 || x0 > 0.98) interior = false;
                }
                if (!interior) continue;
                const double v = ma_measure(pot, {cell}, map, pb);
                rel_sum += std::fabs(v - cell_mass) / cell_mass;
                ++count;
            }
            const double per_cell = count ? rel_sum / count : 0.0;
            mu_report["per_cell_mean_relative_error"] = per_cell;
            mu_report["interior_cells"] = count;
            add_check(checks, "mu_per_cell_mean_relative_error", per_cell, 0.05);
        }
        report["mu"] = mu_report;
    }

    // chamber-interior coordinate independence
    if (cfg.reports.independence) {
        json arr = json::array();
        const Vec offsets = {0.05, -0.05};
        for (int k = 0; k <= pb.m; ++k) {
            if (cmap.chamber_counts[k] == 0) continue;
            const double dev = independence_check(pot, cmap, k, offsets);
            arr.push_back({{"cell", k}, {"max_deviation", dev}});
            if (pb.m == 1)
                add_check(checks, "independence_cell" + std::to_string(k), dev,
                          5e-3 + dual.spacing());
        }
        report["independence"] = arr;
    }

    // instance symmetry under degree-preserving permutations
    if (cfg.reports.symmetry) {
        const auto perms = degree_preserving_permutations(pb);
        double sup = 0.0;
        for (const auto& sigma : perms) sup = std::max(sup, symmetry_check(pot, sigma, pb));
        report["symmetry"] = {{"max_over_permutations", sup},
                              {"n_permutations", perms.size()}};
        if (perms.size() > 1) add_check(checks, "symmetry_sup", sup, 2e-2);
    }

    report["checks"] = checks_to_json(checks);
    report["strict"] = strict;

    // artifacts
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path out(cfg.output_dir);
    const int m = pb.m;
    {
        std::string csv;
        for (int i = 0; i <= m; ++i) csv += "x_" + std::to_string(i) + ",";
        csv += "u,";
        for (int i = 0; i <= m; ++i) csv += "t_p_" + std::to_string(i) + ",";
        csv += "label\n";
        for (std::size_t i = 0; i < grid.points.size(); ++i) {
            for (double v : grid.points[i].x) csv += fmt17(v) + ",";
            csv += fmt17(pot.u[i]) + ",";
            for (double v : map.t_canonical[i].p) csv += fmt17(v) + ",";
            csv += std::to_string(label_code(cmap.labels[i])) + "\n";
        }
        write_text(out / "potential.csv", csv);
    }
    {
        std::string csv;
        for (int i = 0; i <= m; ++i) csv += "p_" + std::to_string(i) + ",";
        csv += "u_star\n";
        for (std::size_t j = 0; j < dual.points.size(); ++j) {
            for (double v : dual.points[j].p) csv += fmt17(v) + ",";
            csv += fmt17(pot.u_star[j]) + "\n";
        }
        write_text(out / "dual.csv", csv);
    }
    {
        std::string csv;
        for (int i = 0; i <= m; ++i) csv += "x_" + std::to_string(i) + ",";
        for (int i = 1; i <= m; ++i) csv += "t_phat_" + std::to_string(i) + ",";
        for (int i = 0; i <= m; ++i)
            csv += "t_p_" + std::to_string(i) + (i < m ? "," : "\n");
        for (std::size_t i = 0; i < grid.points.size(); ++i) {
            for (double v : grid.points[i].x) csv += fmt17(v) + ",";
            for (double v : map.t_phat[i]) csv += fmt17(v) + ",";
            for (int c = 0; c <= m; ++c)
                csv += fmt17(map.t_canonical[i].p[c]) + (c < m ? "," : "\n");
        }
        write_text(out / "map.csv", csv);
    }
    if (cfg.reports.chamber_map) {
        std::string csv;
        for (int i = 0; i <= m; ++i) csv += "x_" + std::to_string(i) + ",";
        csv += "label\n";
        for (std::size_t i = 0; i < grid.points.size(); ++i) {
            for (double v : grid.points[i].x) csv += fmt17(v) + ",";
            csv += std::to_string(label_code(cmap.labels[i])) + "\n";
        }
        write_text(out / "chambers.csv", csv);

        std::string wcsv = "cell";
        for (int i = 0; i <= m; ++i) wcsv += ",corner_" + std::to_string(i);
        wcsv += "\n";
        const auto cells = simplex_grid_cells(grid);
        for (std::size_t c : cmap.wall_cells) {
            wcsv += std::to_string(c);
            for (std::size_t v : cells[c].corners) wcsv += "," + std::to_string(v);
            wcsv += "\n";
        }
        write_text(out / "wall_cells.csv", wcsv);
    }
    if (cfg.emit_plan) {
        std::string csv = "i,j,mass\n";
        for (std::size_t i = 0; i < plan.n_source; ++i)
            for (std::size_t t = plan.row_offsets[i]; t < plan.row_offsets[i + 1]; ++t)
                csv += std::to_string(i) + "," + std::to_string(plan.cols[t]) + "," +
                       fmt17(plan.mass[t]) + "\n";
        write_text(out / "plan.csv", csv);
    }
    write_measure_csv(out / "source_measure.csv", grid.points, mu.weights);
    write_text(out / "report.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << std::endl;

    if (strict)
        for (const auto& c : checks)
            if (!c.pass) return kExitValidationError;
    return 0;
}

}  // namespace otlim
