#include "tic/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "tic/fbsde.hpp"
#include "tic/game.hpp"
#include "tic/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tic {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kExperiments = {
    "linear-verify",  "nonlinear-verify", "merton-crossval",
    "gap-study",      "game-refine",      "fbsde-check"};

struct ModelEntry {
    std::string name;
    std::string blurb;
    bool time_consistent = false;
};

const std::vector<ModelEntry>& model_table() {
    static const std::vector<ModelEntry> table = {
        {"heat",
         "drift control: b = a, sigma = 1, h = a^2/2, g = exp(-y^2); "
         "time-consistent (classical HJB limit)",
         true},
        {"merton",
         "investment-consumption, recursive power utility, two-rate "
         "discounting; time-inconsistent (params: r, mu, sigma, beta, gamma, T)",
         false},
    };
    return table;
}

const ModelEntry& model_entry(const std::string& name) {
    for (const auto& m : model_table())
        if (m.name == name) return m;
    throw ConfigError("unknown model \"" + name + "\"; see `tic list`");
}

// deep merge: `over` wins per key, objects recurse
Json merged(Json base, const Json& over) {
    for (const auto& [k, v] : over.items()) {
        if (v.is_object() && base.contains(k) && base[k].is_object())
            base[k] = merged(base[k], v);
        else
            base[k] = v;
    }
    return base;
}

SpaceTimeGrid grid_from_json(const Json& g) {
    const double T = g.value("T", 1.0);
    const std::size_t ns = g.value("ns", std::size_t{9});
    const std::size_t ny = g.value("ny", std::size_t{24});
    const double ylo = g.value("y_min", -1.0), yhi = g.value("y_max", 1.0);
    const Closure cl = closure_from_string(g.value("closure", "extrapolate"));
    if (cl == Closure::Periodic) return make_periodic_grid(T, ns, ylo, yhi, ny);
    return make_grid(T, ns, ylo, yhi, ny, cl);
}

MertonParams merton_params_from_json(const Json& params) {
    auto p = MertonParams::defaults();
    p.r = params.value("r", p.r);
    p.mu = params.value("mu", p.mu);
    p.sigma = params.value("sigma", p.sigma);
    p.beta = params.value("beta", p.beta);
    p.gamma = params.value("gamma", p.gamma);
    p.T = params.value("T", p.T);
    p.validate();
    return p;
}

HamiltonianSpec make_spec(const std::string& name, const Json& params) {
    if (name == "heat") return heat_control_spec();
    if (name == "merton")
        return merton_hamiltonian_spec(merton_params_from_json(params));
    throw ConfigError("unknown model \"" + name + "\"; see `tic list`");
}

void add_check(std::vector<Check>& checks, std::string name, double value,
               std::string op, double tol) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.op = std::move(op);
    c.tol = tol;
    c.pass = c.op == ">=" ? value >= tol : value <= tol;
    checks.push_back(std::move(c));
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%FT%TZ", &tm);
    return buf;
}

void write_rows_csv(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << "\n";
    char buf[32];
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

// shared context handed to each experiment
struct ExpContext {
    const RunConfig& cfg;
    const std::string& out;
    std::vector<Check> checks;
    Json results;
    std::vector<std::string> artifacts;

    void artifact(const std::string& name) { artifacts.push_back(name); }
    std::string path(const std::string& name) const { return out + "/" + name; }
};

// ---------------------------------------------------------------- linear
// manufactured solution u = e^{-(1/2+c)s} sin y for
//   u_s = 1/2 u_yy - c u(s,s,y,y),  g = sin y, periodic in y
void exp_linear_verify(ExpContext& ctx) {
    const Json grid_j = merged(Json{{"T", 1.0},
                                    {"ns", 17},
                                    {"ny", 32},
                                    {"y_min", -std::numbers::pi},
                                    {"y_max", std::numbers::pi},
                                    {"closure", "periodic"}},
                               ctx.cfg.grid);
    const Json solver = merged(Json{{"scheme", "crank-nicolson"},
                                    {"coupling", 0.25},
                                    {"tol", 5e-3}},
                               ctx.cfg.solver);
    const double c = solver["coupling"].get<double>();
    const double lam = 0.5 + c;

    auto solve_once = [&](const SpaceTimeGrid& g, double& err) {
        LinearProblem p;
        p.grid = g;
        p.coeffs.A[2] = [](double, double, double, double) { return 0.5; };
        p.coeffs.B[0] = [c](double, double, double, double) { return c; };
        p.coeffs.lambda_ell = 0.25;
        p.g = Field3::from_function(g, [](double, double, double y) {
            return std::sin(y);
        });
        StepperConfig sc;
        sc.scheme = scheme_from_string(solver["scheme"].get<std::string>());
        const auto u = solve_linear(p, sc);
        const auto exact = Field4::from_function(
            g, [lam](double, double s, double, double y) {
                return std::exp(-lam * s) * std::sin(y);
            });
        err = sup_diff(u, exact);
        return u;
    };

    const auto grid = grid_from_json(grid_j);
    const auto coarse = grid_from_json(merged(
        grid_j, Json{{"ns", (grid.ns() - 1) / 2 + 1}, {"ny", grid.ny() / 2}}));
    double err_fine = 0.0, err_coarse = 0.0;
    const auto u = solve_once(grid, err_fine);
    solve_once(coarse, err_coarse);

    add_check(ctx.checks, "sup_error", err_fine, "<=",
              solver["tol"].get<double>());
    add_check(ctx.checks, "refinement_ratio", err_coarse / err_fine, ">=", 2.0);
    ctx.results["sup_error"] = err_fine;
    ctx.results["coarse_error"] = err_coarse;

    write_csv(ctx.path("value.csv"), grid, diagonal_trace(u), "u_diag");
    write_t4b(ctx.path("u.t4b"), u);
    ctx.artifact("value.csv");
    ctx.artifact("u.t4b");
}

// -------------------------------------------------------------- nonlinear
// manufactured solution u = e^{-s/2} sin y for
//   u_s = 1/2 u_yy - u u(s,s,y,y) + e^{-s} sin^2 y,  g = sin y
void exp_nonlinear_verify(ExpContext& ctx) {
    const Json grid_j = merged(Json{{"T", 1.0},
                                    {"ns", 17},
                                    {"ny", 32},
                                    {"y_min", -std::numbers::pi},
                                    {"y_max", std::numbers::pi},
                                    {"closure", "periodic"}},
                               ctx.cfg.grid);
    const Json solver =
        merged(Json{{"outer_tol", 1e-9}, {"tol", 5e-3}}, ctx.cfg.solver);

    Nonlinearity F;
    F.eval = [](double, double s, double, double y, const ZState& z) {
        const double sy = std::sin(y);
        return 0.5 * z.q - z.u * z.ud + std::exp(-s) * sy * sy;
    };
    F.partials[0] = [](double, double, double, double, const ZState& z) {
        return -z.ud;
    };
    F.partials[2] = [](double, double, double, double, const ZState&) {
        return 0.5;
    };
    F.partials[3] = [](double, double, double, double, const ZState& z) {
        return -z.u;
    };
    F.lambda_ell = 0.25;

    auto solve_once = [&](const SpaceTimeGrid& g, double& err) {
        NonlinearConfig nc;
        nc.outer_tol = solver["outer_tol"].get<double>();
        const auto gdata = Field3::from_function(
            g, [](double, double, double y) { return std::sin(y); });
        auto nr = solve_nonlinear(F, gdata, g, nc);
        if (!nr.log.reached_T)
            throw SolverError("nonlinear-verify: march stopped at tau = " +
                              std::to_string(nr.log.tau));
        const auto exact =
            Field4::from_function(g, [](double, double s, double, double y) {
                return std::exp(-0.5 * s) * std::sin(y);
            });
        err = sup_diff(nr.u, exact);
        return std::move(nr.u);
    };

    const auto grid = grid_from_json(grid_j);
    const auto coarse = grid_from_json(merged(
        grid_j, Json{{"ns", (grid.ns() - 1) / 2 + 1}, {"ny", grid.ny() / 2}}));
    double err_fine = 0.0, err_coarse = 0.0;
    const auto u = solve_once(grid, err_fine);
    solve_once(coarse, err_coarse);

    add_check(ctx.checks, "sup_error", err_fine, "<=",
              solver["tol"].get<double>());
    add_check(ctx.checks, "refinement_ratio", err_coarse / err_fine, ">=", 2.0);
    ctx.results["sup_error"] = err_fine;
    ctx.results["coarse_error"] = err_coarse;

    write_csv(ctx.path("value.csv"), grid, diagonal_trace(u), "u_diag");
    write_t4b(ctx.path("u.t4b"), u);
    ctx.artifact("value.csv");
    ctx.artifact("u.t4b");
}

// --------------------------------------------------------------- merton
Json merton_grid_defaults() {
    return Json{{"T", 1.0},          {"ns", 9},      {"ny", 48},
                {"y_min", 0.125},    {"y_max", 6.0},
                {"closure", "extrapolate-quadratic"}};
}

void exp_merton_crossval(ExpContext& ctx) {
    const std::string name = ctx.cfg.model.value("name", "merton");
    if (name != "merton")
        throw ConfigError("merton-crossval requires model \"merton\", got \"" +
                          name + "\"");
    const Json grid_j = merged(merton_grid_defaults(), ctx.cfg.grid);
    const Json solver = merged(Json{{"outer_tol", 1e-7},
                                    {"value_tol", 0.02},
                                    {"ratio_tol", 0.12},
                                    {"n_quad", 161},
                                    {"window_lo", 0.875},
                                    {"window_hi", 1.625},
                                    {"s_max", 0.9}},
                               ctx.cfg.solver);
    const auto mp =
        merton_params_from_json(ctx.cfg.model.value("params", Json::object()));
    const auto spec = merton_hamiltonian_spec(mp);
    const auto grid = grid_from_json(grid_j);

    EquilibriumConfig ecfg;
    ecfg.nonlinear.outer_tol = solver["outer_tol"].get<double>();
    const auto res = solve_equilibrium(spec, grid, ecfg);
    if (!res.log.reached_T)
        throw SolverError("merton-crossval: march stopped at tau = " +
                          std::to_string(res.log.tau));

    const std::size_t nq = solver["n_quad"].get<std::size_t>();
    const auto pb = solve_integral_equation(mp, nq);
    const auto cf =
        equilibrium_closed_form(mp, solve_phi1(mp, pb), solve_phi2(mp, nq), grid);

    const double wlo = solver["window_lo"].get<double>();
    const double whi = solver["window_hi"].get<double>();
    const double smax = solver["s_max"].get<double>();
    const double ratio_exact =
        (mp.mu - mp.r) / (mp.sigma * mp.sigma * (1.0 - mp.beta));
    double rel = 0.0, ratio_err = 0.0;
    for (std::size_t j = 0; j < grid.ns(); ++j) {
        if (grid.s_nodes[j] > smax) continue;
        for (std::size_t l = 0; l < grid.ny(); ++l) {
            const double y = grid.y_nodes[l];
            if (y < wlo - 1e-9 || y > whi + 1e-9) continue;
            rel = std::max(rel, std::fabs(res.V.at(j, l) - cf.V.at(j, l)) /
                                    std::fabs(cf.V.at(j, l)));
            ratio_err = std::max(
                ratio_err,
                std::fabs(res.policy[0].at(j, l) / y - ratio_exact) /
                    ratio_exact);
        }
    }

    add_check(ctx.checks, "rel_err", rel, "<=", solver["value_tol"].get<double>());
    add_check(ctx.checks, "policy_ratio_err", ratio_err, "<=",
              solver["ratio_tol"].get<double>());
    ctx.results["rel_err"] = rel;
    ctx.results["policy_ratio_err"] = ratio_err;
    ctx.results["policy_ratio_exact"] = ratio_exact;

    write_csv(ctx.path("value.csv"), grid,
              {{"V", &res.V},
               {"V_closed_form", &cf.V},
               {"a_policy", &res.policy[0]},
               {"c_policy", &res.policy[1]},
               {"a_closed_form", &cf.a_policy},
               {"c_closed_form", &cf.c_policy}});
    write_t4b(ctx.path("u.t4b"), res.u_full);
    ctx.artifact("value.csv");
    ctx.artifact("u.t4b");
}

// -------------------------------------------------------------- gap study
void exp_gap_study(ExpContext& ctx) {
    const std::string name = ctx.cfg.model.value("name", "merton");
    const auto& entry = model_entry(name);
    const Json grid_j =
        merged(name == "merton"
                   ? merton_grid_defaults()
                   : Json{{"T", 1.0},
                          {"ns", 9},
                          {"ny", 24},
                          {"y_min", -std::numbers::pi},
                          {"y_max", std::numbers::pi},
                          {"closure", "periodic"}},
               ctx.cfg.grid);
    const Json solver = merged(Json{{"outer_tol", 1e-7},
                                    {"min_gap_tol", 1e-9},
                                    {"max_gap_min", 1e-4},
                                    {"zero_gap_tol", 1e-8}},
                               ctx.cfg.solver);
    const auto spec =
        make_spec(name, ctx.cfg.model.value("params", Json::object()));
    const auto grid = grid_from_json(grid_j);

    EquilibriumConfig ecfg;
    ecfg.nonlinear.outer_tol = solver["outer_tol"].get<double>();
    ecfg.compute_naive = true;
    const auto res = solve_equilibrium(spec, grid, ecfg);
    if (!res.log.reached_T)
        throw SolverError("gap-study: march stopped at tau = " +
                          std::to_string(res.log.tau));

    // canonical minimization order: naive dominates for utility specs
    const auto rep = res.negated ? gap_report(res.naive_value, res.V, grid)
                                 : gap_report(res.V, res.naive_value, grid);

    add_check(ctx.checks, "min_gap", rep.min_gap, ">=",
              -solver["min_gap_tol"].get<double>());
    if (entry.time_consistent)
        add_check(ctx.checks, "max_gap", rep.max_gap, "<=",
                  solver["zero_gap_tol"].get<double>());
    else
        add_check(ctx.checks, "max_gap", rep.max_gap, ">=",
                  solver["max_gap_min"].get<double>());
    ctx.results["min_gap"] = rep.min_gap;
    ctx.results["max_gap"] = rep.max_gap;
    ctx.results["gap_exponent"] =
        rep.exponent_defined ? Json(rep.fitted_exponent) : Json(nullptr);

    write_csv(ctx.path("gap.csv"), grid,
              {{"V", &res.V}, {"V_naive", &res.naive_value}, {"gap", &res.gap}});
    write_t4b(ctx.path("u.t4b"), res.u_full);
    ctx.artifact("gap.csv");
    ctx.artifact("u.t4b");
}

// ------------------------------------------------------------ game refine
void exp_game_refine(ExpContext& ctx) {
    const std::string name = ctx.cfg.model.value("name", "heat");
    const auto& entry = model_entry(name);
    const Json grid_j =
        merged(name == "merton"
                   ? merton_grid_defaults()
                   : Json{{"T", 1.0},
                          {"ns", 9},
                          {"ny", 24},
                          {"y_min", -std::numbers::pi},
                          {"y_max", std::numbers::pi},
                          {"closure", "periodic"}},
               ctx.cfg.grid);
    const Json solver = merged(
        Json{{"outer_tol", 1e-8},
             {"partitions", Json::array({"uniform:2", "uniform:4"})},
             {"tc_tol", 1e-7}},
        ctx.cfg.solver);
    const auto spec =
        make_spec(name, ctx.cfg.model.value("params", Json::object()));
    const auto grid = grid_from_json(grid_j);

    std::vector<Partition> partitions;
    for (const auto& text : solver["partitions"])
        partitions.push_back(Partition::parse(text.get<std::string>(), grid.T()));

    EquilibriumConfig ecfg;
    ecfg.nonlinear.outer_tol = solver["outer_tol"].get<double>();
    const auto rows = refine_study(spec, partitions, grid, ecfg);

    std::vector<std::vector<double>> table;
    for (const auto& r : rows) table.push_back({r.mesh, r.sup_diff});
    if (entry.time_consistent) {
        // stitching a time-consistent problem reproduces the equilibrium for
        // every partition
        for (const auto& r : rows)
            add_check(ctx.checks,
                      "sup_diff_mesh_" + std::to_string(r.mesh), r.sup_diff,
                      "<=", solver["tc_tol"].get<double>());
    } else {
        add_check(ctx.checks, "refine_contraction",
                  rows.back().sup_diff / rows.front().sup_diff, "<=", 0.999);
        add_check(ctx.checks, "final_sup_diff_positive", rows.back().sup_diff,
                  ">=", 0.0);
    }
    ctx.results["rows"] = Json::array();
    for (const auto& r : rows)
        ctx.results["rows"].push_back(
            Json{{"mesh", r.mesh}, {"sup_diff", r.sup_diff}});

    write_rows_csv(ctx.path("refine.csv"), {"mesh", "sup_diff"}, table);
    ctx.artifact("refine.csv");
}

// ------------------------------------------------------------ fbsde check
void exp_fbsde_check(ExpContext& ctx) {
    const std::string name = ctx.cfg.model.value("name", "heat");
    const Json grid_j = merged(Json{{"T", 1.0},
                                    {"ns", 9},
                                    {"ny", 25},
                                    {"y_min", -3.0},
                                    {"y_max", 3.0},
                                    {"closure", "extrapolate"}},
                               ctx.cfg.grid);
    const Json solver = merged(Json{{"outer_tol", 1e-8},
                                    {"n_paths", 500},
                                    {"n_steps", 32},
                                    {"x0", 0.0},
                                    {"abs_tol", 0.5},
                                    {"mean_tol", 0.05},
                                    {"fk_tol", 1e-8}},
                               ctx.cfg.solver);
    const auto spec =
        make_spec(name, ctx.cfg.model.value("params", Json::object()));
    const auto grid = grid_from_json(grid_j);

    EquilibriumConfig ecfg;
    ecfg.nonlinear.outer_tol = solver["outer_tol"].get<double>();
    const auto res = solve_equilibrium(spec, grid, ecfg);
    if (!res.log.reached_T)
        throw SolverError("fbsde-check: march stopped at tau = " +
                          std::to_string(res.log.tau));

    SimConfig sim;
    sim.n_paths = solver["n_paths"].get<std::size_t>();
    sim.n_steps = solver["n_steps"].get<std::size_t>();
    sim.seed = ctx.cfg.seed;
    sim.x0 = solver["x0"].get<double>();
    const auto rep = simulate_flow(res.u_full, spec, grid, sim, 0.0);

    add_check(ctx.checks, "fk_identity_error", rep.fk_identity_error, "<=",
              solver["fk_tol"].get<double>());
    add_check(ctx.checks, "residual_abs_mean", rep.residual_abs_mean, "<=",
              solver["abs_tol"].get<double>());
    add_check(ctx.checks, "bsde_residual_mean", rep.bsde_residual_mean, "<=",
              solver["mean_tol"].get<double>());
    add_check(ctx.checks, "discard_fraction", rep.discard_fraction, "<=", 0.10);
    ctx.results["rate_vs_steps"] = rep.rate_vs_steps;
    ctx.results["rate_vs_paths"] = rep.rate_vs_paths;
    ctx.results["discarded"] = rep.discarded;

    const auto zg = extract_zgamma(res.u_full, spec, grid, 0.0, sim.x0);
    write_csv(ctx.path("zgamma.csv"), grid,
              {{"Z", &zg.Z}, {"Gamma", &zg.Gamma}});
    write_csv(ctx.path("value.csv"), grid, res.V, "V");
    ctx.artifact("zgamma.csv");
    ctx.artifact("value.csv");
}

} // namespace

void RunConfig::validate() const {
    if (std::find(kExperiments.begin(), kExperiments.end(), experiment) ==
        kExperiments.end())
        throw ConfigError("unknown experiment \"" + experiment + "\"");
    if (model.contains("name")) model_entry(model["name"].get<std::string>());
    for (const auto& [k, v] : solver.items())
        if (k.find("tol") != std::string::npos && v.is_number() &&
            v.get<double>() <= 0.0)
            throw ConfigError("solver." + k + " must be > 0");
    if (grid.contains("ns") && grid["ns"].get<std::size_t>() < 2)
        throw ConfigError("grid.ns must be >= 2");
    if (grid.contains("ny") && grid["ny"].get<std::size_t>() < 4)
        throw ConfigError("grid.ny must be >= 4");
}

RunConfig parse_run_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("experiment"))
        throw ConfigError("config is missing the \"experiment\" key");
    RunConfig cfg;
    cfg.experiment = j["experiment"].get<std::string>();
    cfg.grid = j.value("grid", Json::object());
    cfg.solver = j.value("solver", Json::object());
    cfg.model = j.value("model", Json::object());
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file \"" + path + "\"");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in \"" + path + "\": " + e.what());
    }
    return parse_run_config(j);
}

const std::vector<std::string>& experiment_tags() { return kExperiments; }

std::string list_registry() {
    std::string out = "models:\n";
    for (const auto& m : model_table())
        out += "  " + m.name + "  " + m.blurb + "\n";
    out += "experiments:\n";
    for (const auto& e : kExperiments) out += "  " + e + "\n";
    return out;
}

RunReport run_experiment(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ExpContext ctx{cfg, out_dir, {}, Json::object(), {}};
    ctx.results["experiment"] = cfg.experiment;
    ctx.results["timestamp"] = timestamp_utc();
    ctx.results["seed"] = cfg.seed;

    if (cfg.experiment == "linear-verify") exp_linear_verify(ctx);
    else if (cfg.experiment == "nonlinear-verify") exp_nonlinear_verify(ctx);
    else if (cfg.experiment == "merton-crossval") exp_merton_crossval(ctx);
    else if (cfg.experiment == "gap-study") exp_gap_study(ctx);
    else if (cfg.experiment == "game-refine") exp_game_refine(ctx);
    else if (cfg.experiment == "fbsde-check") exp_fbsde_check(ctx);

    RunReport rep;
    rep.checks = ctx.checks;
    rep.pass = true;
    Json checks = Json::array();
    for (const auto& c : ctx.checks) {
        checks.push_back(Json{{"name", c.name},
                              {"value", c.value},
                              {"op", c.op},
                              {"tol", c.tol},
                              {"pass", c.pass}});
        rep.pass = rep.pass && c.pass;
        if (cfg.verbose)
            std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << " = "
                      << c.value << " (" << c.op << " " << c.tol << ")\n";
    }
    ctx.results["checks"] = checks;
    ctx.results["pass"] = rep.pass;
    ctx.results["artifacts"] = ctx.artifacts;
    rep.results = ctx.results;

    std::ofstream out(out_dir + "/results.json");
    out << rep.results.dump(2) << "\n";
    return rep;
}

int run_from_file(const std::string& config_path,
                  const std::string& output_dir_override, bool verbose,
                  int threads) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
    cfg.verbose = verbose;
    cfg.threads = threads;
#ifdef _OPENMP
    if (threads >= 1) omp_set_num_threads(threads);
#endif

    const fs::path final_dir = cfg.output_dir;
    const fs::path tmp_dir = cfg.output_dir + ".tmp";
    std::error_code ec;
    fs::remove_all(tmp_dir, ec);
    fs::create_directories(tmp_dir);
    try {
        const auto rep = run_experiment(cfg, tmp_dir.string());
        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);
        if (verbose)
            std::cout << (rep.pass ? "all checks pass" : "checks FAILED")
                      << "; artifacts in " << final_dir.string() << "\n";
        return rep.pass ? 0 : 1;
    } catch (const ConfigError& e) {
        fs::remove_all(tmp_dir, ec);
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        fs::remove_all(tmp_dir, ec);
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace tic
