// Command-line front end: solves steady states and transitions, compares
// scenarios, and emits plot-ready CSVs.
//
// Exit codes: 0 success, 2 usage error, 3 non-convergence, 4 data or
// configuration validation error.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "olg/olg.hpp"

namespace fs = std::filesystem;
using namespace olg;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string data_dir;
    std::string out_dir = "out";
    std::string scenario = "baseline";
    std::string reform = "none";
    double damping = -1.0;
    double tol = -1.0;
    int max_iter = -1;
    int workers = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_scenario) {
    cmd->add_option("--config", o.config_path, "model configuration file (key = value)");
    cmd->add_option("--data-dir", o.data_dir, "input data directory (default from config/env)");
    cmd->add_option("--out", o.out_dir, "output directory");
    if (with_scenario) {
        cmd->add_option("--scenario", o.scenario, "scenario id: baseline | retire_ext");
        cmd->add_option("--reform", o.reform, "reform id: none | rr50 | med30/med10 | ltc30/ltc10");
    }
    cmd->add_option("--damping", o.damping, "fixed-point damping factor override");
    cmd->add_option("--tol", o.tol, "convergence tolerance override");
    cmd->add_option("--max-iter", o.max_iter, "iteration cap override");
    cmd->add_option("--workers", o.workers, "worker thread count (0 = hardware)");
}

ModelConfig make_config(const CommonOpts& o) {
    ModelConfig cfg;
    if (!o.config_path.empty()) cfg = ModelConfig::from_file(o.config_path);
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    else if (const char* env = std::getenv("OLG_DATA_DIR"); env && o.config_path.empty())
        cfg.data_dir = env;
    if (o.damping > 0) cfg.solver.damping = o.damping;
    if (o.tol > 0) cfg.solver.tolerance = o.tol;
    if (o.max_iter > 0) cfg.solver.max_iterations = o.max_iter;
    if (o.workers >= 0) cfg.solver.workers = o.workers;
    cfg.validate();
    return cfg;
}

struct LoadedModel {
    ModelConfig cfg;
    InputData data;
};

LoadedModel load(const CommonOpts& o) {
    LoadedModel m{make_config(o), {}};
    m.data = load_inputs(m.cfg);
    return m;
}

double auto_entry_growth(const ModelConfig& cfg, const InputData& data) {
    if (!std::isnan(cfg.ss_entry_growth)) return cfg.ss_entry_growth;
    // Match the base-year old-age dependency ratio with a stationary
    // cross-section built from the base-year survival schedule.
    auto dep = dependency_ratio(data.base_population);
    double target = dep.ratio[0];
    double lo = -0.03, hi = 0.02;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        PopulationGrid p = stationary_population(data.survival, cfg.year0, mid, data.shares, 1.0);
        auto d = dependency_ratio(p);
        // Older pyramids come from lower entry growth.
        if (d.ratio[0] > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Scenario make_scenario(const ModelConfig& cfg, const InputData& data, const std::string& scenario,
                       const std::string& reform) {
    return build_scenario(scenario, reform, cfg.year0, cfg.solver.horizon + 1, cfg.ages(),
                          data.copay_base_medical, data.copay_base_ltc, cfg.scenario);
}

struct SolvedRun {
    Scenario scenario;
    StationaryEquilibrium initial, terminal;
    TransitionResult transition;
};

SolvedRun run_transition(const ModelConfig& cfg, const InputData& data, const std::string& scenario,
                         const std::string& reform, SolverSettings settings) {
    SolvedRun run;
    run.scenario = make_scenario(cfg, data, scenario, reform);
    double g0 = auto_entry_growth(cfg, data);
    StationaryProblem init_prob = stationary_problem_from_scenario(
        run.scenario, cfg.year0, cfg.year0, g0, data.base_population.total(cfg.year0));
    run.initial = solve_stationary(cfg, data, init_prob, settings);
    int far = cfg.year0 + cfg.solver.horizon + cfg.n_ages;
    StationaryProblem term_prob = stationary_problem_from_scenario(
        run.scenario, far, cfg.year0 + data.survival.n_years, cfg.gamma_n_longrun, 1.0);
    run.terminal = solve_stationary(cfg, data, term_prob, settings);
    run.transition = solve_transition(cfg, data, run.scenario, run.initial, run.terminal, settings);
    return run;
}

RunManifest manifest_for(const std::string& command, const ModelConfig& cfg, const InputData& data,
                         const Scenario& scn, int iterations, double residual, bool converged,
                         double ms) {
    RunManifest m;
    m.command = command;
    m.scenario_id = scn.scenario_id;
    m.reform_id = scn.reform_id;
    m.config_hash = config_hash_hex(cfg);
    m.data_hashes = data.file_hashes;
    m.iterations = iterations;
    m.final_residual = residual;
    m.converged = converged;
    m.damping = cfg.solver.damping;
    m.tolerance = cfg.solver.tolerance;
    m.wall_clock_ms = ms;
    return m;
}

int cmd_steady_state(const CommonOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedModel m = load(o);
    Scenario scn = make_scenario(m.cfg, m.data, o.scenario, o.reform);
    StationaryProblem prob = stationary_problem_from_scenario(
        scn, m.cfg.year0, m.cfg.year0, auto_entry_growth(m.cfg, m.data),
        m.data.base_population.total(m.cfg.year0));
    StationaryEquilibrium eq = solve_stationary(m.cfg, m.data, prob, m.cfg.solver);
    fs::create_directories(o.out_dir);
    EconomyPath slice;
    slice.year0 = m.cfg.year0;
    slice.resize(1);
    slice.y[0] = eq.y;
    slice.gdp[0] = eq.gdp;
    slice.c[0] = eq.c_util + eq.copay;
    slice.c_util[0] = eq.c_util;
    slice.copay[0] = eq.copay;
    slice.g[0] = eq.g_pure + eq.m_gov;
    slice.g_pure[0] = eq.g_pure;
    slice.x_t[0] = eq.x_t;
    slice.x_i[0] = eq.x_i;
    slice.b[0] = eq.b;
    slice.tau_c[0] = eq.tau_c;
    slice.w[0] = eq.w;
    slice.i_k[0] = eq.i_k;
    slice.r[0] = eq.r;
    slice.psi[0] = eq.psi;
    slice.p1[0] = eq.p1;
    slice.p2[0] = eq.p2;
    slice.pension[0] = eq.pension_total;
    slice.health_gov[0] = eq.m_gov;
    emit_aggregates(slice, o.out_dir + "/aggregates.csv", m.cfg.year0, m.cfg.year0, m.cfg.year0);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_manifest(manifest_for("steady-state", m.cfg, m.data, scn, eq.iterations, eq.residual,
                               eq.converged, ms),
                  o.out_dir + "/manifest.json");
    std::cout << "steady state: K/GDP " << eq.capital.total() / eq.gdp << ", C share "
              << (eq.c_util + eq.copay + eq.g_pure + eq.m_gov) / eq.gdp << ", tau_c " << eq.tau_c
              << ", i_k " << eq.i_k << "\n";
    std::cout << "  XT/GDP " << eq.x_t / eq.gdp << ", pension/GDP " << eq.pension_total / eq.gdp
              << ", health_gov/GDP " << eq.m_gov / eq.gdp << ", copay/GDP " << eq.copay / eq.gdp
              << "\n";
    std::cout << "  labor tax/GDP " << eq.labor_tax_rev / eq.gdp << ", capital taxes/GDP "
              << (eq.corp_rev + eq.div1_rev + eq.div2_rev) / eq.gdp << ", r " << eq.r << ", psi "
              << eq.psi << ", A/GDP " << eq.assets / eq.gdp << "\n";
    {
        double pop20_64 = eq.pyramid.mass_in_calendar_range(prob.survival_year, 20, 64);
        double earn = 0.0, hours = 0.0, mass_w = 0.0;
        for (int type = 0; type < n_household_types; ++type)
            for (int j = 0; j < m.cfg.n_ages; ++j) {
                double mass = eq.pyramid(prob.survival_year, type, j);
                double e = eq.efficiency[type][j];
                if (e <= 0.0) continue;
                double z = std::pow(1.0 + m.cfg.tech.trend_growth(), j);
                earn += mass * eq.w * z * eq.ref[type].labor[j] * e / z;
                hours += mass * eq.ref[type].labor[j];
                mass_w += mass;
            }
        std::cout << "  mean worker income " << earn / mass_w << ", mean hours " << hours / mass_w
                  << ", workers " << mass_w << " of " << pop20_64 << ", iters " << eq.iterations
                  << ", walras " << eq.walras_residual / eq.gdp << ", retident "
                  << eq.return_identity_gap << "\n";
    }
    return 0;
}

void emit_transition_outputs(const ModelConfig& cfg, const InputData& data, const SolvedRun& run,
                             const std::string& out_dir, const std::string& command, double ms) {
    fs::create_directories(out_dir);
    emit_aggregates(run.transition.path, out_dir + "/aggregates.csv", cfg.report_start,
                    cfg.report_end);
    emit_solver_log(run.transition.residual_history, out_dir + "/solver_log.csv");
    emit_manifest(manifest_for(command, cfg, data, run.scenario, run.transition.iterations,
                               run.transition.final_residual, run.transition.converged, ms),
                  out_dir + "/manifest.json");
}

int cmd_transition(const CommonOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedModel m = load(o);
    SolvedRun run = run_transition(m.cfg, m.data, o.scenario, o.reform, m.cfg.solver);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_transition_outputs(m.cfg, m.data, run, o.out_dir, "transition", ms);
    if (run.transition.any_negative_tau)
        std::cerr << "warning: implied consumption tax negative in some years (reported, not clamped)\n";
    std::cout << "transition converged in " << run.transition.iterations << " iterations, residual "
              << run.transition.final_residual << "\n";
    return 0;
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
    auto pos = s.find(':');
    if (pos == std::string::npos)
        throw ValidationError("expected SCENARIO:REFORM, got '" + s + "'");
    return {s.substr(0, pos), s.substr(pos + 1)};
}

int cmd_compare(const CommonOpts& o, const std::string& a, const std::string& b) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedModel m = load(o);
    auto [sa, ra] = split_pair(a);
    auto [sb, rb] = split_pair(b);
    SolverSettings half = m.cfg.solver;
    if (half.workers == 0) half.workers = std::max(1u, std::thread::hardware_concurrency() / 2);
    auto fut = std::async(std::launch::async,
                          [&]() { return run_transition(m.cfg, m.data, sa, ra, half); });
    SolvedRun run_b = run_transition(m.cfg, m.data, sb, rb, half);
    SolvedRun run_a = fut.get();

    fs::create_directories(o.out_dir);
    csv::Writer out(o.out_dir + "/compare.csv");
    out.header({"year", "gdp_a", "gdp_b", "gdp_log_pct_diff", "tau_c_a", "tau_c_b"});
    const EconomyPath& pa = run_a.transition.path;
    const EconomyPath& pb = run_b.transition.path;
    for (int year = m.cfg.report_start; year <= m.cfg.report_end; ++year) {
        int t = year - pa.year0;
        if (t < 0 || t >= pa.n_years) continue;
        double diff = 100.0 * std::log(pb.gdp[t] / pa.gdp[t]);
        out.row({std::to_string(year), csv::format_number(pa.gdp[t]), csv::format_number(pb.gdp[t]),
                 csv::format_number(diff), csv::format_number(pa.tau_c[t]),
                 csv::format_number(pb.tau_c[t])});
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_manifest(manifest_for("compare " + a + " vs " + b, m.cfg, m.data, run_b.scenario,
                               run_b.transition.iterations, run_b.transition.final_residual,
                               run_b.transition.converged, ms),
                  o.out_dir + "/manifest.json");
    std::cout << "compare: wrote " << o.out_dir << "/compare.csv\n";
    return 0;
}

int cmd_welfare(const CommonOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedModel m = load(o);
    SolverSettings half = m.cfg.solver;
    if (half.workers == 0) half.workers = std::max(1u, std::thread::hardware_concurrency() / 2);
    auto fut = std::async(std::launch::async, [&]() {
        return run_transition(m.cfg, m.data, "baseline", "none", half);
    });
    SolvedRun reform = run_transition(m.cfg, m.data, o.scenario, o.reform, half);
    SolvedRun bench = fut.get();
    WelfareTable table = welfare_table(m.cfg, m.data, bench.transition, reform.transition);
    fs::create_directories(o.out_dir);
    emit_welfare(table, o.out_dir + "/welfare.csv", m.cfg.welfare_weighted);
    emit_welfare_by_cohort(table, o.out_dir + "/welfare_by_cohort.csv", m.cfg.entry_age);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_manifest(manifest_for("welfare", m.cfg, m.data, reform.scenario,
                               reform.transition.iterations, reform.transition.final_residual,
                               reform.transition.converged, ms),
                  o.out_dir + "/manifest.json");
    std::cout << "welfare: wrote " << o.out_dir << "/welfare.csv\n";
    return 0;
}

int cmd_decompose(const CommonOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedModel m = load(o);
    SolvedRun run = run_transition(m.cfg, m.data, o.scenario, o.reform, m.cfg.solver);
    GrowthDecomposition d = growth_decomposition(run.transition.path, m.cfg.tech);
    fs::create_directories(o.out_dir);
    emit_decomposition(d, o.out_dir + "/decomposition.csv", m.cfg.report_start, m.cfg.report_end);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_manifest(manifest_for("decompose", m.cfg, m.data, run.scenario, run.transition.iterations,
                               run.transition.final_residual, run.transition.converged, ms),
                  o.out_dir + "/manifest.json");
    std::cout << "decompose: wrote " << o.out_dir << "/decomposition.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"olgsim: overlapping-generations social security reform simulator"};
    app.require_subcommand(1);

    CommonOpts o_ss, o_tr, o_cmp, o_wf, o_dec;
    std::string cmp_a = "baseline:none", cmp_b = "baseline:rr50";

    CLI::App* ss = app.add_subcommand("steady-state", "solve the initial stationary equilibrium");
    add_common(ss, o_ss, true);
    CLI::App* tr = app.add_subcommand("transition", "solve the full transition for one scenario");
    add_common(tr, o_tr, true);
    CLI::App* cmp = app.add_subcommand("compare", "run two scenario:reform pairs and diff them");
    add_common(cmp, o_cmp, false);
    cmp->add_option("--a", cmp_a, "first run as SCENARIO:REFORM");
    cmp->add_option("--b", cmp_b, "second run as SCENARIO:REFORM");
    CLI::App* wf = app.add_subcommand("welfare", "welfare table of a reform against baseline:none");
    add_common(wf, o_wf, true);
    CLI::App* dec = app.add_subcommand("decompose", "output growth decomposition for one scenario");
    add_common(dec, o_dec, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (ss->parsed()) return cmd_steady_state(o_ss);
        if (tr->parsed()) return cmd_transition(o_tr);
        if (cmp->parsed()) return cmd_compare(o_cmp, cmp_a, cmp_b);
        if (wf->parsed()) return cmd_welfare(o_wf);
        if (dec->parsed()) return cmd_decompose(o_dec);
    } catch (const ConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 4;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
