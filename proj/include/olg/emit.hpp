// Result emission with stable schemas. All numeric columns use fixed
// scientific notation with 10 significant digits; identical runs produce
// byte-identical CSVs regardless of worker count.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "olg/csv.hpp"
#include "olg/equilibrium.hpp"
#include "olg/welfare.hpp"

namespace olg {

inline const std::vector<std::string>& aggregates_header() {
    static const std::vector<std::string> h = {
        "year", "gdp",  "gdp_norm2020", "y",  "c",  "x_t",     "x_i",   "g",
        "b",    "tau_c", "w",           "i_k", "r",  "psi",     "p1",    "p2",
        "pension", "health"};
    return h;
}

inline void emit_aggregates(const EconomyPath& path, const std::string& file, int report_start,
                            int report_end, int norm_year = 2020) {
    csv::Writer out(file);
    out.header(aggregates_header());
    int i0 = std::max(0, report_start - path.year0);
    int i1 = std::min(path.n_years - 1, report_end - path.year0);
    int inorm = std::clamp(norm_year - path.year0, 0, path.n_years - 1);
    double gnorm = path.gdp[inorm];
    for (int t = i0; t <= i1; ++t) {
        auto f = csv::format_number;
        out.row({std::to_string(path.year0 + t), f(path.gdp[t]), f(path.gdp[t] / gnorm),
                 f(path.y[t]), f(path.c[t]), f(path.x_t[t]), f(path.x_i[t]), f(path.g[t]),
                 f(path.b[t]), f(path.tau_c[t]), f(path.w[t]), f(path.i_k[t]), f(path.r[t]),
                 f(path.psi[t]), f(path.p1[t]), f(path.p2[t]), f(path.pension[t]),
                 f(path.health_gov[t])});
    }
}

inline void emit_welfare(const WelfareTable& table, const std::string& file, bool weighted_default) {
    csv::Writer out(file);
    out.header({"reform", "scenario", "type", "group", "cev_percent", "cev_percent_simple"});
    const char* groups[3] = {"retire", "worker", "future"};
    for (int type = 0; type < n_household_types; ++type) {
        out.row({table.reform_id, table.scenario_id, type_label(type), "total",
                 csv::format_number(weighted_default ? table.total_weighted[type]
                                                     : table.total_simple[type]),
                 csv::format_number(table.total_simple[type])});
        for (int gi = 0; gi < 3; ++gi)
            out.row({table.reform_id, table.scenario_id, type_label(type), groups[gi],
                     csv::format_number(weighted_default ? table.weighted[type][gi]
                                                         : table.simple[type][gi]),
                     csv::format_number(table.simple[type][gi])});
    }
}

inline void emit_welfare_by_cohort(const WelfareTable& table, const std::string& file,
                                   int entry_age) {
    csv::Writer out(file);
    out.header({"birth_year", "type", "group", "cev_percent"});
    for (const auto& cw : table.cohorts)
        out.row({std::to_string(cw.entry_year - entry_age), type_label(cw.type),
                 to_string(cw.group), csv::format_number(cw.cev_percent)});
}

inline void emit_decomposition(const GrowthDecomposition& d, const std::string& file,
                               int report_start, int report_end) {
    csv::Writer out(file);
    out.header({"year", "component", "contribution"});
    int n = static_cast<int>(d.total.size());
    for (int t = 0; t < n; ++t) {
        int year = d.year0 + t;
        if (year < report_start || year > report_end) continue;
        auto row = [&](const char* name, double v) {
            out.row({std::to_string(year), name, csv::format_number(v)});
        };
        row("total", d.total[t]);
        row("technology", d.technology[t]);
        row("tangible_1", d.tangible1[t]);
        row("tangible_2", d.tangible2[t]);
        row("intangible_1", d.intangible1[t]);
        row("intangible_2", d.intangible2[t]);
        row("labor_1", d.labor1[t]);
        row("labor_2", d.labor2[t]);
        row("population", d.population[t]);
    }
}

inline void emit_solver_log(const std::vector<double>& residuals, const std::string& file) {
    csv::Writer out(file);
    out.header({"iteration", "residual"});
    for (std::size_t i = 0; i < residuals.size(); ++i)
        out.row({std::to_string(i + 1), csv::format_number(residuals[i])});
}

struct RunManifest {
    std::string command;
    std::string scenario_id, reform_id;
    std::string config_hash;
    std::map<std::string, std::string> data_hashes;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    double wall_clock_ms = 0.0;
    double damping = 0.0, tolerance = 0.0;
};

inline void emit_manifest(const RunManifest& m, const std::string& file) {
    nlohmann::json j;
    j["command"] = m.command;
    j["scenario"] = m.scenario_id;
    j["reform"] = m.reform_id;
    j["config_hash"] = m.config_hash;
    j["data_hashes"] = m.data_hashes;
    j["solver"] = {{"iterations", m.iterations},
                   {"final_residual", m.final_residual},
                   {"converged", m.converged},
                   {"damping", m.damping},
                   {"tolerance", m.tolerance}};
    j["wall_clock_ms"] = m.wall_clock_ms;
    std::ofstream out(file);
    if (!out) throw ValidationError("cannot open output file: " + file);
    out << j.dump(2) << "\n";
}

inline std::string config_hash_hex(const ModelConfig& cfg) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.canonical_dump())));
    return std::string(buf);
}

}  // namespace olg
