// Model configuration: calibrated parameters, data locations, solver
// settings and reporting options. Read from a human-readable key=value
// file; every key has a documented default so an empty file is a valid
// configuration.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "olg/common.hpp"
#include "olg/policy.hpp"
#include "olg/production.hpp"

namespace olg {

struct SolverSettings {
    double damping = 0.5;
    double tolerance = 1e-6;   // sup-norm on detrended price paths
    int max_iterations = 3000;
    int horizon = 240;         // years from the base year
    int workers = 0;           // 0 = hardware concurrency
};

struct ModelConfig {
    // Demographics
    int year0 = 2015;
    int entry_age = 20;
    int n_ages = 101;                 // calendar 20..120
    double gamma_n_longrun = -0.01;
    double ss_entry_growth = std::nan("");  // NaN = match the base-year dependency ratio
    std::string base_pop_normalization = "none";  // none | total | by_gender

    // Preferences
    double beta = 0.983;
    double leisure_weight = 10.0;
    double frisch_male = 0.03;
    double frisch_female = 0.05;

    // Technology and capital taxes
    SectorTech tech;
    CapitalTaxes taxes;

    // Fiscal policy
    DebtRule debt;

    // Scenario knobs (overridable per run)
    ScenarioSpec scenario;

    // Data and output
    std::string data_dir = "data";

    // Solver and reporting
    SolverSettings solver;
    int report_start = 2015;
    int report_end = 2115;
    int welfare_base_year = 2020;
    bool welfare_weighted = true;  // population-weighted group means (simple means also emitted)

    AgeGrid ages() const { return AgeGrid{entry_age, n_ages}; }
    double frisch(Gender g) const { return g == Gender::male ? frisch_male : frisch_female; }

    void validate() const {
        if (n_ages < 3) throw ValidationError("config: n_ages must be at least 3");
        if (!(beta > 0 && beta <= 1)) throw ValidationError("config: beta outside (0,1]");
        if (!(frisch_male > 0 && frisch_male < 1 && frisch_female > 0 && frisch_female < 1))
            throw ValidationError("config: frisch parameters outside (0,1)");
        if (!(solver.damping > 0 && solver.damping <= 1))
            throw ValidationError("config: damping outside (0,1]");
        if (!(solver.tolerance > 0)) throw ValidationError("config: tolerance must be positive");
        if (solver.horizon < 2) throw ValidationError("config: horizon too short");
        tech.validate();
        debt.validate();
        if (report_end < report_start) throw ValidationError("config: reporting window inverted");
    }

    // Canonical text of the effective configuration, used for manifests.
    std::string canonical_dump() const;

    static ModelConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
};

inline std::string ModelConfig::canonical_dump() const {
    std::map<std::string, std::string> kv;
    auto put = [&](const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        kv[k] = os.str();
    };
    auto puti = [&](const std::string& k, long v) { kv[k] = std::to_string(v); };
    puti("year0", year0);
    puti("entry_age", entry_age);
    puti("n_ages", n_ages);
    put("gamma_n_longrun", gamma_n_longrun);
    put("ss_entry_growth", ss_entry_growth);
    kv["base_pop_normalization"] = base_pop_normalization;
    put("beta", beta);
    put("leisure_weight", leisure_weight);
    put("frisch_male", frisch_male);
    put("frisch_female", frisch_female);
    put("gamma_a", tech.gamma_a);
    put("gamma_omega", tech.gamma_omega);
    put("eta1", tech.eta1);
    put("theta_1t", tech.s1.theta_t);
    put("theta_1i", tech.s1.theta_i);
    put("theta_2t", tech.s2.theta_t);
    put("theta_2i", tech.s2.theta_i);
    put("delta_1t", tech.s1.delta_t);
    put("delta_1i", tech.s1.delta_i);
    put("delta_2t", tech.s2.delta_t);
    put("delta_2i", tech.s2.delta_i);
    put("corp_tax", taxes.corp_tax);
    put("div_tax1", taxes.div_tax1);
    put("div_tax2", taxes.div_tax2);
    put("debt_to_gdp", debt.debt_to_gdp);
    put("gov_cons_share", debt.gov_cons_share);
    put("bond_rate", debt.bond_rate);
    puti("reform_year", scenario.reform_year);
    put("kappa_start", scenario.kappa_start);
    put("kappa_end", scenario.kappa_end);
    puti("kappa_start_year", scenario.kappa_start_year);
    puti("kappa_end_year", scenario.kappa_end_year);
    put("medical_copay_target", scenario.medical_copay_target);
    put("ltc_copay_target", scenario.ltc_copay_target);
    puti("retire_age_base", scenario.retire_age_base);
    puti("retire_age_extended", scenario.retire_age_extended);
    put("damping", solver.damping);
    put("tolerance", solver.tolerance);
    puti("max_iterations", solver.max_iterations);
    puti("horizon", solver.horizon);
    puti("report_start", report_start);
    puti("report_end", report_end);
    puti("welfare_base_year", welfare_base_year);
    kv["welfare_weighted"] = welfare_weighted ? "1" : "0";
    kv["data_dir"] = data_dir;
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

inline void ModelConfig::apply(const std::string& key, const std::string& value) {
    auto num = [&]() {
        try {
            return std::stod(value);
        } catch (...) {
            throw ValidationError("config: cannot parse value '" + value + "' for key '" + key + "'");
        }
    };
    auto integer = [&]() { return static_cast<int>(std::lround(num())); };

    if (key == "year0") year0 = integer();
    else if (key == "entry_age") entry_age = integer();
    else if (key == "n_ages") n_ages = integer();
    else if (key == "gamma_n_longrun") gamma_n_longrun = num();
    else if (key == "ss_entry_growth") ss_entry_growth = (value == "auto") ? std::nan("") : num();
    else if (key == "base_pop_normalization") base_pop_normalization = value;
    else if (key == "beta") beta = num();
    else if (key == "leisure_weight") leisure_weight = num();
    else if (key == "frisch_male") frisch_male = num();
    else if (key == "frisch_female") frisch_female = num();
    else if (key == "gamma_a") tech.gamma_a = num();
    else if (key == "gamma_omega") tech.gamma_omega = num();
    else if (key == "eta1") tech.eta1 = num();
    else if (key == "theta_1t") tech.s1.theta_t = num();
    else if (key == "theta_1i") tech.s1.theta_i = num();
    else if (key == "theta_2t") tech.s2.theta_t = num();
    else if (key == "theta_2i") tech.s2.theta_i = num();
    else if (key == "delta_1t") tech.s1.delta_t = num();
    else if (key == "delta_1i") tech.s1.delta_i = num();
    else if (key == "delta_2t") tech.s2.delta_t = num();
    else if (key == "delta_2i") tech.s2.delta_i = num();
    else if (key == "corp_tax") taxes.corp_tax = num();
    else if (key == "div_tax1") taxes.div_tax1 = num();
    else if (key == "div_tax2") taxes.div_tax2 = num();
    else if (key == "debt_to_gdp") debt.debt_to_gdp = num();
    else if (key == "gov_cons_share") debt.gov_cons_share = num();
    else if (key == "bond_rate") debt.bond_rate = num();
    else if (key == "reform_year") scenario.reform_year = integer();
    else if (key == "kappa_start") scenario.kappa_start = num();
    else if (key == "kappa_end") scenario.kappa_end = num();
    else if (key == "kappa_start_year") scenario.kappa_start_year = integer();
    else if (key == "kappa_end_year") scenario.kappa_end_year = integer();
    else if (key == "medical_copay_target") scenario.medical_copay_target = num();
    else if (key == "ltc_copay_target") scenario.ltc_copay_target = num();
    else if (key == "retire_age_base") scenario.retire_age_base = integer();
    else if (key == "retire_age_extended") scenario.retire_age_extended = integer();
    else if (key == "damping") solver.damping = num();
    else if (key == "tolerance") solver.tolerance = num();
    else if (key == "max_iterations") solver.max_iterations = integer();
    else if (key == "horizon") solver.horizon = integer();
    else if (key == "workers") solver.workers = integer();
    else if (key == "report_start") report_start = integer();
    else if (key == "report_end") report_end = integer();
    else if (key == "welfare_base_year") welfare_base_year = integer();
    else if (key == "welfare_weighted") welfare_weighted = (value == "1" || value == "true");
    else if (key == "data_dir") data_dir = value;
    else throw ValidationError("config: unknown key '" + key + "'");
}

inline ModelConfig ModelConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    ModelConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r\n") == std::string::npos;
            if (!blank)
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": expected 'key = value'");
            continue;
        }
        auto strip = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            std::size_t e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (key.empty()) throw ValidationError(path + ":" + std::to_string(line_no) + ": empty key");
        try {
            cfg.apply(key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace olg
