// Input ingestion and validation. Everything the model consumes arrives
// through the CSV files documented in data/README.md; loading fails fast
// with per-row diagnostics before any solve starts.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "olg/common.hpp"
#include "olg/config.hpp"
#include "olg/csv.hpp"
#include "olg/demographics.hpp"
#include "olg/fiscal.hpp"

namespace olg {

struct InputData {
    AgeGrid ages;
    int year0 = 2015;
    SurvivalSchedule survival;
    PopulationGrid base_population;  // single base-year slice
    CohortGrowthPath growth;
    TypeShares shares;
    std::vector<std::vector<double>> efficiency;  // [type][age], raw profiles
    std::vector<std::vector<double>> med_raw;     // [gender][age] per-capita medical cost
    std::vector<std::vector<double>> ltc_raw;     // [gender][age] per-user LTC cost
    std::vector<std::vector<double>> cert_rate;   // [gender][age] LTC certification rate
    std::vector<double> copay_base_medical;       // [age]
    std::vector<double> copay_base_ltc;           // [age]
    ProgressiveTaxTable tax_table;
    std::map<std::string, std::string> file_hashes;

    // Scenario-effective efficiency: raw profile, extended flat from the
    // last working age when the retirement age moves past the data.
    std::vector<double> effective_efficiency(int type, int max_retire_age) const {
        std::vector<double> e = efficiency[type];
        int last_positive = -1;
        for (int j = 0; j < ages.n_ages; ++j)
            if (e[j] > 0.0) last_positive = j;
        if (last_positive < 0) return e;
        for (int j = last_positive + 1; j < std::min(max_retire_age - 1, ages.n_ages); ++j)
            if (e[j] == 0.0) e[j] = e[last_positive];
        return e;
    }
};

namespace detail {

inline std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open input file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

}  // namespace detail

inline InputData load_inputs(const ModelConfig& cfg) {
    namespace fs = std::filesystem;
    InputData d;
    d.ages = cfg.ages();
    d.year0 = cfg.year0;

    auto path_of = [&](const std::string& name) {
        fs::path p = fs::path(cfg.data_dir) / name;
        if (!fs::exists(p)) throw ValidationError("missing data file: " + p.string());
        return p.string();
    };
    auto load = [&](const std::string& name) {
        std::string p = path_of(name);
        d.file_hashes[name] = detail::hash_file_hex(p);
        return csv::read_file(p);
    };

    // --- survival.csv: year, age, gender, s ------------------------------
    {
        csv::Table t = load("survival.csv");
        int cy = t.column("year"), ca = t.column("age"), cg = t.column("gender"), cs = t.column("s");
        int min_year = 1 << 30, max_year = -(1 << 30);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int y = static_cast<int>(t.number(r, cy));
            min_year = std::min(min_year, y);
            max_year = std::max(max_year, y);
        }
        if (min_year != cfg.year0)
            throw ValidationError("survival.csv: first year must equal the base year " +
                                  std::to_string(cfg.year0));
        d.survival = SurvivalSchedule::zeros(d.ages, min_year, max_year - min_year + 1);
        std::vector<bool> seen(d.survival.data.size(), false);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int y = static_cast<int>(t.number(r, cy));
            int cal = static_cast<int>(t.number(r, ca));
            if (!d.ages.holds_calendar(cal))
                throw ValidationError(t.context(r) + ": age " + std::to_string(cal) +
                                      " outside the model range");
            Gender g = parse_gender(t.cell(r, cg));
            double v = t.number(r, cs);
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError(t.context(r) + ": survival probability " + t.cell(r, cs) +
                                      " outside [0,1]");
            int j = d.ages.index_of_calendar(cal);
            d.survival.at(y, g, j) = v;
            seen[(static_cast<std::size_t>(y - min_year) * n_genders + static_cast<int>(g)) *
                     d.ages.n_ages +
                 j] = true;
        }
        for (bool b : seen)
            if (!b) throw SchemaError("survival.csv: incomplete year/age/gender coverage");
        d.survival.validate();
    }

    // --- population0.csv: age, gender, emp_type, mass --------------------
    {
        csv::Table t = load("population0.csv");
        int ca = t.column("age"), cg = t.column("gender"), ch = t.column("emp_type"),
            cm = t.column("mass");
        d.base_population = PopulationGrid::zeros(d.ages, cfg.year0, 1);
        std::vector<bool> seen(static_cast<std::size_t>(n_household_types) * d.ages.n_ages, false);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int cal = static_cast<int>(t.number(r, ca));
            if (!d.ages.holds_calendar(cal))
                throw ValidationError(t.context(r) + ": age outside the model range");
            Gender g = parse_gender(t.cell(r, cg));
            EmpType h = parse_emp_type(t.cell(r, ch));
            double m = t.number(r, cm);
            if (!(m >= 0.0))
                throw ValidationError(t.context(r) + ": negative cohort mass");
            int j = d.ages.index_of_calendar(cal);
            d.base_population.at(cfg.year0, g, h, j) = m;
            seen[static_cast<std::size_t>(type_index(g, h)) * d.ages.n_ages + j] = true;
        }
        for (bool b : seen)
            if (!b) throw SchemaError("population0.csv: incomplete age/gender/emp_type coverage");
    }

    // --- type_shares.csv: gender, emp_type, share ------------------------
    {
        csv::Table t = load("type_shares.csv");
        int cg = t.column("gender"), ch = t.column("emp_type"), cs = t.column("share");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            Gender g = parse_gender(t.cell(r, cg));
            EmpType h = parse_emp_type(t.cell(r, ch));
            d.shares.share[static_cast<int>(g)][static_cast<int>(h)] = t.number(r, cs);
        }
        d.shares.validate();
    }

    // --- cohort_growth.csv: year, rate ------------------------------------
    {
        csv::Table t = load("cohort_growth.csv");
        int cy = t.column("year"), cr = t.column("rate");
        std::map<int, double> rates;
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            rates[static_cast<int>(t.number(r, cy))] = t.number(r, cr);
        if (rates.empty() || rates.begin()->first != cfg.year0)
            throw ValidationError("cohort_growth.csv: must start at the base year");
        d.growth.year0 = cfg.year0;
        d.growth.long_run = cfg.gamma_n_longrun;
        int expect = cfg.year0;
        for (const auto& [y, rate] : rates) {
            if (y != expect)
                throw ValidationError("cohort_growth.csv: years must be contiguous, missing " +
                                      std::to_string(expect));
            d.growth.rate.push_back(rate);
            ++expect;
        }
        d.growth.validate();
    }

    // --- productivity.csv: age, gender, emp_type, efficiency --------------
    {
        csv::Table t = load("productivity.csv");
        int ca = t.column("age"), cg = t.column("gender"), ch = t.column("emp_type"),
            ce = t.column("efficiency");
        d.efficiency.assign(n_household_types, std::vector<double>(d.ages.n_ages, 0.0));
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int cal = static_cast<int>(t.number(r, ca));
            if (!d.ages.holds_calendar(cal))
                throw ValidationError(t.context(r) + ": age outside the model range");
            Gender g = parse_gender(t.cell(r, cg));
            EmpType h = parse_emp_type(t.cell(r, ch));
            double e = t.number(r, ce);
            if (!(e >= 0.0)) throw ValidationError(t.context(r) + ": negative efficiency");
            d.efficiency[type_index(g, h)][d.ages.index_of_calendar(cal)] = e;
        }
        for (int type = 0; type < n_household_types; ++type) {
            double sum = 0.0;
            for (double e : d.efficiency[type]) sum += e;
            if (sum <= 0.0)
                throw ValidationError("productivity.csv: type " + type_label(type) +
                                      " has no positive efficiency");
        }
    }

    // --- health_costs.csv: age, gender, medical, ltc, cert_rate -----------
    {
        csv::Table t = load("health_costs.csv");
        int ca = t.column("age"), cg = t.column("gender"), cm = t.column("medical"),
            cl = t.column("ltc"), cc = t.column("cert_rate");
        d.med_raw.assign(n_genders, std::vector<double>(d.ages.n_ages, 0.0));
        d.ltc_raw.assign(n_genders, std::vector<double>(d.ages.n_ages, 0.0));
        d.cert_rate.assign(n_genders, std::vector<double>(d.ages.n_ages, 0.0));
        std::vector<bool> seen(static_cast<std::size_t>(n_genders) * d.ages.n_ages, false);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int cal = static_cast<int>(t.number(r, ca));
            if (!d.ages.holds_calendar(cal))
                throw ValidationError(t.context(r) + ": age outside the model range");
            Gender g = parse_gender(t.cell(r, cg));
            double med = t.number(r, cm), ltc = t.number(r, cl), cert = t.number(r, cc);
            if (!(med >= 0) || !(ltc >= 0))
                throw ValidationError(t.context(r) + ": negative health cost");
            if (!(cert >= 0 && cert <= 1))
                throw ValidationError(t.context(r) + ": certification rate outside [0,1]");
            int j = d.ages.index_of_calendar(cal);
            d.med_raw[static_cast<int>(g)][j] = med;
            d.ltc_raw[static_cast<int>(g)][j] = ltc;
            d.cert_rate[static_cast<int>(g)][j] = cert;
            seen[static_cast<std::size_t>(static_cast<int>(g)) * d.ages.n_ages + j] = true;
        }
        for (bool b : seen)
            if (!b) throw SchemaError("health_costs.csv: incomplete age/gender coverage");
    }

    // --- copay_baseline.csv: age, medical_rate, ltc_rate -------------------
    {
        csv::Table t = load("copay_baseline.csv");
        int ca = t.column("age"), cm = t.column("medical_rate"), cl = t.column("ltc_rate");
        d.copay_base_medical.assign(d.ages.n_ages, -1.0);
        d.copay_base_ltc.assign(d.ages.n_ages, -1.0);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int cal = static_cast<int>(t.number(r, ca));
            if (!d.ages.holds_calendar(cal))
                throw ValidationError(t.context(r) + ": age outside the model range");
            double m = t.number(r, cm), l = t.number(r, cl);
            if (!(m >= 0 && m <= 1 && l >= 0 && l <= 1))
                throw ValidationError(t.context(r) + ": copayment rate outside [0,1]");
            d.copay_base_medical[d.ages.index_of_calendar(cal)] = m;
            d.copay_base_ltc[d.ages.index_of_calendar(cal)] = l;
        }
        for (int j = 0; j < d.ages.n_ages; ++j)
            if (d.copay_base_medical[j] < 0 || d.copay_base_ltc[j] < 0)
                throw SchemaError("copay_baseline.csv: missing age " +
                                  std::to_string(d.ages.calendar(j)));
    }

    // --- tax_table.csv: lower, rate, alpha, beta ---------------------------
    {
        csv::Table t = load("tax_table.csv");
        int cl = t.column("lower"), cr = t.column("rate"), ca = t.column("alpha"),
            cb = t.column("beta");
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            d.tax_table.brackets.push_back(
                {t.number(r, cl), t.number(r, cr), t.number(r, ca), t.number(r, cb)});
        d.tax_table.validate();
    }

    // Base-year population normalization switch (how the file masses and
    // the type shares interact is not pinned down by the data sources).
    if (cfg.base_pop_normalization == "total") {
        double total = d.base_population.total(cfg.year0);
        if (total > 0)
            for (double& v : d.base_population.data) v /= total;
    } else if (cfg.base_pop_normalization == "by_gender") {
        // Re-split each age/gender cell across employment types at the
        // entry shares, preserving age-by-gender totals.
        for (int g = 0; g < n_genders; ++g) {
            double gs = d.shares.share[g][0] + d.shares.share[g][1];
            if (gs <= 0) continue;
            for (int j = 0; j < d.ages.n_ages; ++j) {
                double tot = 0.0;
                for (int h = 0; h < n_emp_types; ++h)
                    tot += d.base_population(cfg.year0, static_cast<Gender>(g),
                                             static_cast<EmpType>(h), j);
                for (int h = 0; h < n_emp_types; ++h)
                    d.base_population.at(cfg.year0, static_cast<Gender>(g), static_cast<EmpType>(h),
                                         j) = tot * d.shares.share[g][h] / gs;
            }
        }
    } else if (cfg.base_pop_normalization != "none") {
        throw ValidationError("config: base_pop_normalization must be none, total or by_gender");
    }
    d.base_population.validate();
    return d;
}

}  // namespace olg
