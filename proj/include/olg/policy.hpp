// Scenario construction: the status-quo social security system, the
// retirement-age extension, and the three reform options, all expressed as
// full time paths over the simulation horizon.
//
// Shipped ids:
//   scenarios: baseline | retire_ext
//   reforms:   none | rr50 | med30 (alias med10) | ltc30 (alias ltc10)
// Reforms are announced at the simulation start and perfectly foreseen.
#pragma once

#include <string>
#include <vector>

#include "olg/common.hpp"
#include "olg/fiscal.hpp"

namespace olg {

struct ScenarioSpec {
    std::string scenario_id = "baseline";
    std::string reform_id = "none";
    int reform_year = 2030;          // medical/LTC copay reforms and retirement jump
    double kappa_start = 0.62;       // replacement rate in the base year
    double kappa_end = 0.508;        // replacement rate once the RR reform settles
    int kappa_start_year = 2015;
    int kappa_end_year = 2047;
    double medical_copay_target = 0.30;
    double ltc_copay_target = 0.30;
    int retire_age_base = 46;        // model age, calendar 65
    int retire_age_extended = 51;    // calendar 70
};

struct Scenario {
    std::string name;
    std::string scenario_id;
    std::string reform_id;
    int year0 = 2015;
    int n_years = 0;
    AgeGrid ages;
    std::vector<double> kappa;          // replacement rate path
    std::vector<int> retire_age;        // model-age J^R path
    std::vector<double> copay_medical;  // [year][age]
    std::vector<double> copay_ltc;      // [year][age]
    int reform_year = 2030;

    double medical_copay(int year, int age_idx) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return copay_medical[static_cast<std::size_t>(t) * ages.n_ages + age_idx];
    }
    double ltc_copay(int year, int age_idx) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return copay_ltc[static_cast<std::size_t>(t) * ages.n_ages + age_idx];
    }
    double replacement(int year) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return kappa[t];
    }
    int retirement_age(int year) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return retire_age[t];
    }
    int max_retirement_age() const {
        int m = 0;
        for (int jr : retire_age) m = std::max(m, jr);
        return m;
    }
    PensionRule pension_rule() const {
        PensionRule r;
        r.year0 = year0;
        r.kappa = kappa;
        r.retire_age = retire_age;
        return r;
    }
};

// Status-quo age profile: medical copay 30% under 70, 20% for 70-74,
// 10% from 75; LTC copay 10% at every age.
inline double baseline_medical_copay(int calendar_age) {
    if (calendar_age < 70) return 0.30;
    if (calendar_age < 75) return 0.20;
    return 0.10;
}
inline double baseline_ltc_copay(int) { return 0.10; }

inline std::string canonical_reform_id(const std::string& id) {
    if (id == "none") return "none";
    if (id == "rr50") return "rr50";
    if (id == "med30" || id == "med10") return "med30";
    if (id == "ltc30" || id == "ltc10") return "ltc30";
    throw ValidationError("unknown reform id '" + id +
                          "' (valid: none, rr50, med30/med10, ltc30/ltc10)");
}

inline Scenario build_scenario(const std::string& scenario_id, const std::string& reform_id,
                               int year0, int n_years, AgeGrid ages,
                               const std::vector<double>& base_medical_copay,
                               const std::vector<double>& base_ltc_copay, ScenarioSpec spec = {}) {
    if (scenario_id != "baseline" && scenario_id != "retire_ext")
        throw ValidationError("unknown scenario id '" + scenario_id +
                              "' (valid: baseline, retire_ext)");
    if (static_cast<int>(base_medical_copay.size()) != ages.n_ages ||
        static_cast<int>(base_ltc_copay.size()) != ages.n_ages)
        throw SchemaError("build_scenario: baseline copay arrays must cover every age");
    std::string reform = canonical_reform_id(reform_id);

    Scenario s;
    s.scenario_id = scenario_id;
    s.reform_id = reform;
    s.name = scenario_id + ":" + reform;
    s.year0 = year0;
    s.n_years = n_years;
    s.ages = ages;
    s.reform_year = spec.reform_year;
    s.kappa.assign(n_years, spec.kappa_start);
    s.retire_age.assign(n_years, spec.retire_age_base);
    s.copay_medical.assign(static_cast<std::size_t>(n_years) * ages.n_ages, 0.0);
    s.copay_ltc.assign(static_cast<std::size_t>(n_years) * ages.n_ages, 0.0);

    for (int t = 0; t < n_years; ++t) {
        int year = year0 + t;
        if (reform == "rr50") {
            // Linear glide between the announced endpoints, flat outside.
            if (year >= spec.kappa_end_year) {
                s.kappa[t] = spec.kappa_end;
            } else if (year > spec.kappa_start_year) {
                double f = static_cast<double>(year - spec.kappa_start_year) /
                           (spec.kappa_end_year - spec.kappa_start_year);
                s.kappa[t] = spec.kappa_start + f * (spec.kappa_end - spec.kappa_start);
            }
        }
        if (scenario_id == "retire_ext" && year >= spec.reform_year)
            s.retire_age[t] = spec.retire_age_extended;
        for (int j = 0; j < ages.n_ages; ++j) {
            double med = base_medical_copay[j];
            double ltc = base_ltc_copay[j];
            if (year >= spec.reform_year) {
                if (reform == "med30") med = spec.medical_copay_target;
                if (reform == "ltc30") ltc = spec.ltc_copay_target;
            }
            s.copay_medical[static_cast<std::size_t>(t) * ages.n_ages + j] = med;
            s.copay_ltc[static_cast<std::size_t>(t) * ages.n_ages + j] = ltc;
        }
    }
    return s;
}

// Convenience overload with the shipped status-quo copay profile.
inline Scenario build_scenario(const std::string& scenario_id, const std::string& reform_id,
                               int year0, int n_years, AgeGrid ages, ScenarioSpec spec = {}) {
    std::vector<double> med(ages.n_ages), ltc(ages.n_ages);
    for (int j = 0; j < ages.n_ages; ++j) {
        med[j] = baseline_medical_copay(ages.calendar(j));
        ltc[j] = baseline_ltc_copay(ages.calendar(j));
    }
    return build_scenario(scenario_id, reform_id, year0, n_years, ages, med, ltc, spec);
}

}  // namespace olg
