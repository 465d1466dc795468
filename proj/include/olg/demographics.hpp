// Survival schedules, cohort-component population projection and summary
// ratios. Model ages are 1-based (age 1 = calendar 20, age n = calendar
// 120 by default); all file I/O speaks calendar ages.
//
// Conventions:
//   s(t,g,j)   conditional probability that someone of model age j alive in
//              year t is alive at age j+1 in year t+1. s at the maximum age
//              is 0: nobody outlives the grid.
//   S(t,g,j)   unconditional survival through age j for the cohort whose
//              age-j year is t, i.e. the product of s along the cohort
//              diagonal ending at (j,t). S(1) = s(1).
//   alive(g,j) probability of being alive at age j given entry, under a
//              fixed schedule: product of s over ages 1..j-1.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "olg/common.hpp"

namespace olg {

struct SurvivalSchedule {
    AgeGrid ages;
    int year0 = 2015;
    int n_years = 1;
    std::vector<double> data;  // [year][gender][age]

    static SurvivalSchedule zeros(AgeGrid a, int year0, int n_years) {
        SurvivalSchedule s;
        s.ages = a;
        s.year0 = year0;
        s.n_years = n_years;
        s.data.assign(static_cast<std::size_t>(n_years) * n_genders * a.n_ages, 0.0);
        return s;
    }

    // Years past the data horizon stay at the last projected schedule.
    int clamp_year(int year) const { return std::clamp(year, year0, year0 + n_years - 1); }

    double& at(int year, Gender g, int age_idx) {
        int t = year - year0;
        return data[(static_cast<std::size_t>(t) * n_genders + static_cast<int>(g)) * ages.n_ages + age_idx];
    }
    double operator()(int year, Gender g, int age_idx) const {
        int t = clamp_year(year) - year0;
        return data[(static_cast<std::size_t>(t) * n_genders + static_cast<int>(g)) * ages.n_ages + age_idx];
    }

    void validate() const {
        if (data.size() != static_cast<std::size_t>(n_years) * n_genders * ages.n_ages)
            throw SchemaError("survival schedule: dimension mismatch between ages and years");
        for (double v : data)
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("survival schedule: probability outside [0,1]");
        for (int t = 0; t < n_years; ++t)
            for (int g = 0; g < n_genders; ++g)
                if ((*this)(year0 + t, static_cast<Gender>(g), ages.n_ages - 1) != 0.0)
                    throw ValidationError("survival schedule: s at maximum age must be 0");
    }

    // Probability of being alive at age j (1-based model age = idx+1) given
    // entry, using the schedule of a fixed year.
    std::vector<double> alive_profile(int year, Gender g) const {
        std::vector<double> alive(ages.n_ages, 1.0);
        for (int j = 1; j < ages.n_ages; ++j) alive[j] = alive[j - 1] * (*this)(year, g, j - 1);
        return alive;
    }
};

struct UnconditionalSurvival {
    AgeGrid ages;
    int year0 = 2015;
    int n_years = 1;
    std::vector<double> data;  // [year][gender][age]

    double operator()(int year, Gender g, int age_idx) const {
        int t = std::clamp(year, year0, year0 + n_years - 1) - year0;
        return data[(static_cast<std::size_t>(t) * n_genders + static_cast<int>(g)) * ages.n_ages + age_idx];
    }
};

// Eq.-style cohort product: S for the cohort observed at (age j, year t)
// multiplies the conditional rates it faced at ages 1..j. Years before the
// data window use the first available schedule.
inline UnconditionalSurvival unconditional_survival(const SurvivalSchedule& s) {
    s.validate();
    UnconditionalSurvival u;
    u.ages = s.ages;
    u.year0 = s.year0;
    u.n_years = s.n_years;
    u.data.assign(s.data.size(), 0.0);
    for (int t = 0; t < s.n_years; ++t) {
        int year = s.year0 + t;
        for (int g = 0; g < n_genders; ++g) {
            for (int j = 0; j < s.ages.n_ages; ++j) {
                double prod = 1.0;
                for (int k = 0; k <= j; ++k) prod *= s(year + (k - j), static_cast<Gender>(g), k);
                u.data[(static_cast<std::size_t>(t) * n_genders + g) * s.ages.n_ages + j] = prod;
            }
        }
    }
    return u;
}

struct CohortGrowthPath {
    int year0 = 2015;
    std::vector<double> rate;     // per-year entry-cohort growth
    double long_run = -0.01;      // held constant past the data horizon

    double operator()(int year) const {
        int t = year - year0;
        if (t < 0) t = 0;
        if (t < static_cast<int>(rate.size())) return rate[t];
        return long_run;
    }
    void validate() const {
        for (double v : rate)
            if (!std::isfinite(v)) throw ValidationError("cohort growth path: non-finite rate");
    }
};

struct TypeShares {
    double share[n_genders][n_emp_types] = {{0.0, 0.0}, {0.0, 0.0}};

    double operator()(Gender g, EmpType h) const {
        return share[static_cast<int>(g)][static_cast<int>(h)];
    }
    void validate() const {
        double sum = 0.0;
        for (auto& row : share)
            for (double v : row) {
                if (v < 0.0) throw ValidationError("type shares: negative share");
                sum += v;
            }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("type shares: shares must sum to 1, got " + std::to_string(sum));
    }
};

struct PopulationGrid {
    AgeGrid ages;
    int year0 = 2015;
    int n_years = 1;
    std::vector<double> data;  // [year][gender][emp][age]

    static PopulationGrid zeros(AgeGrid a, int year0, int n_years) {
        PopulationGrid p;
        p.ages = a;
        p.year0 = year0;
        p.n_years = n_years;
        p.data.assign(static_cast<std::size_t>(n_years) * n_household_types * a.n_ages, 0.0);
        return p;
    }

    std::size_t offset(int t, int type, int age_idx) const {
        return (static_cast<std::size_t>(t) * n_household_types + type) * ages.n_ages + age_idx;
    }
    double& at(int year, Gender g, EmpType h, int age_idx) {
        return data[offset(year - year0, type_index(g, h), age_idx)];
    }
    double& at(int year, int type, int age_idx) { return data[offset(year - year0, type, age_idx)]; }
    double operator()(int year, Gender g, EmpType h, int age_idx) const {
        return data[offset(year - year0, type_index(g, h), age_idx)];
    }
    double operator()(int year, int type, int age_idx) const {
        return data[offset(year - year0, type, age_idx)];
    }

    double total(int year) const {
        double s = 0.0;
        for (int type = 0; type < n_household_types; ++type)
            for (int j = 0; j < ages.n_ages; ++j) s += (*this)(year, type, j);
        return s;
    }
    double mass_in_calendar_range(int year, int cal_lo, int cal_hi) const {
        double s = 0.0;
        for (int type = 0; type < n_household_types; ++type)
            for (int j = 0; j < ages.n_ages; ++j) {
                int cal = ages.calendar(j);
                if (cal >= cal_lo && cal <= cal_hi) s += (*this)(year, type, j);
            }
        return s;
    }
    void validate() const {
        for (double v : data)
            if (!(v >= 0.0))
                throw ValidationError("population grid: negative or non-finite cohort mass");
    }
};

// Cohort-component projection. Aging: n[t+1,j+1] = n[t,j] * s(t,j). The
// entry cohort grows at the cohort growth rate and is split across the
// four types once, at entry.
inline PopulationGrid project_population(const PopulationGrid& initial, const SurvivalSchedule& s,
                                         const CohortGrowthPath& growth, const TypeShares& shares,
                                         int horizon_years) {
    if (horizon_years < 1) throw ValidationError("project_population: horizon must be >= 1");
    initial.validate();
    shares.validate();
    growth.validate();
    if (initial.ages.n_ages != s.ages.n_ages)
        throw SchemaError("project_population: age grids of population and survival differ");

    PopulationGrid pop = PopulationGrid::zeros(initial.ages, initial.year0, horizon_years + 1);
    for (int type = 0; type < n_household_types; ++type)
        for (int j = 0; j < pop.ages.n_ages; ++j)
            pop.at(pop.year0, type, j) = initial(initial.year0, type, j);

    double entry = 0.0;
    for (int type = 0; type < n_household_types; ++type) entry += pop(pop.year0, type, 0);

    for (int t = 0; t < horizon_years; ++t) {
        int year = pop.year0 + t;
        for (int g = 0; g < n_genders; ++g)
            for (int h = 0; h < n_emp_types; ++h)
                for (int j = 0; j + 1 < pop.ages.n_ages; ++j) {
                    double m = pop(year, static_cast<Gender>(g), static_cast<EmpType>(h), j);
                    pop.at(year + 1, static_cast<Gender>(g), static_cast<EmpType>(h), j + 1) =
                        m * s(year, static_cast<Gender>(g), j);
                }
        entry *= 1.0 + growth(year);
        for (int g = 0; g < n_genders; ++g)
            for (int h = 0; h < n_emp_types; ++h)
                pop.at(year + 1, static_cast<Gender>(g), static_cast<EmpType>(h), 0) =
                    entry * shares(static_cast<Gender>(g), static_cast<EmpType>(h));
    }
    return pop;
}

struct DependencyRatio {
    std::vector<double> ratio;        // per year; NaN for degenerate years
    std::vector<int> degenerate_years;
};

// Population 65+ over population 20-64.
inline DependencyRatio dependency_ratio(const PopulationGrid& pop) {
    if (pop.ages.entry_age > 20 || pop.ages.calendar(pop.ages.n_ages - 1) < 65)
        throw SchemaError("dependency_ratio: population grid must span ages 20-65+");
    DependencyRatio out;
    out.ratio.resize(pop.n_years);
    for (int t = 0; t < pop.n_years; ++t) {
        int year = pop.year0 + t;
        double old_mass = pop.mass_in_calendar_range(year, 65, pop.ages.calendar(pop.ages.n_ages - 1));
        double working = pop.mass_in_calendar_range(year, 20, 64);
        if (working <= 0.0) {
            out.ratio[t] = std::numeric_limits<double>::quiet_NaN();
            out.degenerate_years.push_back(year);
        } else {
            out.ratio[t] = old_mass / working;
        }
    }
    return out;
}

// Self-consistent stationary cross-section: entry cohorts grow at a constant
// rate and age under a fixed one-year schedule, so n[j+1] = n[j]*s(j)/(1+g).
inline PopulationGrid stationary_population(const SurvivalSchedule& s, int schedule_year,
                                            double entry_growth, const TypeShares& shares,
                                            double total_mass) {
    PopulationGrid pop = PopulationGrid::zeros(s.ages, schedule_year, 1);
    double sum = 0.0;
    for (int g = 0; g < n_genders; ++g) {
        auto alive = s.alive_profile(schedule_year, static_cast<Gender>(g));
        for (int h = 0; h < n_emp_types; ++h) {
            double base = shares(static_cast<Gender>(g), static_cast<EmpType>(h));
            for (int j = 0; j < s.ages.n_ages; ++j) {
                double m = base * alive[j] * std::pow(1.0 + entry_growth, -j);
                pop.at(schedule_year, static_cast<Gender>(g), static_cast<EmpType>(h), j) = m;
                sum += m;
            }
        }
    }
    if (sum > 0.0 && total_mass > 0.0)
        for (double& v : pop.data) v *= total_mass / sum;
    return pop;
}

}  // namespace olg
