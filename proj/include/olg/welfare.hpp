// Welfare comparisons between converged runs: per-cohort consumption-
// equivalent variation, the generational summary table, and the output
// growth decomposition.
//
// With log consumption utility the CEV of a reform is exact:
//   cev = exp(dV / sum_j beta^(j-j0) Pr(alive at j | alive at j0)) - 1,
// the uniform percent rescaling of remaining-lifetime consumption in the
// benchmark that reproduces the reform's remaining-lifetime value.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "olg/common.hpp"
#include "olg/config.hpp"
#include "olg/equilibrium.hpp"

namespace olg {

enum class Generation { retired, worker, future };

inline const char* to_string(Generation g) {
    switch (g) {
        case Generation::retired: return "retire";
        case Generation::worker: return "worker";
        default: return "future";
    }
}

struct CohortWelfare {
    int type = 0;
    int entry_year = 0;  // calendar year of model age 1 (birth year + 20)
    Generation group = Generation::worker;
    double cev_percent = 0.0;
    double weight = 0.0;
};

// Discounted survival-weighted count of remaining periods, the exact
// divisor for log-utility CEV.
inline double remaining_weight(const InputData& data, const ModelConfig& cfg, int type,
                               int entry_year, int from_age) {
    Gender g = type_gender(type);
    double sum = 0.0;
    double alive = 1.0;
    for (int j = from_age; j < cfg.n_ages; ++j) {
        sum += std::pow(cfg.beta, j - from_age) * alive;
        alive *= data.survival(entry_year + j, g, j);
    }
    return sum;
}

// Percent change in welfare of one cohort under `reform` relative to
// `benchmark`, evaluated at the welfare base year for cohorts alive then
// and at entry for cohorts entering later.
inline double cohort_welfare_change(const ModelConfig& cfg, const InputData& data,
                                    const TransitionResult& benchmark,
                                    const TransitionResult& reform, int type, int entry_year) {
    const HouseholdSolution* vb = benchmark.cohort(type, entry_year);
    const HouseholdSolution* vr = reform.cohort(type, entry_year);
    if (!vb || !vr)
        throw ValidationError("cohort_welfare_change: cohort entering " +
                              std::to_string(entry_year) + " absent from a run");
    int at_age = std::max(0, cfg.welfare_base_year - entry_year);
    if (at_age >= cfg.n_ages)
        throw ValidationError("cohort_welfare_change: cohort entering " +
                              std::to_string(entry_year) + " no longer alive in the base year");
    at_age = std::max(at_age, vb->first_age);
    double dv = vr->value[at_age] - vb->value[at_age];
    double denom = remaining_weight(data, cfg, type, entry_year, at_age);
    return (std::exp(dv / denom) - 1.0) * 100.0;
}

struct WelfareTable {
    std::string scenario_id, reform_id;
    // [type][group]: population-weighted and simple means, percent.
    double weighted[n_household_types][3] = {};
    double simple[n_household_types][3] = {};
    double total_weighted[n_household_types] = {};
    double total_simple[n_household_types] = {};
    std::vector<CohortWelfare> cohorts;
};

// Per-type generational summary. Cohorts aged 65+ in the base year form
// the retired group, ages 20-64 the workers, and cohorts entering after
// the base year (up to the reporting horizon) the future group. Future
// cohorts are weighted by entry mass compounded back to the base year at
// the long-run population growth rate.
inline WelfareTable welfare_table(const ModelConfig& cfg, const InputData& data,
                                  const TransitionResult& benchmark,
                                  const TransitionResult& reform) {
    WelfareTable table;
    table.scenario_id = reform.scenario.scenario_id;
    table.reform_id = reform.scenario.reform_id;
    const int base = cfg.welfare_base_year;
    const int retire_age = cfg.scenario.retire_age_base;  // generational split uses age 65

    double wsum[n_household_types][3] = {};
    double vsum[n_household_types][3] = {};
    double csum[n_household_types][3] = {};
    int ncount[n_household_types][3] = {};

    int first_entry = benchmark.path.year0 - (cfg.n_ages - 1);
    int last_entry = std::min(cfg.report_end, benchmark.path.year0 + cfg.solver.horizon);
    for (int entry = first_entry; entry <= last_entry; ++entry) {
        int age_at_base = base - entry;  // 0-based model age in the base year
        if (age_at_base >= cfg.n_ages) continue;  // dead before the base year
        for (int type = 0; type < n_household_types; ++type) {
            Generation group;
            double weight;
            if (age_at_base < 0) {
                group = Generation::future;
                weight = reform.pop(entry, type, 0) *
                         std::pow(1.0 + cfg.gamma_n_longrun, base - entry);
            } else {
                group = (age_at_base + 1) >= retire_age ? Generation::retired : Generation::worker;
                weight = reform.pop(base, type, age_at_base);
            }
            if (weight <= 0.0) continue;
            double cev = cohort_welfare_change(cfg, data, benchmark, reform, type, entry);
            CohortWelfare cw;
            cw.type = type;
            cw.entry_year = entry;
            cw.group = group;
            cw.cev_percent = cev;
            cw.weight = weight;
            table.cohorts.push_back(cw);
            int gi = static_cast<int>(group);
            wsum[type][gi] += weight;
            vsum[type][gi] += weight * cev;
            csum[type][gi] += cev;
            ncount[type][gi] += 1;
        }
    }
    for (int type = 0; type < n_household_types; ++type) {
        double wtot = 0, vtot = 0, ctot = 0;
        int ntot = 0;
        for (int gi = 0; gi < 3; ++gi) {
            table.weighted[type][gi] = wsum[type][gi] > 0 ? vsum[type][gi] / wsum[type][gi] : 0.0;
            table.simple[type][gi] = ncount[type][gi] > 0 ? csum[type][gi] / ncount[type][gi] : 0.0;
            wtot += wsum[type][gi];
            vtot += vsum[type][gi];
            ctot += csum[type][gi];
            ntot += ncount[type][gi];
        }
        table.total_weighted[type] = wtot > 0 ? vtot / wtot : 0.0;
        table.total_simple[type] = ntot > 0 ? ctot / ntot : 0.0;
    }
    return table;
}

// Exact Cobb-Douglas decomposition of output log growth into technology,
// per-sector factor, and population contributions. Components sum to
// dlog Y identically.
struct GrowthDecomposition {
    int year0 = 2015;
    std::vector<double> total;       // dlog Y
    std::vector<double> technology;  // TFP + labor-augmenting
    std::vector<double> tangible1, tangible2, intangible1, intangible2;
    std::vector<double> labor1, labor2;  // per-worker labor input shifts
    std::vector<double> population;
};

inline GrowthDecomposition growth_decomposition(const EconomyPath& path, const SectorTech& tech) {
    GrowthDecomposition d;
    d.year0 = path.year0;
    int n = path.n_years - 1;
    auto init = [&](std::vector<double>& v) { v.assign(std::max(n, 0), 0.0); };
    init(d.total);
    init(d.technology);
    init(d.tangible1);
    init(d.tangible2);
    init(d.intangible1);
    init(d.intangible2);
    init(d.labor1);
    init(d.labor2);
    init(d.population);
    double chi = tech.capital_share();
    double tech_rate = (1.0 - chi) * (std::log(1.0 + tech.gamma_a) + std::log(1.0 + tech.gamma_omega));
    for (int t = 0; t < n; ++t) {
        double dn = std::log(path.population[t + 1] / path.population[t]);
        d.technology[t] = tech_rate;
        d.tangible1[t] = tech.eta1 * tech.s1.theta_t * std::log(path.k1t[t + 1] / path.k1t[t]);
        d.intangible1[t] = tech.eta1 * tech.s1.theta_i * std::log(path.k1i[t + 1] / path.k1i[t]);
        d.tangible2[t] = tech.eta2() * tech.s2.theta_t * std::log(path.k2t[t + 1] / path.k2t[t]);
        d.intangible2[t] = tech.eta2() * tech.s2.theta_i * std::log(path.k2i[t + 1] / path.k2i[t]);
        d.labor1[t] =
            tech.eta1 * tech.s1.labor_share() * std::log((path.l1[t + 1] / path.population[t + 1]) /
                                                         (path.l1[t] / path.population[t]));
        d.labor2[t] =
            tech.eta2() * tech.s2.labor_share() * std::log((path.l2[t + 1] / path.population[t + 1]) /
                                                           (path.l2[t] / path.population[t]));
        d.population[t] = (1.0 - chi) * dn;
        d.total[t] = std::log(path.y[t + 1] / path.y[t]);  // components sum to this identically
    }
    return d;
}

}  // namespace olg
