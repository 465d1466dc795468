// Deterministic lifecycle problem of one cohort: choose consumption, hours
// and non-negative assets to maximize discounted utility
//     sum_j beta^(j-1) * Pr(alive at j) * [ log c_j + gamma (1-l_j)^(1-zeta)/(1-zeta) ]
// subject to the per-age budget
//     (1+tau_c) c + copay-weighted health + s a' = (1+r) a + y - T(y) + pension + transfer,
// with annuity-priced savings (next-period assets cost s * a', survivors
// absorb the estates of the deceased) and y = w * l * e.
//
// Solution method: the problem is deterministic and concave, so the exact
// optimum is found by shooting on the Euler chain. Within a segment of ages
// where the borrowing constraint is slack, consumption follows
//     c_{j+1} (1+tau_{j+1}) = beta (1+r_{j+1}) c_j (1+tau_j),
// hours come from the piecewise-closed-form labor condition, and assets
// follow the budget. Segment-initial consumption is the only unknown; the
// terminal condition (assets exhausted) pins it down by a monotone
// one-dimensional root find. Ages where the constraint binds split the
// life into segments; the split points are located by shooting the
// unconstrained problem and cutting at the deepest violation.
//
// This reproduces interior Euler and labor first-order conditions to
// machine precision, which a value-function grid cannot do.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "olg/common.hpp"
#include "olg/demographics.hpp"
#include "olg/fiscal.hpp"

namespace olg {

// After-tax gross portfolio return: a share psi of assets is held in
// government bonds, the rest in capital claims.
inline double portfolio_return(double psi, double bond_rate, double equity_rate) {
    if (!(psi >= 0.0 && psi <= 1.0)) throw ValidationError("portfolio_return: psi outside [0,1]");
    return psi * (1.0 + bond_rate) + (1.0 - psi) * (1.0 + equity_rate) - 1.0;
}

struct HouseholdPrefs {
    double beta = 0.983;          // discount factor
    double leisure_weight = 10.0; // gamma
    double frisch = 0.03;         // zeta, gender specific

    double utility(double c, double l) const {
        return std::log(c) +
               leisure_weight * std::pow(1.0 - l, 1.0 - frisch) / (1.0 - frisch);
    }
    double marginal_leisure(double l) const {
        return leisure_weight * std::pow(1.0 - l, -frisch);
    }
};

// Hours that satisfy the labor first-order condition
//   gamma (1-l)^(-zeta) = weff (1 - tau') / ((1+tau_c) c)
// given consumption. The marginal tax rate tau' depends on y = weff * l,
// so the condition is solved bracket by bracket in closed form; where the
// solution falls on a bracket kink the kink value is returned (the FOC
// interval brackets zero there).
inline double labor_choice(double c, double weff, double cons_tax, double tax_scale,
                           const ProgressiveTaxTable& table, double gamma, double zeta) {
    if (weff <= 0.0 || c <= 0.0) return 0.0;
    const double d = weff / ((1.0 + cons_tax) * c * gamma);
    const int nb = static_cast<int>(table.brackets.size());
    for (int i = 0; i < nb; ++i) {
        double lo = table.brackets[i].lower * tax_scale / weff;
        if (lo >= 1.0) break;
        double hi = (i + 1 < nb) ? table.brackets[i + 1].lower * tax_scale / weff : 1.0;
        double k = d * (1.0 - table.brackets[i].rate);
        double l_star = (k > 1.0) ? 1.0 - std::pow(k, -1.0 / zeta) : 0.0;
        if (l_star < lo) return lo;              // kink (or corner at 0 when i == 0)
        if (l_star < hi || i + 1 == nb) return std::min(l_star, 1.0 - 1e-12);
    }
    return 0.0;
}

// Hours and consumption that satisfy both the labor condition and the
// within-age budget when next-period assets are pinned (used at ages where
// the borrowing constraint binds or life ends). The composed condition is
// monotone in hours, so a guarded bisection is exact.
inline void labor_and_consumption(double resources_ex_labor, double weff, double cons_tax,
                                  double tax_scale, const ProgressiveTaxTable& table, double gamma,
                                  double zeta, double& l_out, double& c_out) {
    auto c_of = [&](double l) {
        double y = weff * l;
        return (resources_ex_labor + y - table.tax_scaled(y, tax_scale)) / (1.0 + cons_tax);
    };
    if (weff <= 0.0) {
        l_out = 0.0;
        c_out = c_of(0.0);
        return;
    }
    // phi(l) = gamma(1-l)^(-zeta) (1+tau_c) c(l) - weff (1-tau'(y)): strictly
    // increasing, so the root (or corner at 0) is unique.
    auto phi = [&](double l) {
        double y = weff * l;
        double c = c_of(l);
        if (c <= 0.0) return -1e300;  // labor is needed for a feasible budget
        return gamma * std::pow(1.0 - l, -zeta) * (1.0 + cons_tax) * c -
               weff * (1.0 - table.marginal_rate_scaled(y, tax_scale));
    };
    if (phi(0.0) >= 0.0) {
        l_out = 0.0;
        c_out = c_of(0.0);
        return;
    }
    double lo = 0.0, hi = 1.0 - 1e-12;
    for (int i = 0; i < 120; ++i) {
        double mid = 0.5 * (lo + hi);
        if (phi(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    l_out = 0.5 * (lo + hi);
    c_out = c_of(l_out);
}

// Per-age price and policy environment faced by one cohort. Arrays are
// indexed by age (0-based; model age = index+1) and must cover
// [first_age, n_ages).
struct CohortInputs {
    int n_ages = 0;
    int first_age = 0;
    double initial_assets = 0.0;
    std::vector<double> wage;          // per efficiency unit
    std::vector<double> rate;          // portfolio return earned at that age
    std::vector<double> cons_tax;      // tau_c
    std::vector<double> tax_scale;     // trend index for the bracket floors
    std::vector<double> efficiency;    // e, zero when not working
    std::vector<double> pension;       // per-head benefit
    std::vector<double> health_outlay; // copay-weighted medical + LTC
    std::vector<double> transfer;      // lump transfers (dividends etc.)
    std::vector<double> survival;      // s(j): survive age j -> j+1; 0 at last age
    std::vector<std::uint8_t> can_work;
    const ProgressiveTaxTable* tax_table = nullptr;
    int entry_year = 0;  // calendar year of model age 1, for diagnostics
    int type = 0;

    void check() const {
        if (!tax_table) throw ValidationError("cohort inputs: missing tax table");
        if (first_age < 0 || first_age >= n_ages)
            throw ValidationError("cohort inputs: first age out of range");
        auto need = [&](const std::vector<double>& v, const char* name) {
            if (static_cast<int>(v.size()) != n_ages)
                throw SchemaError(std::string("cohort inputs: array '") + name + "' has wrong length");
        };
        need(wage, "wage");
        need(rate, "rate");
        need(cons_tax, "cons_tax");
        need(tax_scale, "tax_scale");
        need(efficiency, "efficiency");
        need(pension, "pension");
        need(health_outlay, "health_outlay");
        need(transfer, "transfer");
        need(survival, "survival");
        if (static_cast<int>(can_work.size()) != n_ages)
            throw SchemaError("cohort inputs: array 'can_work' has wrong length");
        if (initial_assets < 0) throw ValidationError("cohort inputs: negative initial assets");
    }
};

struct HouseholdSolution {
    int first_age = 0;
    std::vector<double> consumption;
    std::vector<double> labor;
    std::vector<double> assets;  // size n_ages+1, assets held at the start of each age
    std::vector<double> value;   // remaining-lifetime value at each age
    std::vector<double> utility; // per-age flow utility
};

namespace detail {

struct ShootScratch {
    std::vector<double> c, l, a, ad;
};

// Forward pass over [j0, j1] given segment-initial consumption. The asset
// recursion runs in survival-discounted units ad_j = a_j * prod(s) so the
// terminal condition stays well conditioned even where the survival prefix
// is minute; per-capita assets are recovered by division for storage.
// Returns the discounted budget residual at j1 with terminal assets zero.
inline double shoot_forward(const HouseholdPrefs& pref, const CohortInputs& in, int j0, double a0,
                            int j1, double c0, ShootScratch& s) {
    double c = c0;
    double ad = a0;      // discounted assets, prefix normalized at j0
    double prefix = 1.0; // prod of survival within the segment up to age j
    s.a[j0] = a0;
    s.ad[j0] = a0;
    for (int j = j0; j <= j1; ++j) {
        if (j > j0)
            c *= pref.beta * (1.0 + in.rate[j]) * (1.0 + in.cons_tax[j - 1]) / (1.0 + in.cons_tax[j]);
        double weff = in.can_work[j] ? in.wage[j] * in.efficiency[j] : 0.0;
        double l = labor_choice(c, weff, in.cons_tax[j], in.tax_scale[j], *in.tax_table,
                                pref.leisure_weight, pref.frisch);
        double y = weff * l;
        double tax = in.tax_table->tax_scaled(y, in.tax_scale[j]);
        double flow = y - tax + in.pension[j] + in.transfer[j] - in.health_outlay[j] -
                      (1.0 + in.cons_tax[j]) * c;
        s.c[j] = c;
        s.l[j] = l;
        if (j < j1) {
            ad = (1.0 + in.rate[j]) * ad + prefix * flow;
            prefix *= in.survival[j];
            s.ad[j + 1] = ad;
            s.a[j + 1] = ad / prefix;
        } else {
            return (1.0 + in.rate[j]) * ad + prefix * flow;
        }
    }
    return 0.0;  // unreachable
}

// Monotone root find (Illinois variant) for segment-initial consumption.
inline double shoot_segment(const HouseholdPrefs& pref, const CohortInputs& in, int j0, double a0,
                            int j1, double scale, ShootScratch& s) {
    double c_lo = 1e-13 * scale;
    double f_lo = shoot_forward(pref, in, j0, a0, j1, c_lo, s);
    if (f_lo < 0.0) {
        int worst = j1;
        double worst_a = 0.0;
        for (int j = j0 + 1; j <= j1; ++j)
            if (s.a[j] < worst_a) { worst_a = s.a[j]; worst = j; }
        throw InfeasibleError("infeasible budget: cohort entering " + std::to_string(in.entry_year) +
                              " type " + type_label(in.type) + " cannot cover mandatory outlays near age " +
                              std::to_string(20 + worst));
    }
    double c_hi = 4.0 * scale;
    double f_hi = shoot_forward(pref, in, j0, a0, j1, c_hi, s);
    int expand = 0;
    while (f_hi > 0.0 && expand++ < 60) {
        c_hi *= 4.0;
        f_hi = shoot_forward(pref, in, j0, a0, j1, c_hi, s);
    }
    if (f_hi > 0.0) throw ConvergenceError("lifecycle shoot: could not bracket the budget root");

    double side = 0.0;
    double c_mid = c_hi, f_mid = f_hi;
    for (int it = 0; it < 300; ++it) {
        c_mid = (f_lo * c_hi - f_hi * c_lo) / (f_lo - f_hi);
        if (!(c_mid > c_lo && c_mid < c_hi)) c_mid = 0.5 * (c_lo + c_hi);
        f_mid = shoot_forward(pref, in, j0, a0, j1, c_mid, s);
        if (std::abs(f_mid) <= 1e-13 * scale || (c_hi - c_lo) <= 1e-15 * c_hi) break;
        if (f_mid > 0.0) {
            c_lo = c_mid;
            f_lo = f_mid;
            if (side == 1.0) f_hi *= 0.5;
            side = 1.0;
        } else {
            c_hi = c_mid;
            f_hi = f_mid;
            if (side == -1.0) f_lo *= 0.5;
            side = -1.0;
        }
    }
    // Final evaluation at the accepted root so scratch holds its path.
    shoot_forward(pref, in, j0, a0, j1, c_mid, s);
    return c_mid;
}

}  // namespace detail

inline HouseholdSolution solve_lifecycle(const HouseholdPrefs& pref, const CohortInputs& in) {
    in.check();
    const int n = in.n_ages;
    const int j_first = in.first_age;
    const int j_last = n - 1;

    // Resource scale for tolerances and root bounds.
    double scale = in.initial_assets;
    for (int j = j_first; j < n; ++j)
        scale += std::max(0.0, in.wage[j] * in.efficiency[j]) + in.pension[j] +
                 std::max(0.0, in.transfer[j]);
    scale = std::max(scale, 1e-9);

    detail::ShootScratch scratch;
    scratch.c.assign(n, 0.0);
    scratch.l.assign(n, 0.0);
    scratch.a.assign(n + 1, 0.0);
    scratch.ad.assign(n + 1, 0.0);

    HouseholdSolution out;
    out.first_age = j_first;
    out.consumption.assign(n, 0.0);
    out.labor.assign(n, 0.0);
    out.assets.assign(n + 1, 0.0);
    out.value.assign(n + 1, 0.0);
    out.utility.assign(n, 0.0);

    const double feas_tol = 1e-11 * scale;

    // Active-set search over the ages where the borrowing constraint binds.
    // Given a candidate binding set, each maximal slack segment is solved
    // by shooting; the deepest asset violation adds a binding age, and a
    // junction where the Euler inequality fails (consumption stepping down
    // across the junction) removes one. Concavity makes the optimal set
    // unique; in practice this settles in a handful of rounds.
    std::set<int> binding;  // ages entered with exactly zero assets
    std::vector<double> discounted(n + 1, 0.0);
    auto solve_all_segments = [&]() {
        std::vector<int> starts{j_first};
        for (int j : binding) starts.push_back(j);
        starts.push_back(j_last + 1);
        for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
            int j0 = starts[k];
            int j1 = starts[k + 1] - 1;
            double a0 = (j0 == j_first) ? in.initial_assets : 0.0;
            detail::shoot_segment(pref, in, j0, a0, j1, scale, scratch);
            for (int j = j0; j <= j1; ++j) {
                out.consumption[j] = scratch.c[j];
                out.labor[j] = scratch.l[j];
                out.assets[j] = scratch.a[j];
                discounted[j] = scratch.ad[j];
            }
            out.assets[j1 + 1] = 0.0;
            discounted[j1 + 1] = 0.0;

            // Absorb the root-find residual into the segment-end budget so
            // the stored path meets the budget identically with zero
            // terminal assets, solving hours jointly with consumption.
            int je = j1;
            double weff = in.can_work[je] ? in.wage[je] * in.efficiency[je] : 0.0;
            double resources_ex_labor = (1.0 + in.rate[je]) * std::max(out.assets[je], 0.0) +
                                        in.pension[je] + in.transfer[je] - in.health_outlay[je];
            double l_end, c_end;
            labor_and_consumption(resources_ex_labor, weff, in.cons_tax[je], in.tax_scale[je],
                                  *in.tax_table, pref.leisure_weight, pref.frisch, l_end, c_end);
            if (c_end <= 0.0)
                throw InfeasibleError("infeasible budget: cohort entering " +
                                      std::to_string(in.entry_year) + " type " +
                                      type_label(in.type) + " at age " + std::to_string(20 + je));
            out.labor[je] = l_end;
            out.consumption[je] = c_end;
        }
    };

    int rounds = 0;
    int removals = 0;
    for (;;) {
        if (++rounds > 10 * n + 20)
            throw ConvergenceError("lifecycle: borrowing-constraint search failed to settle");
        solve_all_segments();
        // First drive out every negative asset position, deepest dip first.
        // Violations are measured in survival-discounted units, which is
        // where the optimum is actually determined.
        int add = -1;
        double worst_a = -feas_tol;
        for (int j = j_first + 1; j <= j_last; ++j)
            if (discounted[j] < worst_a && !binding.count(j)) {
                worst_a = discounted[j];
                add = j;
            }
        if (add >= 0) {
            binding.insert(add);
            continue;
        }
        // Then release junctions where the Euler inequality clearly fails
        // (consumption stepping down means the constraint cannot bind).
        // Marginally binding junctions sit at gap ~ 0 and stay.
        int remove = -1;
        double worst_gap = 1e-6;
        for (int j : binding) {
            double implied = out.consumption[j - 1] * pref.beta * (1.0 + in.rate[j]) *
                             (1.0 + in.cons_tax[j - 1]) / (1.0 + in.cons_tax[j]);
            double gap = (implied - out.consumption[j]) / implied;
            if (gap > worst_gap) {
                worst_gap = gap;
                remove = j;
            }
        }
        if (remove >= 0 && removals < n) {
            binding.erase(remove);
            ++removals;
            continue;
        }
        if (worst_gap > 1e-3)
            throw ConvergenceError("lifecycle: inconsistent borrowing-constraint pattern");
        break;
    }
    out.assets[j_first] = in.initial_assets;

    for (int j = j_last; j >= j_first; --j) {
        out.utility[j] = pref.utility(out.consumption[j], out.labor[j]);
        out.value[j] = out.utility[j] + pref.beta * in.survival[j] * out.value[j + 1];
    }
    return out;
}

struct HouseholdAggregates {
    std::vector<double> consumption;     // utility consumption C
    std::vector<double> effective_labor; // sum of n * l * e
    std::vector<double> assets;          // holdings at the start of each year
};

// Population-weighted aggregation across cohorts. The lookup maps
// (type, entry calendar year) to a solved cohort, or nullptr if that cohort
// never lived inside the grid; missing living cohorts are an error.
template <typename SolutionLookup>
HouseholdAggregates aggregate_households(const PopulationGrid& pop,
                                         const std::vector<std::vector<double>>& efficiency,
                                         SolutionLookup&& lookup) {
    HouseholdAggregates agg;
    agg.consumption.assign(pop.n_years, 0.0);
    agg.effective_labor.assign(pop.n_years, 0.0);
    agg.assets.assign(pop.n_years, 0.0);
    for (int t = 0; t < pop.n_years; ++t) {
        int year = pop.year0 + t;
        for (int type = 0; type < n_household_types; ++type) {
            for (int j = 0; j < pop.ages.n_ages; ++j) {
                double mass = pop(year, type, j);
                if (mass <= 0.0) continue;
                const HouseholdSolution* sol = lookup(type, year - j);
                if (!sol)
                    throw ValidationError("aggregate_households: missing solution for cohort entering " +
                                          std::to_string(year - j) + " type " + type_label(type));
                agg.consumption[t] += mass * sol->consumption[j];
                agg.effective_labor[t] += mass * sol->labor[j] * efficiency[type][j];
                agg.assets[t] += mass * sol->assets[j];
            }
        }
    }
    return agg;
}

}  // namespace olg
