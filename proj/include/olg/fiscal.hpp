// Tax rules, pension rules, health cost schedules and the government
// budget, including the consumption-tax closure.
//
// Income is measured in model units of 10 million yen. The progressive
// labor tax is piecewise linear: T(y) = alpha_i + rate_i * y on bracket i,
// with beta_i = T(lower_i) recording the cumulative tax at the bracket
// floor. The published table is internally consistent to ~5e-4, which is
// what the validation enforces.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "olg/common.hpp"
#include "olg/demographics.hpp"

namespace olg {

struct TaxBracket {
    double lower = 0.0;      // bracket floor (model income units)
    double rate = 0.0;       // marginal rate
    double intercept = 0.0;  // alpha
    double cumulative = 0.0; // beta = tax at the bracket floor
};

struct ProgressiveTaxTable {
    std::vector<TaxBracket> brackets;

    void validate(double consistency_tol = 5e-4) const {
        if (brackets.empty()) throw SchemaError("tax table: no brackets");
        if (brackets.front().lower != 0.0)
            throw ValidationError("tax table: first bracket must start at 0");
        for (std::size_t i = 0; i < brackets.size(); ++i) {
            const auto& b = brackets[i];
            if (i > 0 && !(b.lower > brackets[i - 1].lower))
                throw ValidationError("tax table: bracket floors must be strictly increasing");
            double implied = b.intercept + b.rate * b.lower;
            if (std::abs(implied - b.cumulative) > consistency_tol)
                throw ValidationError("tax table: row " + std::to_string(i + 1) +
                                      " inconsistent: alpha + rate*lower differs from beta by " +
                                      std::to_string(std::abs(implied - b.cumulative)));
        }
        // Non-decreasing tax in income: rates non-negative is sufficient
        // together with continuity at the floors checked above.
        for (const auto& b : brackets)
            if (b.rate < 0.0) throw ValidationError("tax table: negative marginal rate");
    }

    int bracket_index(double y) const {
        int lo = 0, hi = static_cast<int>(brackets.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi + 1) / 2;
            if (y >= brackets[mid].lower)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    double tax(double y) const {
        if (!(std::isfinite(y))) throw ValidationError("labor_tax: income must be finite");
        if (y < 0.0) throw ValidationError("labor_tax: income must be non-negative");
        if (y == 0.0) return 0.0;
        const auto& b = brackets[bracket_index(y)];
        return b.intercept + b.rate * y;
    }

    double marginal_rate(double y) const {
        if (y <= 0.0) return brackets.front().rate;
        return brackets[bracket_index(y)].rate;
    }

    // Trend-indexed evaluation: bracket floors scale with the productivity
    // trend so the detrended tax system is stationary.
    double tax_scaled(double y, double scale) const { return scale * tax(y / scale); }
    double marginal_rate_scaled(double y, double scale) const { return marginal_rate(y / scale); }
};

inline double labor_tax(double y, const ProgressiveTaxTable& table) { return table.tax(y); }

// The published Table-4 style schedule (income in units of 10 million yen).
inline ProgressiveTaxTable default_tax_table() {
    ProgressiveTaxTable t;
    auto add = [&](double lo, double rate, double alpha, double beta) {
        t.brackets.push_back({lo, rate, alpha, beta});
    };
    add(0.0, 0.027, 0.0, 0.0);
    add(0.1, 0.191, -0.0164, 0.0027);
    add(0.2, 0.272, -0.0326, 0.0218);
    add(0.3, 0.285, -0.0365, 0.049);
    add(0.4, 0.294, -0.0401, 0.0775);
    add(0.5, 0.302, -0.0441, 0.1069);
    add(0.6, 0.306, -0.0465, 0.1371);
    add(0.7, 0.315, -0.0528, 0.1677);
    add(0.8, 0.324, -0.0600, 0.1992);
    add(0.9, 0.328, -0.0636, 0.2316);
    add(1.0, 0.338, -0.0736, 0.2644);
    add(1.5, 0.358, -0.1036, 0.4334);
    add(2.0, 0.387, -0.1616, 0.6124);
    add(2.5, 0.447, -0.3116, 0.8059);
    return t;
}

struct PensionRule {
    int year0 = 2015;
    std::vector<double> kappa;       // replacement rate path
    std::vector<int> retire_age;     // model age J^R (1-based)

    double replacement(int year) const {
        if (kappa.empty()) throw SchemaError("pension rule: empty replacement path");
        int t = std::clamp(year - year0, 0, static_cast<int>(kappa.size()) - 1);
        return kappa[t];
    }
    int retirement_age(int year) const {
        if (retire_age.empty()) throw SchemaError("pension rule: empty retirement-age path");
        int t = std::clamp(year - year0, 0, static_cast<int>(retire_age.size()) - 1);
        return retire_age[t];
    }
    void validate() const {
        for (double k : kappa)
            if (!(k >= 0.0 && k <= 1.0)) throw ValidationError("pension rule: kappa outside [0,1]");
        for (int jr : retire_age)
            if (jr < 2) throw ValidationError("pension rule: retirement age must be >= 2");
    }
};

// Accumulated earnings recursion: W' = w*l*e + W while working, frozen
// afterwards.
inline double accumulate_earnings(double prior, double wage, double labor, double efficiency,
                                  int model_age, int retire_age) {
    if (wage < 0 || labor < 0 || efficiency < 0 || prior < 0)
        throw ValidationError("accumulate_earnings: negative input");
    if (model_age < retire_age) return prior + wage * labor * efficiency;
    return prior;
}

inline double pension_benefit(double accumulated, double kappa, int retire_age) {
    if (accumulated < 0) throw ValidationError("pension_benefit: negative accumulated earnings");
    if (retire_age < 2) throw ValidationError("pension_benefit: retirement age must be >= 2");
    return kappa * accumulated / (retire_age - 1);
}

struct HealthCostSchedule {
    AgeGrid ages;
    int year0 = 2015;
    int n_years = 1;
    // Expected per-capita costs, model output units: [year][gender][age].
    std::vector<double> medical;
    std::vector<double> ltc;
    // Copayment paths [year][age], shared across genders.
    std::vector<double> copay_medical;
    std::vector<double> copay_ltc;

    std::size_t cost_idx(int t, int g, int j) const {
        return (static_cast<std::size_t>(t) * n_genders + g) * ages.n_ages + j;
    }
    std::size_t copay_idx(int t, int j) const {
        return static_cast<std::size_t>(t) * ages.n_ages + j;
    }
    int clamp_t(int year) const { return std::clamp(year - year0, 0, n_years - 1); }

    double medical_cost(int year, Gender g, int j) const {
        return medical[cost_idx(clamp_t(year), static_cast<int>(g), j)];
    }
    double ltc_cost(int year, Gender g, int j) const {
        return ltc[cost_idx(clamp_t(year), static_cast<int>(g), j)];
    }
    double medical_copay(int year, int j) const { return copay_medical[copay_idx(clamp_t(year), j)]; }
    double ltc_copay(int year, int j) const { return copay_ltc[copay_idx(clamp_t(year), j)]; }

    // Out-of-pocket outlay of a living household.
    double household_outlay(int year, Gender g, int j) const {
        return medical_copay(year, j) * medical_cost(year, g, j) +
               ltc_copay(year, j) * ltc_cost(year, g, j);
    }
    // Government share per head.
    double government_share(int year, Gender g, int j) const {
        return (1.0 - medical_copay(year, j)) * medical_cost(year, g, j) +
               (1.0 - ltc_copay(year, j)) * ltc_cost(year, g, j);
    }

    void validate() const {
        for (double v : medical)
            if (!(v >= 0.0)) throw ValidationError("health costs: negative medical cost");
        for (double v : ltc)
            if (!(v >= 0.0)) throw ValidationError("health costs: negative LTC cost");
        for (double v : copay_medical)
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("health costs: medical copay outside [0,1]");
        for (double v : copay_ltc)
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("health costs: LTC copay outside [0,1]");
    }
};

struct DebtRule {
    double debt_to_gdp = 1.5;   // psi_B
    double gov_cons_share = 0.19;  // psi_G, share of GDP
    double bond_rate = 0.01;    // i^d

    void validate() const {
        if (!(debt_to_gdp > 0.0)) throw ValidationError("debt rule: debt/GDP target must be positive");
        if (!(gov_cons_share > 0.0 && gov_cons_share < 1.0))
            throw ValidationError("debt rule: government consumption share outside (0,1)");
    }
};

// Aggregate pension outlays by gender for one year. benefits(type, age)
// gives the per-head benefit; masses come from the population slice.
template <typename BenefitFn>
std::array<double, n_genders> aggregate_pension(const PopulationGrid& pop, int year,
                                                BenefitFn&& benefit, int retire_age) {
    std::array<double, n_genders> out{0.0, 0.0};
    for (int type = 0; type < n_household_types; ++type)
        for (int j = retire_age - 1; j < pop.ages.n_ages; ++j)
            out[static_cast<int>(type_gender(type))] += pop(year, type, j) * benefit(type, j);
    return out;
}

// Government health contributions by gender for one year (the insurer side
// of medical and LTC costs).
inline std::array<double, n_genders> aggregate_health(const PopulationGrid& pop, int year,
                                                      const HealthCostSchedule& costs) {
    std::array<double, n_genders> out{0.0, 0.0};
    for (int type = 0; type < n_household_types; ++type) {
        Gender g = type_gender(type);
        for (int j = 0; j < pop.ages.n_ages; ++j)
            out[static_cast<int>(g)] += pop(year, type, j) * costs.government_share(year, g, j);
    }
    return out;
}

struct GovernmentFlows {
    double gov_consumption = 0.0;   // G (non-health purchases)
    double pension = 0.0;           // P
    double health = 0.0;            // M, government share
    double labor_tax_revenue = 0.0;
    double cons_tax_revenue = 0.0;  // tau_c * C
    double corp_tax_revenue = 0.0;  // tau_pi * Pi_1
    double div_tax_revenue1 = 0.0;  // tau_d1 * D1
    double div_tax_revenue2 = 0.0;  // tau_d2 * D2
};

// One-period debt accumulation.
inline double government_debt_step(double debt, double bond_rate, const GovernmentFlows& f) {
    return debt + bond_rate * debt + f.gov_consumption + f.pension + f.health -
           f.labor_tax_revenue - f.cons_tax_revenue - f.corp_tax_revenue - f.div_tax_revenue1 -
           f.div_tax_revenue2;
}

struct ClosureResult {
    double tau_c = 0.0;
    bool negative = false;  // infeasible scenarios surface here, never clamped
};

// Consumption tax that moves debt from B to exactly next_debt given all
// other flows. Flows enter with cons_tax_revenue ignored.
inline ClosureResult consumption_tax_closure(double debt, double next_debt, double bond_rate,
                                             const GovernmentFlows& f, double consumption) {
    if (!(consumption > 0.0))
        throw ValidationError("consumption_tax_closure: aggregate consumption must be positive");
    GovernmentFlows g = f;
    g.cons_tax_revenue = 0.0;
    double gap = government_debt_step(debt, bond_rate, g) - next_debt;
    ClosureResult r;
    r.tau_c = gap / consumption;
    r.negative = r.tau_c < 0.0;
    return r;
}

}  // namespace olg
