#include <doctest.h>

#include <random>

#include "olg/household.hpp"

using namespace olg;

namespace {

ProgressiveTaxTable table = default_tax_table();

// A generic working-life problem used by several property tests.
CohortInputs generic_inputs(int n_ages, int retire_age, double wage, double rate, double tauc,
                            double survival) {
    CohortInputs in;
    in.n_ages = n_ages;
    in.first_age = 0;
    in.initial_assets = 0.0;
    in.tax_table = &table;
    in.wage.assign(n_ages, wage);
    in.rate.assign(n_ages, rate);
    in.cons_tax.assign(n_ages, tauc);
    in.tax_scale.assign(n_ages, 1.0);
    in.efficiency.assign(n_ages, 0.0);
    in.pension.assign(n_ages, 0.0);
    in.health_outlay.assign(n_ages, 0.0);
    in.transfer.assign(n_ages, 0.0);
    in.survival.assign(n_ages, survival);
    in.survival[n_ages - 1] = 0.0;
    in.can_work.assign(n_ages, 0);
    for (int j = 0; j + 1 < retire_age && j < n_ages; ++j) {
        in.can_work[j] = 1;
        in.efficiency[j] = 3.0 + 0.1 * j;
    }
    for (int j = retire_age - 1; j < n_ages; ++j) in.pension[j] = 0.05;
    return in;
}

struct Residuals {
    double budget = 0, euler = 0, labor = 0;
};

Residuals residuals_of(const HouseholdPrefs& pref, const CohortInputs& in,
                       const HouseholdSolution& sol) {
    Residuals r;
    double scale = 1e-9;
    for (int j = in.first_age; j < in.n_ages; ++j)
        scale = std::max(scale, std::abs(in.wage[j] * in.efficiency[j]) + in.pension[j]);
    for (int j = in.first_age; j < in.n_ages; ++j) {
        double weff = in.can_work[j] ? in.wage[j] * in.efficiency[j] : 0.0;
        double y = weff * sol.labor[j];
        double tax = in.tax_table->tax_scaled(y, in.tax_scale[j]);
        double lhs = (1 + in.cons_tax[j]) * sol.consumption[j] + in.health_outlay[j] +
                     in.survival[j] * sol.assets[j + 1];
        double rhs = (1 + in.rate[j]) * sol.assets[j] + y - tax + in.pension[j] + in.transfer[j];
        r.budget = std::max(r.budget, std::abs(lhs - rhs) / std::max(std::abs(rhs), scale));
        if (j + 1 < in.n_ages && sol.assets[j + 1] > 1e-9 * scale) {
            double muc_now = 1.0 / sol.consumption[j] / (1 + in.cons_tax[j]);
            double muc_next = 1.0 / sol.consumption[j + 1] / (1 + in.cons_tax[j + 1]);
            double gap = muc_now - pref.beta * (1 + in.rate[j + 1]) * muc_next;
            r.euler = std::max(r.euler, std::abs(gap) / muc_now);
        }
        if (weff > 0 && sol.labor[j] > 1e-12 && sol.labor[j] < 1.0 - 1e-12) {
            double lhs_foc = pref.marginal_leisure(sol.labor[j]);
            double yy = y / in.tax_scale[j];
            // At a bracket kink the FOC interval brackets zero instead.
            bool kink = false;
            for (const auto& b : in.tax_table->brackets)
                if (std::abs(yy - b.lower) < 1e-9) kink = true;
            if (kink) continue;
            double rhs_foc = weff * (1 - in.tax_table->marginal_rate(yy)) /
                             ((1 + in.cons_tax[j]) * sol.consumption[j]);
            r.labor = std::max(r.labor, std::abs(lhs_foc - rhs_foc) / lhs_foc);
        }
    }
    return r;
}

}  // namespace

TEST_CASE("portfolio return") {
    CHECK(portfolio_return(1.0, 0.01, 0.05) == doctest::Approx(0.01));
    CHECK(portfolio_return(0.0, 0.01, 0.05) == doctest::Approx(0.05));
    CHECK(portfolio_return(0.5, 0.01, 0.03) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK_THROWS_AS(portfolio_return(1.5, 0.01, 0.05), ValidationError);
}

TEST_CASE("labor choice satisfies the first-order condition in closed form") {
    double gamma = 10.0, zeta = 0.03, tauc = 0.1, scale = 1.0;
    SUBCASE("corner at zero when consumption is high") {
        CHECK(labor_choice(10.0, 1.0, tauc, scale, table, gamma, zeta) == doctest::Approx(0.0));
    }
    SUBCASE("interior solution restores the FOC") {
        double c = 0.085, weff = 1.0;
        double l = labor_choice(c, weff, tauc, scale, table, gamma, zeta);
        REQUIRE(l > 0.0);
        REQUIRE(l < 1.0);
        double y = weff * l;
        double lhs = gamma * std::pow(1 - l, -zeta);
        double rhs = weff * (1 - table.marginal_rate(y)) / ((1 + tauc) * c);
        bool kink = false;
        for (const auto& b : table.brackets)
            if (std::abs(y - b.lower) < 1e-9) kink = true;
        if (!kink) CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
    SUBCASE("kink solutions bracket the condition") {
        // Sweep consumption; wherever hours place income exactly on a
        // bracket floor, the FOC interval must bracket zero.
        for (double c = 0.018; c < 0.04; c += 0.00013) {
            double weff = 0.3;
            double l = labor_choice(c, weff, tauc, scale, table, gamma, zeta);
            if (l <= 0.0) continue;
            double y = weff * l;
            for (std::size_t i = 1; i < table.brackets.size(); ++i) {
                if (std::abs(y - table.brackets[i].lower) < 1e-12) {
                    double lhs = gamma * std::pow(1 - l, -zeta);
                    double lo = weff * (1 - table.brackets[i].rate) / ((1 + tauc) * c);
                    double hi = weff * (1 - table.brackets[i - 1].rate) / ((1 + tauc) * c);
                    CHECK(lhs >= lo - 1e-9);
                    CHECK(lhs <= hi + 1e-9);
                }
            }
        }
    }
    SUBCASE("monotone in consumption") {
        double prev = 1.0;
        for (double c = 0.004; c < 0.1; c += 0.0005) {
            double l = labor_choice(c, 0.35, tauc, scale, table, gamma, zeta);
            CHECK(l <= prev + 1e-12);
            prev = l;
        }
    }
}

TEST_CASE("lifecycle: retirement ages supply no labor") {
    HouseholdPrefs pref{0.983, 10.0, 0.03};
    CohortInputs in = generic_inputs(20, 12, 1.0, 0.03, 0.1, 0.97);
    auto sol = solve_lifecycle(pref, in);
    for (int j = 11; j < 20; ++j) CHECK(sol.labor[j] == doctest::Approx(0.0));
    CHECK(sol.assets[20] == doctest::Approx(0.0));
}

TEST_CASE("lifecycle: budget, Euler and labor FOC residuals") {
    HouseholdPrefs pref{0.983, 10.0, 0.03};
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 12; ++rep) {
        int n = 15 + static_cast<int>(u(rng) * 30);
        int jr = 8 + static_cast<int>(u(rng) * (n - 9));
        CohortInputs in = generic_inputs(n, jr, 0.7 + u(rng), 0.01 + 0.05 * u(rng),
                                         0.05 + 0.3 * u(rng), 0.93 + 0.06 * u(rng));
        for (int j = 0; j < n; ++j) {
            in.health_outlay[j] = 0.002 * j * u(rng);
            in.transfer[j] = 0.003 * u(rng);
        }
        auto sol = solve_lifecycle(pref, in);
        auto r = residuals_of(pref, in, sol);
        CHECK(r.budget <= 1e-8);
        CHECK(r.euler <= 1e-6);
        CHECK(r.labor <= 1e-6);
        CHECK(sol.assets[n] == doctest::Approx(0.0));
        for (int j = 0; j <= n; ++j) CHECK(sol.assets[j] >= -1e-12);
    }
}

TEST_CASE("lifecycle: pension annuity matches the closed-form log-utility rule") {
    HouseholdPrefs pref{0.96, 10.0, 0.05};
    int n = 8;
    double rate = 0.06, tauc = 0.08, p = 0.1;
    CohortInputs in = generic_inputs(n, 2, 1.0, rate, tauc, 0.9);
    in.efficiency.assign(n, 0.0);  // no labor income at any age
    in.can_work.assign(n, 0);
    in.pension.assign(n, p);
    auto sol = solve_lifecycle(pref, in);
    // Closed form: c_j = c_0 (beta(1+r))^j with annuity-discounted budget.
    double qsum = 0.0, bsum = 0.0, q = 1.0, alive = 1.0;
    for (int j = 0; j < n; ++j) {
        qsum += q;
        bsum += std::pow(pref.beta, j) * alive;
        alive *= in.survival[j];
        q *= in.survival[j] / (1 + rate);
    }
    double c0 = p * qsum / ((1 + tauc) * bsum);
    for (int j = 0; j < n; ++j) {
        double expect = c0 * std::pow(pref.beta * (1 + rate), j);
        CHECK(sol.consumption[j] == doctest::Approx(expect).epsilon(1e-8));
    }
    CHECK(sol.assets[n] == doctest::Approx(0.0));
}

TEST_CASE("lifecycle: three-period problem matches a brute-force grid oracle") {
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 2; ++rep) {
        double w1 = 0.25 + 0.3 * u(rng), w2 = 0.25 + 0.3 * u(rng);
        double rate = 0.05 * u(rng), tauc = 0.25 * u(rng);
        double s1 = 0.85 + 0.14 * u(rng), s2 = 0.85 + 0.14 * u(rng);
        double pen = 0.05 + 0.1 * u(rng);
        double e1 = 0.5 + u(rng), e2 = 0.5 + u(rng);
        HouseholdPrefs pref{0.95 + 0.04 * u(rng), 10.0, 0.03 + 0.02 * u(rng)};

        CohortInputs in;
        in.n_ages = 3;
        in.first_age = 0;
        in.initial_assets = 0.0;
        in.tax_table = &table;
        in.wage = {w1, w2, 0.0};
        in.rate = {rate, rate, rate};
        in.cons_tax = {tauc, tauc, tauc};
        in.tax_scale = {1.0, 1.0, 1.0};
        in.efficiency = {e1, e2, 0.0};
        in.pension = {0.0, 0.0, pen};
        in.health_outlay = {0.0, 0.01, 0.02};
        in.transfer = {0.12, 0.12, 0.12};
        in.survival = {s1, s2, 0.0};
        in.can_work = {1, 1, 0};
        auto sol = solve_lifecycle(pref, in);

        // Independent grid search over (a2, a3, l1, l2), step 1e-3.
        const double step = 1e-3;
        const double amax = 1.0;
        const int na = static_cast<int>(amax / step);
        const int nl = static_cast<int>(1.0 / step);
        auto util3 = [&](double a3) {
            double c3 = ((1 + rate) * a3 + pen + 0.12 - 0.02) / (1 + tauc);
            if (c3 <= 0) return -1e30;
            return std::log(c3) + pref.leisure_weight / (1 - pref.frisch);
        };
        double best = -1e30;
        for (int ia2 = 0; ia2 <= na; ++ia2) {
            double a2 = ia2 * step;
            double best1 = -1e30;
            for (int il = 0; il < nl; ++il) {
                double l1 = il * step;
                double y = w1 * e1 * l1;
                double c1 = (y - table.tax(y) + 0.12 - s1 * a2) / (1 + tauc);
                if (c1 <= 0) continue;
                double v = std::log(c1) + pref.leisure_weight *
                                              std::pow(1 - l1, 1 - pref.frisch) / (1 - pref.frisch);
                best1 = std::max(best1, v);
            }
            if (best1 <= -1e29) continue;
            for (int ia3 = 0; ia3 <= na; ++ia3) {
                double a3 = ia3 * step;
                double best2 = -1e30;
                for (int il = 0; il < nl; ++il) {
                    double l2 = il * step;
                    double y = w2 * e2 * l2;
                    double c2 =
                        ((1 + rate) * a2 + y - table.tax(y) + 0.12 - 0.01 - s2 * a3) / (1 + tauc);
                    if (c2 <= 0) continue;
                    double v = std::log(c2) +
                               pref.leisure_weight * std::pow(1 - l2, 1 - pref.frisch) /
                                   (1 - pref.frisch);
                    best2 = std::max(best2, v);
                }
                if (best2 <= -1e29) continue;
                double total = best1 + pref.beta * s1 * (best2 + pref.beta * s2 * util3(a3));
                best = std::max(best, total);
            }
        }
        CHECK(std::abs(sol.value[0] - best) <= 1e-4);
    }
}

TEST_CASE("lifecycle: value is monotone in the wage path") {
    HouseholdPrefs pref{0.983, 10.0, 0.05};
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 6; ++rep) {
        CohortInputs in = generic_inputs(25, 18, 0.8 + 0.4 * u(rng), 0.02 + 0.04 * u(rng),
                                         0.1 + 0.2 * u(rng), 0.95);
        auto lo = solve_lifecycle(pref, in);
        for (double& wj : in.wage) wj *= 1.1;
        auto hi = solve_lifecycle(pref, in);
        CHECK(hi.value[0] >= lo.value[0] - 1e-9);
    }
}

TEST_CASE("lifecycle: infeasible mandatory outlays are reported") {
    HouseholdPrefs pref{0.983, 10.0, 0.03};
    CohortInputs in = generic_inputs(6, 4, 1.0, 0.02, 0.1, 0.95);
    in.efficiency.assign(6, 0.0);
    in.can_work.assign(6, 0);
    in.pension.assign(6, 0.01);
    in.health_outlay.assign(6, 0.5);  // unpayable at zero consumption
    in.entry_year = 1987;
    in.type = 1;
    CHECK_THROWS_AS(solve_lifecycle(pref, in), InfeasibleError);
    try {
        solve_lifecycle(pref, in);
    } catch (const InfeasibleError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1987") != std::string::npos);
        CHECK(msg.find("male-contingent") != std::string::npos);
    }
}

TEST_CASE("aggregation: linearity and cohort equivalence") {
    HouseholdPrefs pref{0.983, 10.0, 0.03};
    AgeGrid ages{20, 4};
    CohortInputs in = generic_inputs(4, 3, 1.0, 0.03, 0.1, 0.95);
    auto sol = solve_lifecycle(pref, in);
    std::vector<std::vector<double>> eff(n_household_types, in.efficiency);

    PopulationGrid pop = PopulationGrid::zeros(ages, 2015, 1);
    pop.at(2015, Gender::male, EmpType::regular, 1) = 1.0;
    auto lookup = [&](int, int) { return &sol; };
    auto agg = aggregate_households(pop, eff, lookup);
    CHECK(agg.consumption[0] == doctest::Approx(sol.consumption[1]));
    CHECK(agg.effective_labor[0] == doctest::Approx(sol.labor[1] * in.efficiency[1]));
    CHECK(agg.assets[0] == doctest::Approx(sol.assets[1]));

    // Doubling every mass doubles the aggregates.
    for (double& v : pop.data) v *= 2.0;
    auto agg2 = aggregate_households(pop, eff, lookup);
    CHECK(agg2.consumption[0] == doctest::Approx(2 * agg.consumption[0]));
    CHECK(agg2.effective_labor[0] == doctest::Approx(2 * agg.effective_labor[0]));
    CHECK(agg2.assets[0] == doctest::Approx(2 * agg.assets[0]));

    // Two half-mass cohorts of the same type equal one full-mass cohort.
    PopulationGrid popA = PopulationGrid::zeros(ages, 2015, 1);
    popA.at(2015, Gender::male, EmpType::regular, 2) = 2.0;
    PopulationGrid popB = PopulationGrid::zeros(ages, 2015, 1);
    popB.at(2015, Gender::male, EmpType::regular, 2) = 1.0;
    popB.at(2015, Gender::female, EmpType::regular, 2) = 1.0;
    auto aggA = aggregate_households(popA, eff, lookup);
    auto aggB = aggregate_households(popB, eff, lookup);
    CHECK(aggA.consumption[0] == doctest::Approx(aggB.consumption[0]));
    CHECK(aggA.assets[0] == doctest::Approx(aggB.assets[0]));

    // A missing living cohort is a coverage error.
    auto missing = [&](int, int entry) { return entry == 2013 ? nullptr : &sol; };
    CHECK_THROWS_AS(aggregate_households(popA, eff, missing), ValidationError);
}
