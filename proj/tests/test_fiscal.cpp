#include <doctest.h>

#include <random>

#include "olg/fiscal.hpp"

using namespace olg;

TEST_CASE("published tax table is internally consistent") {
    ProgressiveTaxTable t = default_tax_table();
    CHECK(t.brackets.size() == 14);
    CHECK_NOTHROW(t.validate(5e-4));
    for (const auto& b : t.brackets)
        CHECK(std::abs(b.intercept + b.rate * b.lower - b.cumulative) <= 5e-4);
}

TEST_CASE("labor tax: published row examples") {
    ProgressiveTaxTable t = default_tax_table();
    CHECK(labor_tax(0.05, t) == doctest::Approx(0.00135).epsilon(1e-12));
    CHECK(labor_tax(0.15, t) == doctest::Approx(0.012250).epsilon(1e-12));
    CHECK(labor_tax(0.0, t) == doctest::Approx(0.0));
}

TEST_CASE("labor tax: continuity at every bracket boundary") {
    ProgressiveTaxTable t = default_tax_table();
    for (std::size_t i = 1; i < t.brackets.size(); ++i) {
        double edge = t.brackets[i].lower;
        double below = t.brackets[i - 1].intercept + t.brackets[i - 1].rate * edge;
        double above = t.brackets[i].intercept + t.brackets[i].rate * edge;
        CHECK(std::abs(below - above) <= 5e-4);
    }
    // The boundary at 0.1 evaluates to 0.0027 from both adjoining rows.
    double from_below = t.brackets[0].intercept + t.brackets[0].rate * 0.1;
    double from_above = t.brackets[1].intercept + t.brackets[1].rate * 0.1;
    CHECK(from_below == doctest::Approx(0.0027).epsilon(1e-9));
    CHECK(from_above == doctest::Approx(0.0027).epsilon(1e-9));
}

TEST_CASE("average tax rate is non-decreasing (progressivity)") {
    ProgressiveTaxTable t = default_tax_table();
    double prev = 0.0;
    for (double y = 0.01; y < 4.0; y += 0.003) {
        double avg = labor_tax(y, t) / y;
        CHECK(avg >= prev - 1e-12);
        prev = avg;
    }
}

TEST_CASE("labor tax input validation") {
    ProgressiveTaxTable t = default_tax_table();
    CHECK_THROWS_AS(labor_tax(std::nan(""), t), ValidationError);
    CHECK_THROWS_AS(labor_tax(-0.1, t), ValidationError);
}

TEST_CASE("trend-indexed tax scales brackets") {
    ProgressiveTaxTable t = default_tax_table();
    double z = 1.7;
    CHECK(t.tax_scaled(0.15 * z, z) == doctest::Approx(0.012250 * z).epsilon(1e-12));
    CHECK(t.marginal_rate_scaled(0.15 * z, z) == doctest::Approx(0.191));
}

TEST_CASE("accumulated earnings recursion") {
    CHECK(accumulate_earnings(0.3, 1.0, 0.1, 1.0, 46, 46) == doctest::Approx(0.3));
    CHECK(accumulate_earnings(0.3, 1.0, 0.1, 1.0, 45, 46) == doctest::Approx(0.4));
    double w = 0.0;
    for (int j = 1; j < 46; ++j) w = accumulate_earnings(w, 1.0, 0.25, 1.0, j, 46);
    CHECK(w == doctest::Approx(45 * 0.25).epsilon(1e-14));
}

TEST_CASE("pension benefit") {
    CHECK(pension_benefit(4.5, 0.0, 46) == doctest::Approx(0.0));
    CHECK(pension_benefit(4.5, 0.62, 46) == doctest::Approx(0.062).epsilon(1e-14));
    CHECK_THROWS_AS(pension_benefit(1.0, 0.5, 1), ValidationError);
    // Constant earnings y over the working life give a benefit of kappa*y.
    double y = 0.37, w = 0.0;
    for (int j = 1; j < 46; ++j) w = accumulate_earnings(w, y, 1.0, 1.0, j, 46);
    CHECK(pension_benefit(w, 0.62, 46) == doctest::Approx(0.62 * y).epsilon(1e-14));
}

TEST_CASE("aggregate pension over the retired cohorts") {
    AgeGrid ages{20, 101};
    PopulationGrid pop = PopulationGrid::zeros(ages, 2015, 1);
    SUBCASE("no retirees") {
        auto p = aggregate_pension(pop, 2015, [](int, int) { return 0.1; }, 46);
        CHECK(p[0] == doctest::Approx(0.0));
        CHECK(p[1] == doctest::Approx(0.0));
    }
    SUBCASE("single retiree cohort") {
        pop.at(2015, Gender::male, EmpType::regular, 50) = 2.0;
        auto p = aggregate_pension(pop, 2015, [](int, int) { return 0.1; }, 46);
        CHECK(p[0] == doctest::Approx(0.2));
        CHECK(p[1] == doctest::Approx(0.0));
    }
    SUBCASE("uniform benefits factorize") {
        for (int j = 45; j < 101; ++j) pop.at(2015, Gender::female, EmpType::contingent, j) = 1.5;
        auto p = aggregate_pension(pop, 2015, [](int, int) { return 0.07; }, 46);
        double retired_mass = 1.5 * (101 - 45);
        CHECK(p[1] == doctest::Approx(0.07 * retired_mass).epsilon(1e-12));
    }
}

TEST_CASE("aggregate health: copayment limits") {
    AgeGrid ages{20, 3};
    HealthCostSchedule hc;
    hc.ages = ages;
    hc.year0 = 2015;
    hc.n_years = 1;
    hc.medical.assign(n_genders * ages.n_ages, 1.0);
    hc.ltc.assign(n_genders * ages.n_ages, 0.0);
    hc.copay_medical.assign(ages.n_ages, 1.0);
    hc.copay_ltc.assign(ages.n_ages, 1.0);
    PopulationGrid pop = PopulationGrid::zeros(ages, 2015, 1);
    pop.at(2015, Gender::male, EmpType::regular, 0) = 1.0;
    SUBCASE("full copayment leaves nothing to the government") {
        auto m = aggregate_health(pop, 2015, hc);
        CHECK(m[0] == doctest::Approx(0.0));
    }
    SUBCASE("zero copayment shifts the full cost to the government") {
        hc.copay_medical.assign(ages.n_ages, 0.0);
        hc.copay_ltc.assign(ages.n_ages, 0.0);
        auto m = aggregate_health(pop, 2015, hc);
        CHECK(m[0] == doctest::Approx(1.0));
    }
    SUBCASE("partial copayment") {
        hc.copay_medical.assign(ages.n_ages, 0.7);
        auto m = aggregate_health(pop, 2015, hc);
        CHECK(m[0] == doctest::Approx(0.3));
    }
}

TEST_CASE("government debt step") {
    GovernmentFlows f;
    CHECK(government_debt_step(1.0, 0.01, f) == doctest::Approx(1.01).epsilon(1e-15));
    f.gov_consumption = 0.05;
    f.labor_tax_revenue = 0.05 + 0.01;  // offsets spending plus interest
    CHECK(government_debt_step(1.0, 0.01, f) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("government debt step matches an independent term-by-term sum") {
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> u(0.0, 0.3);
    for (int rep = 0; rep < 50; ++rep) {
        GovernmentFlows f;
        f.gov_consumption = u(rng);
        f.pension = u(rng);
        f.health = u(rng);
        f.labor_tax_revenue = u(rng);
        f.cons_tax_revenue = u(rng);
        f.corp_tax_revenue = u(rng);
        f.div_tax_revenue1 = u(rng);
        f.div_tax_revenue2 = u(rng);
        double b = u(rng) * 5.0;
        double i_d = u(rng) * 0.1;
        // Independent oracle: sum the outlays and receipts one by one.
        double oracle = b;
        oracle += i_d * b;
        for (double outlay : {f.gov_consumption, f.pension, f.health}) oracle += outlay;
        for (double rev : {f.labor_tax_revenue, f.cons_tax_revenue, f.corp_tax_revenue,
                           f.div_tax_revenue1, f.div_tax_revenue2})
            oracle -= rev;
        CHECK(government_debt_step(b, i_d, f) == doctest::Approx(oracle).epsilon(1e-14));
    }
}

TEST_CASE("consumption tax closure") {
    SUBCASE("already balanced budget needs no consumption tax") {
        GovernmentFlows f;
        f.gov_consumption = 0.1;
        f.labor_tax_revenue = 0.1 + 0.01;
        auto r = consumption_tax_closure(1.0, 1.0, 0.01, f, 0.5);
        CHECK(r.tau_c == doctest::Approx(0.0).epsilon(1e-14));
        CHECK_FALSE(r.negative);
    }
    SUBCASE("a 0.05 gap with consumption 0.5 needs a 10 percent rate") {
        GovernmentFlows f;
        f.gov_consumption = 0.05;  // debt target already absorbs the interest
        auto r = consumption_tax_closure(1.0, 1.01, 0.01, f, 0.5);
        CHECK(r.tau_c == doctest::Approx(0.05 / 0.5).epsilon(1e-12));
    }
    SUBCASE("closure reproduces the target debt exactly") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(0.0, 0.4);
        for (int rep = 0; rep < 40; ++rep) {
            GovernmentFlows f;
            f.gov_consumption = u(rng);
            f.pension = u(rng);
            f.health = u(rng);
            f.labor_tax_revenue = u(rng);
            f.corp_tax_revenue = u(rng);
            f.div_tax_revenue1 = u(rng);
            f.div_tax_revenue2 = u(rng);
            double b = 1.0 + u(rng), target = 1.0 + u(rng), c = 0.3 + u(rng);
            auto r = consumption_tax_closure(b, target, 0.01, f, c);
            f.cons_tax_revenue = r.tau_c * c;
            double reached = government_debt_step(b, 0.01, f);
            CHECK(std::abs(reached - target) <= 1e-10 * std::max(1.0, std::abs(target)));
        }
    }
    SUBCASE("negative implied rate is flagged, not clamped") {
        GovernmentFlows f;
        f.labor_tax_revenue = 10.0;
        auto r = consumption_tax_closure(1.0, 1.01, 0.01, f, 0.5);
        CHECK(r.tau_c < 0.0);
        CHECK(r.negative);
    }
    SUBCASE("zero consumption is an error") {
        GovernmentFlows f;
        CHECK_THROWS_AS(consumption_tax_closure(1.0, 1.0, 0.01, f, 0.0), ValidationError);
    }
}
