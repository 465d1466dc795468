#include <doctest.h>

#include "olg/policy.hpp"

using namespace olg;

namespace {
const AgeGrid ages{20, 101};
const int year0 = 2015;
const int ny = 120;
}  // namespace

TEST_CASE("baseline-none equals the status quo") {
    Scenario s = build_scenario("baseline", "none", year0, ny, ages);
    for (int year = year0; year < year0 + ny; year += 7) {
        CHECK(s.replacement(year) == doctest::Approx(0.62));
        CHECK(s.retirement_age(year) == 46);
        CHECK(s.medical_copay(year, ages.index_of_calendar(40)) == doctest::Approx(0.30));
        CHECK(s.medical_copay(year, ages.index_of_calendar(72)) == doctest::Approx(0.20));
        CHECK(s.medical_copay(year, ages.index_of_calendar(80)) == doctest::Approx(0.10));
        CHECK(s.ltc_copay(year, ages.index_of_calendar(90)) == doctest::Approx(0.10));
    }
}

TEST_CASE("replacement-rate reform glides linearly to 50.8 percent in 2047") {
    Scenario s = build_scenario("baseline", "rr50", year0, ny, ages);
    CHECK(s.replacement(2015) == doctest::Approx(0.62));
    CHECK(s.replacement(2047) == doctest::Approx(0.508));
    CHECK(s.replacement(2100) == doctest::Approx(0.508));
    double mid = s.replacement(2031);
    CHECK(mid == doctest::Approx(0.62 + (2031 - 2015) / 32.0 * (0.508 - 0.62)).epsilon(1e-12));
    // Monotone decline between the endpoints.
    for (int year = 2016; year <= 2047; ++year)
        CHECK(s.replacement(year) < s.replacement(year - 1) + 1e-15);
}

TEST_CASE("retirement extension jumps from 65 to 70 in 2030, medical reform flattens copays") {
    Scenario s = build_scenario("retire_ext", "med30", year0, ny, ages);
    CHECK(s.retirement_age(2029) == 46);
    CHECK(s.retirement_age(2030) == 51);
    CHECK(s.retirement_age(2100) == 51);
    for (int j = 0; j < ages.n_ages; ++j) {
        CHECK(s.medical_copay(2035, j) == doctest::Approx(0.30));
        CHECK(s.ltc_copay(2035, j) == doctest::Approx(0.10));
    }
    CHECK(s.medical_copay(2029, ages.index_of_calendar(80)) == doctest::Approx(0.10));
}

TEST_CASE("LTC reform raises the LTC copay to 30 percent from 2030") {
    Scenario s = build_scenario("baseline", "ltc30", year0, ny, ages);
    CHECK(s.ltc_copay(2029, ages.index_of_calendar(85)) == doctest::Approx(0.10));
    CHECK(s.ltc_copay(2030, ages.index_of_calendar(85)) == doctest::Approx(0.30));
    CHECK(s.medical_copay(2030, ages.index_of_calendar(85)) == doctest::Approx(0.10));
}

TEST_CASE("pre-reform equality with the baseline") {
    Scenario base = build_scenario("baseline", "none", year0, ny, ages);
    for (const char* scen : {"baseline", "retire_ext"}) {
        for (const char* reform : {"none", "rr50", "med30", "ltc30"}) {
            Scenario s = build_scenario(scen, reform, year0, ny, ages);
            for (int year = year0; year < s.reform_year; ++year) {
                if (std::string(reform) != "rr50")
                    CHECK(s.replacement(year) == doctest::Approx(base.replacement(year)));
                for (int j = 0; j < ages.n_ages; j += 13) {
                    CHECK(s.medical_copay(year, j) == doctest::Approx(base.medical_copay(year, j)));
                    CHECK(s.ltc_copay(year, j) == doctest::Approx(base.ltc_copay(year, j)));
                }
                CHECK(s.retirement_age(year) == base.retirement_age(year));
            }
        }
    }
}

TEST_CASE("schedule boundedness across all shipped scenarios") {
    for (const char* scen : {"baseline", "retire_ext"}) {
        for (const char* reform : {"none", "rr50", "med30", "ltc30"}) {
            Scenario s = build_scenario(scen, reform, year0, ny, ages);
            for (int t = 0; t < ny; ++t) {
                CHECK(s.kappa[t] >= 0.508 - 1e-12);
                CHECK(s.kappa[t] <= 0.62 + 1e-12);
                for (int j = 0; j < ages.n_ages; ++j) {
                    CHECK(s.copay_medical[static_cast<std::size_t>(t) * ages.n_ages + j] >= 0.10 - 1e-12);
                    CHECK(s.copay_medical[static_cast<std::size_t>(t) * ages.n_ages + j] <= 0.30 + 1e-12);
                    CHECK(s.copay_ltc[static_cast<std::size_t>(t) * ages.n_ages + j] >= 0.10 - 1e-12);
                    CHECK(s.copay_ltc[static_cast<std::size_t>(t) * ages.n_ages + j] <= 0.30 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("aliases and unknown ids") {
    CHECK(canonical_reform_id("med10") == "med30");
    CHECK(canonical_reform_id("ltc10") == "ltc30");
    CHECK_THROWS_WITH_AS(build_scenario("baseline", "xyz", year0, ny, ages),
                         doctest::Contains("valid:"), ValidationError);
    CHECK_THROWS_AS(build_scenario("other", "none", year0, ny, ages), ValidationError);
}
