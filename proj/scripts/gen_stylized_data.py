#!/usr/bin/env python3
"""Generate the stylized Japan input pack under data/.

The files are smooth parametric approximations of published demographic,
cost and productivity patterns (survival curves, the 2015 age pyramid,
birth-cohort sizes, age-cost profiles, hourly-wage profiles by gender and
employment type). They are deliberately approximate: the simulator's
acceptance checks are banded, not point targets.

Units: model income/output unit = 10 million yen per year; population in
millions of persons.
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")
os.makedirs(DATA, exist_ok=True)

YEAR0 = 2015
SURV_LAST = 2065
GROWTH_LAST = 2115
AGES = list(range(20, 121))

# Scale knobs settled by steady-state calibration runs.
EFF_SCALE = 16.0          # productivity level -> mean labor income in bracket range
MED_SCALE = 1.25          # medical cost level
LTC_SCALE = 1.00          # LTC cost level


def mortality(age, gender, year):
    """Gompertz-Makeham hazard with a mild improvement trend, frozen after
    2065 and extrapolated backwards for the historical cohorts."""
    if gender == "male":
        a, b, c = 3.0e-4, 5.72e-6, 0.112
    else:
        a, b, c = 1.5e-4, 4.5e-6, 0.112
    improve = 0.994 ** (min(year, SURV_LAST) - YEAR0)
    # Late-life mortality plateau: hazards level off near 0.45 per year.
    return min((a + b * math.exp(c * age)) * improve, 0.45)


def survival(age, gender, year):
    if age >= 120:
        return 0.0
    mu = mortality(age, gender, year)
    return math.exp(-mu)


def interp(anchors, x):
    xs = sorted(anchors)
    if x <= xs[0]:
        return anchors[xs[0]]
    if x >= xs[-1]:
        return anchors[xs[-1]]
    for lo, hi in zip(xs, xs[1:]):
        if lo <= x <= hi:
            f = (x - lo) / (hi - lo)
            return anchors[lo] + f * (anchors[hi] - anchors[lo])
    raise AssertionError


# Birth cohort sizes (millions), a smooth reading of the postwar history
# and a projection that settles on a -1 percent decline.
BIRTHS = {
    1895: 1.40, 1910: 1.70, 1925: 2.00, 1940: 2.10, 1946: 2.20, 1947: 2.68,
    1949: 2.70, 1951: 2.14, 1955: 1.73, 1961: 1.59, 1965: 1.82, 1966: 1.36,
    1967: 1.94, 1971: 2.00, 1973: 2.09, 1975: 1.90, 1980: 1.58, 1985: 1.43,
    1990: 1.22, 1995: 1.19, 2000: 1.19, 2005: 1.06, 2010: 1.07, 2016: 0.98,
    2020: 0.84, 2030: 0.76, 2045: 0.68,
}


def births(year):
    # The projection settles on the long-run -1 percent decline from 2045.
    if year > 2045:
        return BIRTHS[2045] * (0.99 ** (year - 2045))
    return interp(BIRTHS, year)


# Survival from birth to age 20, by birth year: early cohorts carried heavy
# child mortality and wartime losses.
PRE20 = {1895: 0.62, 1915: 0.68, 1930: 0.74, 1940: 0.80, 1947: 0.88, 1955: 0.94,
         1965: 0.975, 1980: 0.988, 1995: 0.995, 2100: 0.997}


def cohort_at_20(byear):
    return births(byear) * interp(PRE20, byear)


def survive_from_20(age, gender, at_year=YEAR0):
    """Survival along the cohort diagonal: someone aged `age` in `at_year`
    faced age a in year at_year - (age - a)."""
    s = 1.0
    for a in range(20, age):
        s *= survival(a, gender, at_year - (age - a))
    return s


TYPE_SHARES = {
    ("male", "regular"): 0.40,
    ("male", "contingent"): 0.10,
    ("female", "regular"): 0.24,
    ("female", "contingent"): 0.26,
}


def productivity_profile(age, gender, emp):
    """Hourly efficiency shapes; zero from 65 in the baseline data."""
    if age >= 65:
        return 0.0
    x = age
    if gender == "male" and emp == "regular":
        if x < 60:
            base = 0.80 + 1.25 * math.sin(math.pi * (x - 20) / 64.0) ** 1.6
        else:
            base = 0.70
    elif gender == "female" and emp == "regular":
        if x < 60:
            base = 0.78 + 0.47 * math.sin(math.pi * (x - 20) / 56.0) ** 1.4
        else:
            base = 0.60
    elif gender == "male" and emp == "contingent":
        base = 0.60 + 0.12 * math.sin(math.pi * (x - 20) / 80.0)
    else:
        base = 0.55 + 0.09 * math.sin(math.pi * (x - 20) / 80.0)
    return base * EFF_SCALE


def medical_cost(age, gender):
    anchors = {20: 0.010, 30: 0.012, 40: 0.016, 50: 0.025, 60: 0.040,
               70: 0.062, 80: 0.085, 90: 0.095, 120: 0.100}
    v = interp(anchors, age) * MED_SCALE
    if gender == "female":
        v *= 1.05 if age < 50 else 0.93
    return v


def ltc_per_user(age):
    anchors = {60: 0.16, 75: 0.18, 85: 0.20, 95: 0.22, 120: 0.23}
    return interp(anchors, max(age, 60)) * LTC_SCALE


def cert_rate(age, gender):
    anchors = {59: 0.0, 60: 0.008, 65: 0.018, 70: 0.028, 75: 0.06, 80: 0.13,
               85: 0.27, 90: 0.50, 95: 0.70, 100: 0.80, 120: 0.82}
    v = interp(anchors, age) if age >= 60 else 0.0
    if gender == "female":
        v = min(v * 1.15, 0.85)
    return v


def copay_medical(age):
    if age < 70:
        return 0.30
    if age < 75:
        return 0.20
    return 0.10


def write(name, header, rows):
    path = os.path.join(DATA, name)
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(str(x) for x in row) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


def main():
    rows = []
    for year in range(YEAR0, SURV_LAST + 1):
        for age in AGES:
            for g in ("male", "female"):
                rows.append((year, age, g, f"{survival(age, g, year):.6f}"))
    write("survival.csv", "year,age,gender,s", rows)

    rows = []
    for age in AGES:
        byear = YEAR0 - age
        total = cohort_at_20(byear)
        for g in ("male", "female"):
            gfrac = 0.512 if g == "male" else 0.488
            alive = total * gfrac * survive_from_20(age, g)
            gshare = TYPE_SHARES[(g, "regular")] + TYPE_SHARES[(g, "contingent")]
            for h in ("regular", "contingent"):
                frac = TYPE_SHARES[(g, h)] / gshare
                rows.append((age, g, h, f"{alive * frac:.6f}"))
    write("population0.csv", "age,gender,emp_type,mass", rows)

    rows = [(g, h, s) for (g, h), s in TYPE_SHARES.items()]
    write("type_shares.csv", "gender,emp_type,share", rows)

    rows = []
    for year in range(YEAR0, GROWTH_LAST + 1):
        e_now = cohort_at_20(year - 20)
        e_next = cohort_at_20(year + 1 - 20)
        rows.append((year, f"{e_next / e_now - 1.0:.6f}"))
    write("cohort_growth.csv", "year,rate", rows)

    rows = []
    for age in range(20, 70):
        for g in ("male", "female"):
            for h in ("regular", "contingent"):
                rows.append((age, g, h, f"{productivity_profile(age, g, h):.6f}"))
    write("productivity.csv", "age,gender,emp_type,efficiency", rows)

    rows = []
    for age in AGES:
        for g in ("male", "female"):
            rows.append((age, g, f"{medical_cost(age, g):.6f}", f"{ltc_per_user(age):.6f}",
                         f"{cert_rate(age, g):.6f}"))
    write("health_costs.csv", "age,gender,medical,ltc,cert_rate", rows)

    rows = [(age, copay_medical(age), 0.10) for age in AGES]
    write("copay_baseline.csv", "age,medical_rate,ltc_rate", rows)

    table = [
        (0.0, 0.027, 0.0, 0.0),
        (0.1, 0.191, -0.0164, 0.0027),
        (0.2, 0.272, -0.0326, 0.0218),
        (0.3, 0.285, -0.0365, 0.049),
        (0.4, 0.294, -0.0401, 0.0775),
        (0.5, 0.302, -0.0441, 0.1069),
        (0.6, 0.306, -0.0465, 0.1371),
        (0.7, 0.315, -0.0528, 0.1677),
        (0.8, 0.324, -0.0600, 0.1992),
        (0.9, 0.328, -0.0636, 0.2316),
        (1.0, 0.338, -0.0736, 0.2644),
        (1.5, 0.358, -0.1036, 0.4334),
        (2.0, 0.387, -0.1616, 0.6124),
        (2.5, 0.447, -0.3116, 0.8059),
    ]
    write("tax_table.csv", "lower,rate,alpha,beta", table)

    # Quick diagnostic: dependency ratio of the 2015 pyramid.
    def pop_range(year, lo, hi):
        total = 0.0
        for a in range(lo, hi + 1):
            if a < 20:
                continue
            c20 = cohort_at_20(year - a)
            total += c20 * (0.512 * survive_from_20(a, "male", year) +
                            0.488 * survive_from_20(a, "female", year))
        return total

    for year in (2015, 2030, 2050, 2065, 2080, 2100, 2130, 2180):
        dep = pop_range(year, 65, 120) / pop_range(year, 20, 64)
        print(f"{year} dependency ratio: {dep:.3f}")


if __name__ == "__main__":
    main()
