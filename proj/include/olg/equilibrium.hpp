// General-equilibrium solvers: the detrended stationary economy (used for
// the initial steady state and the terminal balanced-growth path) and the
// damped fixed point over the transition.
//
// Per iteration the update order is: households -> aggregation -> labor
// market cleared within the year (given marginal utilities) -> capital
// demands and the equity return from asset-market clearing -> debt rule ->
// consumption-tax closure -> damped mix into the next guess.
//
// Asset market convention: households hold government bonds plus the
// market value of capital claims, V = (1-tau_d1)(K1T + (1-tau_pi)K1I) +
// (1-tau_d2)(K2T + K2I). Dividends reach households through the equity
// return; distributions are taxed, and sector-2 distributions are net of
// tangible net investment (retained-earnings financing), which is what
// makes the goods market clear identically.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <mutex>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <vector>

#include "olg/common.hpp"
#include "olg/config.hpp"
#include "olg/demographics.hpp"
#include "olg/fiscal.hpp"
#include "olg/household.hpp"
#include "olg/io.hpp"
#include "olg/policy.hpp"
#include "olg/production.hpp"

namespace olg {

namespace detail {

template <typename F>
void parallel_for(int n, int workers, F&& body) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&]() {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    int k = std::min(workers, n);
    pool.reserve(k - 1);
    for (int i = 0; i < k - 1; ++i) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Monotone-decreasing scalar root on [lo, hi]; plain bisection for
// determinism.
template <typename F>
double bisect_decreasing(F&& f, double lo, double hi, int iters = 100) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo < 0.0) return lo;
    if (fhi > 0.0) return hi;
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Expected per-capita health costs in level units: raw age cost times the
// cohort's unconditional survival, times the productivity trend (costs and
// bracket floors are indexed to the trend so the detrended system is
// stationary).
struct HealthExpectation {
    AgeGrid ages;
    int year0 = 2015;
    int n_years = 1;
    std::vector<double> medical;  // [t][g][j]
    std::vector<double> ltc;

    double med(int year, Gender g, int j) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return medical[(static_cast<std::size_t>(t) * n_genders + static_cast<int>(g)) * ages.n_ages + j];
    }
    double ltc_cost(int year, Gender g, int j) const {
        int t = std::clamp(year - year0, 0, n_years - 1);
        return ltc[(static_cast<std::size_t>(t) * n_genders + static_cast<int>(g)) * ages.n_ages + j];
    }
};

inline HealthExpectation build_health_expectation(const InputData& data, const SectorTech& tech,
                                                  int year0, int n_years) {
    HealthExpectation h;
    h.ages = data.ages;
    h.year0 = year0;
    h.n_years = n_years;
    h.medical.assign(static_cast<std::size_t>(n_years) * n_genders * data.ages.n_ages, 0.0);
    h.ltc.assign(h.medical.size(), 0.0);
    double gz = tech.trend_growth();
    for (int t = 0; t < n_years; ++t) {
        int year = year0 + t;
        double z = std::pow(1.0 + gz, t);
        for (int g = 0; g < n_genders; ++g) {
            for (int j = 0; j < data.ages.n_ages; ++j) {
                double surv = 1.0;
                for (int k = 0; k <= j; ++k)
                    surv *= data.survival(year + (k - j), static_cast<Gender>(g), k);
                std::size_t idx =
                    (static_cast<std::size_t>(t) * n_genders + g) * data.ages.n_ages + j;
                h.medical[idx] = data.med_raw[g][j] * surv * z;
                h.ltc[idx] = data.ltc_raw[g][j] * data.cert_rate[g][j] * surv * z;
            }
        }
    }
    return h;
}

struct EconomyPath {
    int year0 = 2015;
    int n_years = 0;
    std::vector<double> y, gdp, c, c_util, copay, g, g_pure, x_t, x_i, b, tau_c, w, i_k, r, psi, p1,
        p2, pension, health_gov, labor, l1, l2, k1t, k1i, k2t, k2i, assets, population,
        resource_resid;
    std::vector<std::uint8_t> tau_c_negative;

    void resize(int n) {
        n_years = n;
        for (auto* v :
             {&y, &gdp, &c, &c_util, &copay, &g, &g_pure, &x_t, &x_i, &b, &tau_c, &w, &i_k, &r,
              &psi, &p1, &p2, &pension, &health_gov, &labor, &l1, &l2, &k1t, &k1i, &k2t, &k2i,
              &assets, &population, &resource_resid})
            v->assign(n, 0.0);
        tau_c_negative.assign(n, 0);
    }
    int index_of(int year) const { return year - year0; }
};

// Detrended stationary equilibrium. All quantities are in trend-1 units;
// per-head profiles of the reference cohort are entry-normalized levels.
struct StationaryEquilibrium {
    double entry_growth = 0.0;
    double g_z = 0.0;      // per-capita trend growth
    double g_level = 0.0;  // level growth of aggregates
    PopulationGrid pyramid;

    double w = 0, i_k = 0, r = 0, psi = 0, tau_c = 0;
    double asset_return = 0;  // firm-side no-arbitrage return (pre dividend tax)
    CapitalState capital;
    double y = 0, y1 = 0, y2 = 0, p1 = 0, p2 = 0, gdp = 0, b = 0;
    double c_util = 0, copay = 0, m_gov = 0, g_pure = 0, x_t = 0, x_i = 0;
    double labor = 0, l1 = 0, l2 = 0, assets = 0, pension_total = 0;
    double labor_tax_rev = 0, corp_rev = 0, div1_rev = 0, div2_rev = 0;
    double walras_residual = 0;   // goods-market gap, detrended units
    double return_identity_gap = 0;

    std::array<HouseholdSolution, n_household_types> ref;
    std::array<std::vector<double>, n_household_types> earn_hist;   // W by age, levels
    std::array<std::vector<double>, n_household_types> pension_by_age;  // levels
    std::array<std::vector<double>, n_household_types> efficiency;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
};

struct StationaryProblem {
    double kappa = 0.62;
    int retire_age = 46;                 // model age
    std::vector<double> copay_med;       // by age
    std::vector<double> copay_ltc;
    int survival_year = 2015;            // schedule slice (clamped into the data window)
    double entry_growth = -0.01;
    double total_mass = 1.0;
};

inline StationaryProblem stationary_problem_from_scenario(const Scenario& scn, int policy_year,
                                                          int survival_year, double entry_growth,
                                                          double total_mass) {
    StationaryProblem p;
    p.kappa = scn.replacement(policy_year);
    p.retire_age = scn.retirement_age(policy_year);
    p.copay_med.resize(scn.ages.n_ages);
    p.copay_ltc.resize(scn.ages.n_ages);
    for (int j = 0; j < scn.ages.n_ages; ++j) {
        p.copay_med[j] = scn.medical_copay(policy_year, j);
        p.copay_ltc[j] = scn.ltc_copay(policy_year, j);
    }
    p.survival_year = survival_year;
    p.entry_growth = entry_growth;
    p.total_mass = total_mass;
    return p;
}

inline StationaryEquilibrium solve_stationary(const ModelConfig& cfg, const InputData& data,
                                              const StationaryProblem& prob,
                                              const SolverSettings& settings) {
    const AgeGrid ages = cfg.ages();
    const int n = ages.n_ages;
    const double gz = cfg.tech.trend_growth();
    const double g_level = (1.0 + gz) * (1.0 + prob.entry_growth) - 1.0;
    const double i_d = cfg.debt.bond_rate;
    const SectorTech& tech = cfg.tech;
    const CapitalTaxes& tax = cfg.taxes;
    const double l1_share = tech.labor_share_sector1();

    StationaryEquilibrium eq;
    eq.entry_growth = prob.entry_growth;
    eq.g_z = gz;
    eq.g_level = g_level;
    eq.pyramid = stationary_population(data.survival, prob.survival_year, prob.entry_growth,
                                       data.shares, prob.total_mass);

    // Detrended expected health costs at the schedule slice.
    std::vector<std::vector<double>> mhat_med(n_genders, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> mhat_ltc(n_genders, std::vector<double>(n, 0.0));
    for (int g = 0; g < n_genders; ++g)
        for (int j = 0; j < n; ++j) {
            double surv = 1.0;
            for (int k = 0; k <= j; ++k)
                surv *= data.survival(prob.survival_year + (k - j), static_cast<Gender>(g), k);
            mhat_med[g][j] = data.med_raw[g][j] * surv;
            mhat_ltc[g][j] = data.ltc_raw[g][j] * data.cert_rate[g][j] * surv;
        }

    for (int type = 0; type < n_household_types; ++type)
        eq.efficiency[type] = data.effective_efficiency(type, prob.retire_age);

    // Aggregation weights: stationary masses deflated by the trend so the
    // reference cohort's level paths aggregate to detrended cross sections.
    std::array<std::vector<double>, n_household_types> weights;
    std::vector<double> zpow(n), zpow_inv(n);
    for (int j = 0; j < n; ++j) {
        zpow[j] = std::pow(1.0 + gz, j);
        zpow_inv[j] = 1.0 / zpow[j];
    }
    for (int type = 0; type < n_household_types; ++type) {
        weights[type].resize(n);
        for (int j = 0; j < n; ++j)
            weights[type][j] = eq.pyramid(prob.survival_year, type, j) * zpow_inv[j];
    }

    // State of the damped iteration. ik is the household equity return;
    // rho_state tracks the firm-side return from the last asset clearing.
    double what = 0.0, ik = 0.05, tauc = 0.25, psi = 0.35;
    double rho_state = 0.06;
    {
        double L0 = 0.0;
        for (int type = 0; type < n_household_types; ++type)
            for (int j = 0; j < n; ++j)
                L0 += eq.pyramid(prob.survival_year, type, j) * eq.efficiency[type][j] * 0.3;
        L0 = std::max(L0, 1e-9);
        double y0 = output_given_return(tech, tax, 1.0, 1.0, l1_share * L0, (1.0 - l1_share) * L0,
                                        rho_state);
        what = tech.eta1 * tech.s1.labor_share() * y0 / (l1_share * L0);
    }
    std::array<std::vector<double>, n_household_types> Wearn;
    for (auto& v : Wearn) v.assign(n, 0.0);
    bool have_solutions = false;

    std::vector<double> surv_slice[n_genders];
    for (int g = 0; g < n_genders; ++g) {
        surv_slice[g].resize(n);
        for (int j = 0; j < n; ++j)
            surv_slice[g][j] = data.survival(prob.survival_year, static_cast<Gender>(g), j);
    }

    double damping = settings.damping;
    double residual = 1e9;
    int it = 0;
    double best_residual = 1e18;
    int worse_count = 0;
    int total_iterations = 0;

    std::array<HouseholdSolution, n_household_types> sols;

    // The tiny Frisch parameters make aggregate labor supply nearly a step
    // function of the wage-consumption ratio, which strands cold-started
    // iterations in all-or-nothing corners. A short homotopy on the Frisch
    // parameter walks the fixed point in from a smooth labor supply.
    const double frisch_stages[5] = {16.0, 8.0, 4.0, 2.0, 1.0};
    for (int stage = 0; stage < 5; ++stage) {
    double frisch_mult = frisch_stages[stage];
    bool final_stage = stage == 4;
    double stage_tol = final_stage ? settings.tolerance : std::max(1e-4, settings.tolerance);
    int stage_iters = final_stage ? settings.max_iterations : 600;
    best_residual = 1e18;
    worse_count = 0;
    int improve_count = 0;
    damping = settings.damping;

    for (it = 0; it < stage_iters; ++it) {
        double r_rate = portfolio_return(psi, i_d, ik);
        double rho_demand = std::clamp(rho_state, 0.005, 0.40);

        // --- inner fixed point: households and the labor market ----------
        // Re-solving the cohorts at each cleared wage keeps hours and
        // consumption mutually consistent; the wage map contracts through
        // the lifetime-income response of consumption.
        double L_star = 0.0;
        for (int pass = 0; pass < 24; ++pass) {
            detail::parallel_for(n_household_types, detail::resolve_workers(settings.workers),
                                 [&](int type) {
                Gender g = type_gender(type);
                HouseholdPrefs pref{cfg.beta, cfg.leisure_weight,
                                    std::min(0.85, cfg.frisch(g) * frisch_mult)};
                CohortInputs in;
                in.n_ages = n;
                in.first_age = 0;
                in.initial_assets = 0.0;
                in.entry_year = cfg.year0;
                in.type = type;
                in.tax_table = &data.tax_table;
                in.wage.resize(n);
                in.rate.assign(n, r_rate);
                in.cons_tax.assign(n, tauc);
                in.tax_scale = zpow;
                in.efficiency = eq.efficiency[type];
                in.pension.assign(n, 0.0);
                in.health_outlay.resize(n);
                in.transfer.assign(n, 0.0);
                in.survival = surv_slice[static_cast<int>(g)];
                in.can_work.resize(n);
                for (int j = 0; j < n; ++j) {
                    in.wage[j] = what * zpow[j];
                    in.can_work[j] = (j + 1) < prob.retire_age;
                    in.health_outlay[j] = (prob.copay_med[j] * mhat_med[static_cast<int>(g)][j] +
                                           prob.copay_ltc[j] * mhat_ltc[static_cast<int>(g)][j]) *
                                          zpow[j];
                    if (have_solutions && (j + 1) >= prob.retire_age)
                        in.pension[j] = prob.kappa * Wearn[type][j] / (prob.retire_age - 1);
                }
                sols[type] = solve_lifecycle(pref, in);
            });
            have_solutions = true;

            double L_hi = 1e-12;
            for (int type = 0; type < n_household_types; ++type)
                for (int j = 0; j < n; ++j)
                    if ((j + 1) < prob.retire_age)
                        L_hi += eq.pyramid(prob.survival_year, type, j) * eq.efficiency[type][j];
            auto supply_at = [&](double wage_try) {
                double L = 0.0;
                for (int type = 0; type < n_household_types; ++type) {
                    for (int j = 0; j < n; ++j) {
                        double e = eq.efficiency[type][j];
                        if (e <= 0.0 || (j + 1) >= prob.retire_age) continue;
                        double l = labor_choice(sols[type].consumption[j], wage_try * zpow[j] * e,
                                                tauc, zpow[j], data.tax_table, cfg.leisure_weight,
                                                std::min(0.85, cfg.frisch(type_gender(type)) * frisch_mult));
                        L += eq.pyramid(prob.survival_year, type, j) * l * e;
                    }
                }
                return L;
            };
            auto wage_demand = [&](double L) {
                double yv = output_given_return(tech, tax, 1.0, 1.0, l1_share * L,
                                                (1.0 - l1_share) * L, rho_demand);
                return tech.eta1 * tech.s1.labor_share() * yv / (l1_share * L);
            };
            L_star = detail::bisect_decreasing(
                [&](double L) { return supply_at(wage_demand(L)) - L; }, 1e-12 * L_hi, L_hi, 80);
            double w_clear = wage_demand(L_star);
            double drift = std::abs(w_clear - what) / std::max(what, 1e-300);
            what = w_clear;
            if (drift < std::max(1e-10, 0.003 * stage_tol)) break;
        }

        // --- aggregation (detrended cross-section) -----------------------
        double C = 0, COPAY = 0, A_hold = 0, T_lab = 0, P = 0, M_gov = 0;
        for (int type = 0; type < n_household_types; ++type) {
            Gender g = type_gender(type);
            for (int j = 0; j < n; ++j) {
                double wgt = weights[type][j];
                double mass = eq.pyramid(prob.survival_year, type, j);
                C += wgt * sols[type].consumption[j];
                A_hold += wgt * sols[type].assets[j];
                double y_lab = what * zpow[j] * sols[type].labor[j] * eq.efficiency[type][j];
                T_lab += wgt * data.tax_table.tax_scaled(y_lab, zpow[j]);
                if (have_solutions && (j + 1) >= prob.retire_age)
                    P += wgt * prob.kappa * Wearn[type][j] / (prob.retire_age - 1);
                COPAY += mass * (prob.copay_med[j] * mhat_med[static_cast<int>(g)][j] +
                                 prob.copay_ltc[j] * mhat_ltc[static_cast<int>(g)][j]);
                M_gov += mass * ((1.0 - prob.copay_med[j]) * mhat_med[static_cast<int>(g)][j] +
                                 (1.0 - prob.copay_ltc[j]) * mhat_ltc[static_cast<int>(g)][j]);
            }
        }

        // --- asset market: the firm-side return that prices the claims ----
        double l1 = l1_share * L_star, l2 = (1.0 - l1_share) * L_star;
        double ik_min = -std::min({(1.0 - tax.corp_tax) * tech.s1.delta_t, tech.s1.delta_i,
                                   tech.s2.delta_t, tech.s2.delta_i}) + 1e-4;
        auto excess = [&](double rho_try) {
            double yv = output_given_return(tech, tax, 1.0, 1.0, l1, l2, rho_try);
            CapitalState K = capital_from_return(tech, tax, yv, rho_try);
            double xt = (g_level + tech.s1.delta_t) * K.k1t + (g_level + tech.s2.delta_t) * K.k2t;
            double gdp_v = (C + COPAY + M_gov + xt) / (1.0 - cfg.debt.gov_cons_share);
            return claims_value(tax, K) + cfg.debt.debt_to_gdp * gdp_v - A_hold;
        };
        bool clearing_ok = excess(ik_min) > 0.0 && excess(1.5) < 0.0;
        double rho_imp = clearing_ok ? detail::bisect_decreasing(excess, ik_min, 1.5, 100)
                                     : rho_demand;

        // --- implied fiscal state ----------------------------------------
        double yv = output_given_return(tech, tax, 1.0, 1.0, l1, l2, rho_imp);
        CapitalState K = capital_from_return(tech, tax, yv, rho_imp);
        double x1i = (g_level + tech.s1.delta_i) * K.k1i;
        double x2i = (g_level + tech.s2.delta_i) * K.k2i;
        double xt = (g_level + tech.s1.delta_t) * K.k1t + (g_level + tech.s2.delta_t) * K.k2t;
        double gdp_v = (C + COPAY + M_gov + xt) / (1.0 - cfg.debt.gov_cons_share);
        double b_v = cfg.debt.debt_to_gdp * gdp_v;
        double g_pure = cfg.debt.gov_cons_share * gdp_v;
        double y1 = sector_output(tech.sector_tfp(1.0, 0), 1.0, K.k1t, K.k1i, l1, tech.s1);
        double y2 = sector_output(tech.sector_tfp(1.0, 1), 1.0, K.k2t, K.k2i, l2, tech.s2);
        double p1 = tech.eta1 * yv / y1;
        double p2 = tech.eta2() * yv / y2;
        Dividends div = profits_dividends(tech, tax, p1, y1, p2, y2, what, l1, l2, x1i, x2i, K,
                                          (1.0 + g_level) * K.k1t);
        double d2_dist = div.d2 - g_level * K.k2t;
        GovernmentFlows flows;
        flows.gov_consumption = g_pure;
        flows.pension = P;
        flows.health = M_gov;
        flows.labor_tax_revenue = T_lab;
        flows.corp_tax_revenue = tax.corp_tax * div.profit1;
        flows.div_tax_revenue1 = tax.div_tax1 * div.d1;
        flows.div_tax_revenue2 = tax.div_tax2 * d2_dist;
        double tau_imp = consumption_tax_closure(b_v, (1.0 + g_level) * b_v, i_d, flows, C).tau_c;
        double psi_imp = b_v / A_hold;
        double claims = claims_value(tax, K);
        double ik_imp = household_equity_return(tax, claims, div.d1, d2_dist,
                                                (1.0 + g_level) * claims);
        rho_state = rho_imp;

        // --- earnings histories for next iteration's pensions --------------
        std::array<std::vector<double>, n_household_types> Wnew;
        for (int type = 0; type < n_household_types; ++type) {
            Wnew[type].assign(n, 0.0);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if ((j + 1) < prob.retire_age)
                    acc += what * zpow[j] * sols[type].labor[j] * eq.efficiency[type][j];
                Wnew[type][j] = acc;
            }
        }

        // --- damped update -------------------------------------------------
        // Transient iterates can push the clearing against its brackets and
        // imply absurd values; bound the updates before mixing them in.
        double ik_upd = std::clamp(ik_imp, -0.05, 0.60);
        double tau_upd = std::clamp(tau_imp, -0.90, 1.50);
        double warm = (it < 30) ? std::min(damping, 0.2) : damping;

        double res = 0.0;
        res = std::max(res, std::abs(ik_imp - ik));
        res = std::max(res, std::abs(tau_imp - tauc));
        res = std::max(res, std::abs(psi_imp - psi));
        if (!clearing_ok) res = std::max(res, 1.0);
        if (std::getenv("OLG_TRACE") && it % 20 == 0)
            std::fprintf(stderr,
                         "it %4d res %.3e | w %.5f ik %.4f->%.4f tau %.4f->%.4f psi %.3f->%.3f rho %.4f A %.1f C %.1f L %.2f P %.2f\n",
                         it, res, what, ik, ik_imp, tauc, tau_imp, psi, psi_imp, rho_imp,
                         A_hold, C, L_star, P);
        ik += warm * (ik_upd - ik);
        tauc += warm * (tau_upd - tauc);
        psi += warm * (psi_imp - psi);
        psi = std::clamp(psi, 0.0, 1.0);
        // Earnings histories are derived quantities with a small feedback
        // loop: damp them only while the state is still far out, then track
        // directly so they do not become the slowest mode.
        double wfac = (res < 1e-3 && it > 20) ? 1.0 : warm;
        for (int type = 0; type < n_household_types; ++type)
            for (int j = 0; j < n; ++j)
                Wearn[type][j] += wfac * (Wnew[type][j] - Wearn[type][j]);

        residual = res;
        if (res < best_residual) {
            best_residual = res;
            worse_count = 0;
            if (++improve_count >= 25) {
                damping = std::min(0.95, damping * 1.3);
                improve_count = 0;
            }
        } else {
            improve_count = 0;
            if (++worse_count >= 10) {
                damping = std::max(0.02, damping * 0.5);
                worse_count = 0;
            }
        }
        if (res < stage_tol) break;
    }
    total_iterations += it + 1;
    }  // homotopy stages
    eq.iterations = total_iterations;
    eq.residual = residual;
    eq.converged = residual < settings.tolerance;
    if (!eq.converged)
        throw ConvergenceError("stationary equilibrium failed to converge: residual " +
                               std::to_string(residual) + " after " + std::to_string(eq.iterations) +
                               " iterations");

    // --- assemble the converged state -----------------------------------
    double r_rate = portfolio_return(psi, i_d, ik);
    double C = 0, COPAY = 0, A_hold = 0, T_lab = 0, P = 0, M_gov = 0, L = 0;
    for (int type = 0; type < n_household_types; ++type) {
        Gender g = type_gender(type);
        HouseholdPrefs pref{cfg.beta, cfg.leisure_weight, cfg.frisch(g)};
        CohortInputs in;
        in.n_ages = n;
        in.first_age = 0;
        in.initial_assets = 0.0;
        in.entry_year = cfg.year0;
        in.type = type;
        in.tax_table = &data.tax_table;
        in.wage.resize(n);
        in.rate.assign(n, r_rate);
        in.cons_tax.assign(n, tauc);
        in.tax_scale = zpow;
        in.efficiency = eq.efficiency[type];
        in.pension.assign(n, 0.0);
        in.health_outlay.resize(n);
        in.transfer.assign(n, 0.0);
        in.survival = surv_slice[static_cast<int>(g)];
        in.can_work.resize(n);
        eq.pension_by_age[type].assign(n, 0.0);
        for (int j = 0; j < n; ++j) {
            in.wage[j] = what * zpow[j];
            in.can_work[j] = (j + 1) < prob.retire_age;
            in.health_outlay[j] = (prob.copay_med[j] * mhat_med[static_cast<int>(g)][j] +
                                   prob.copay_ltc[j] * mhat_ltc[static_cast<int>(g)][j]) *
                                  zpow[j];
            if ((j + 1) >= prob.retire_age) {
                in.pension[j] = prob.kappa * Wearn[type][j] / (prob.retire_age - 1);
                eq.pension_by_age[type][j] = in.pension[j];
            }
        }
        eq.ref[type] = solve_lifecycle(pref, in);
        eq.earn_hist[type] = Wearn[type];
        for (int j = 0; j < n; ++j) {
            double wgt = weights[type][j];
            double mass = eq.pyramid(prob.survival_year, type, j);
            C += wgt * eq.ref[type].consumption[j];
            A_hold += wgt * eq.ref[type].assets[j];
            L += mass * eq.ref[type].labor[j] * eq.efficiency[type][j];
            double y_lab = what * zpow[j] * eq.ref[type].labor[j] * eq.efficiency[type][j];
            T_lab += wgt * data.tax_table.tax_scaled(y_lab, zpow[j]);
            P += wgt * in.pension[j];
            COPAY += mass * (prob.copay_med[j] * mhat_med[static_cast<int>(g)][j] +
                             prob.copay_ltc[j] * mhat_ltc[static_cast<int>(g)][j]);
            M_gov += mass * ((1.0 - prob.copay_med[j]) * mhat_med[static_cast<int>(g)][j] +
                             (1.0 - prob.copay_ltc[j]) * mhat_ltc[static_cast<int>(g)][j]);
        }
    }
    eq.w = what;
    eq.i_k = ik;
    eq.r = r_rate;
    eq.psi = psi;
    eq.tau_c = tauc;
    eq.labor = L;
    eq.l1 = l1_share * L;
    eq.l2 = (1.0 - l1_share) * L;
    {
        double ik_min = -std::min({(1.0 - tax.corp_tax) * tech.s1.delta_t, tech.s1.delta_i,
                                   tech.s2.delta_t, tech.s2.delta_i}) + 1e-4;
        auto excess = [&](double rho_try) {
            double yv = output_given_return(tech, tax, 1.0, 1.0, eq.l1, eq.l2, rho_try);
            CapitalState K = capital_from_return(tech, tax, yv, rho_try);
            double xt = (g_level + tech.s1.delta_t) * K.k1t + (g_level + tech.s2.delta_t) * K.k2t;
            double gdp_v = (C + COPAY + M_gov + xt) / (1.0 - cfg.debt.gov_cons_share);
            return claims_value(tax, K) + cfg.debt.debt_to_gdp * gdp_v - A_hold;
        };
        eq.asset_return = detail::bisect_decreasing(excess, ik_min, 1.5, 100);
    }
    eq.y = output_given_return(tech, tax, 1.0, 1.0, eq.l1, eq.l2, eq.asset_return);
    eq.capital = capital_from_return(tech, tax, eq.y, eq.asset_return);
    eq.y1 = sector_output(tech.sector_tfp(1.0, 0), 1.0, eq.capital.k1t, eq.capital.k1i, eq.l1, tech.s1);
    eq.y2 = sector_output(tech.sector_tfp(1.0, 1), 1.0, eq.capital.k2t, eq.capital.k2i, eq.l2, tech.s2);
    eq.p1 = tech.eta1 * eq.y / eq.y1;
    eq.p2 = tech.eta2() * eq.y / eq.y2;
    eq.c_util = C;
    eq.copay = COPAY;
    eq.m_gov = M_gov;
    eq.x_t = (g_level + tech.s1.delta_t) * eq.capital.k1t + (g_level + tech.s2.delta_t) * eq.capital.k2t;
    eq.x_i = (g_level + tech.s1.delta_i) * eq.capital.k1i + (g_level + tech.s2.delta_i) * eq.capital.k2i;
    eq.gdp = (C + COPAY + M_gov + eq.x_t) / (1.0 - cfg.debt.gov_cons_share);
    eq.g_pure = cfg.debt.gov_cons_share * eq.gdp;
    eq.b = cfg.debt.debt_to_gdp * eq.gdp;
    eq.assets = A_hold;
    eq.pension_total = P;
    eq.labor_tax_rev = T_lab;
    Dividends div = profits_dividends(tech, tax, eq.p1, eq.y1, eq.p2, eq.y2, what, eq.l1, eq.l2,
                                      (g_level + tech.s1.delta_i) * eq.capital.k1i,
                                      (g_level + tech.s2.delta_i) * eq.capital.k2i, eq.capital,
                                      (1.0 + g_level) * eq.capital.k1t);
    eq.corp_rev = tax.corp_tax * div.profit1;
    eq.div1_rev = tax.div_tax1 * div.d1;
    eq.div2_rev = tax.div_tax2 * (div.d2 - g_level * eq.capital.k2t);
    eq.walras_residual =
        eq.y - (C + COPAY) - eq.x_t - eq.x_i - (eq.g_pure + M_gov);
    // Payout identity: pre-tax distributions equal (rho - g) times the
    // claim value when the capital demands satisfy the no-arbitrage FOCs.
    {
        double V = claims_value(tax, eq.capital);
        double payout = div.d1 + (div.d2 - g_level * eq.capital.k2t);
        eq.return_identity_gap =
            std::abs(payout - (eq.asset_return - g_level) * V) / std::max(V, 1e-12);
    }
    return eq;
}

// ---------------------------------------------------------------------------
// Transition path
// ---------------------------------------------------------------------------

struct TransitionResult {
    Scenario scenario;
    EconomyPath path;
    PopulationGrid pop;  // year0 .. year0+horizon+1
    int first_entry_offset = 0;  // entry offset of cohorts[0] relative to year0
    std::vector<std::array<HouseholdSolution, n_household_types>> cohorts;
    std::vector<double> residual_history;
    int iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
    bool any_negative_tau = false;

    const HouseholdSolution* cohort(int type, int entry_year) const {
        int c = (entry_year - path.year0) - first_entry_offset;
        if (c < 0 || c >= static_cast<int>(cohorts.size())) return nullptr;
        return &cohorts[c][type];
    }
};

inline TransitionResult solve_transition(const ModelConfig& cfg, const InputData& data,
                                         const Scenario& scn, const StationaryEquilibrium& initial,
                                         const StationaryEquilibrium& terminal,
                                         const SolverSettings& settings) {
    const AgeGrid ages = cfg.ages();
    const int NA = ages.n_ages;
    const int T = settings.horizon;  // years 0..T inclusive
    const int year0 = cfg.year0;
    const SectorTech& tech = cfg.tech;
    const CapitalTaxes& tax = cfg.taxes;
    const double i_d = cfg.debt.bond_rate;
    const double gz = tech.trend_growth();
    const double g_term = (1.0 + gz) * (1.0 + cfg.gamma_n_longrun) - 1.0;
    const double l1_share = tech.labor_share_sector1();
    const int workers = detail::resolve_workers(settings.workers);

    TransitionResult res;
    res.scenario = scn;
    res.first_entry_offset = -(NA - 1);
    const int ncoh = T + NA;  // entry offsets -(NA-1) .. T

    res.pop = project_population(data.base_population, data.survival, data.growth, data.shares, T + 1);
    HealthExpectation health = build_health_expectation(data, tech, year0, T + NA + 2);

    std::array<std::vector<double>, n_household_types> eff;
    for (int type = 0; type < n_household_types; ++type)
        eff[type] = data.effective_efficiency(type, scn.max_retirement_age());

    std::vector<double> zpow(T + NA + 2);
    for (int t = 0; t < static_cast<int>(zpow.size()); ++t) zpow[t] = std::pow(1.0 + gz, t);

    // Damped guess paths over t = 0..T. ik is the household equity return;
    // rho tracks the firm-side return that clears the asset market; the
    // capital path itself is part of the damped state so year-to-year
    // clearing noise never reaches returns or investment unfiltered.
    std::vector<double> w(T + 1), ik(T + 1), tauc(T + 1), psi(T + 1), gdp_prev(T + 1), rho(T + 1);
    std::vector<CapitalState> Kst(T + 2);
    double n0 = res.pop.total(year0);
    for (int t = 0; t <= T; ++t) {
        double f = std::min(1.0, t / 60.0);
        double nt = res.pop.total(year0 + t);
        w[t] = ((1.0 - f) * initial.w + f * terminal.w) * zpow[t];
        ik[t] = (1.0 - f) * initial.i_k + f * terminal.i_k;
        rho[t] = (1.0 - f) * initial.asset_return + f * terminal.asset_return;
        tauc[t] = (1.0 - f) * initial.tau_c + f * terminal.tau_c;
        psi[t] = (1.0 - f) * initial.psi + f * terminal.psi;
        gdp_prev[t] = initial.gdp * zpow[t] * nt / n0;
        double tp = terminal.pyramid.total(terminal.pyramid.year0);
        auto mix = [&](double a, double b) { return ((1.0 - f) * a / n0 + f * b / tp) * nt * zpow[t]; };
        Kst[t].k1t = mix(initial.capital.k1t, terminal.capital.k1t);
        Kst[t].k1i = mix(initial.capital.k1i, terminal.capital.k1i);
        Kst[t].k2t = mix(initial.capital.k2t, terminal.capital.k2t);
        Kst[t].k2i = mix(initial.capital.k2i, terminal.capital.k2i);
    }

    auto w_of = [&](int t) { return t <= T ? w[t] : terminal.w * zpow[t]; };
    auto ik_of = [&](int t) { return t <= T ? ik[t] : terminal.i_k; };
    auto tau_of = [&](int t) { return t <= T ? tauc[t] : terminal.tau_c; };
    auto psi_of = [&](int t) { return t <= T ? psi[t] : terminal.psi; };
    auto r_of = [&](int t) { return portfolio_return(psi_of(t), i_d, ik_of(t)); };

    // Accumulated-earnings paths (levels) per cohort and type, seeded from
    // the initial stationary equilibrium and updated from solved labor.
    std::vector<std::array<std::vector<double>, n_household_types>> Wearn(ncoh);
    for (int c = 0; c < ncoh; ++c) {
        int e = c + res.first_entry_offset;
        for (int type = 0; type < n_household_types; ++type) {
            Wearn[c][type].resize(NA);
            double scalef = std::pow(1.0 + gz, e);
            for (int j = 0; j < NA; ++j)
                Wearn[c][type][j] = initial.earn_hist[type][j] * scalef;
        }
    }

    res.cohorts.assign(ncoh, {});

    // The final decades are demographically stationary; pinning them to the
    // terminal balanced path removes a slow free-boundary mode and provides
    // the boundary condition for cohorts alive at the horizon.
    const int pin_start = std::max(1, T - 30);
    auto pin_tail = [&]() {
        double tp = terminal.pyramid.total(terminal.pyramid.year0);
        for (int t = pin_start; t <= T; ++t) {
            double scale = res.pop.total(year0 + t) / tp * zpow[t];
            w[t] = terminal.w * zpow[t];
            ik[t] = terminal.i_k;
            rho[t] = terminal.asset_return;
            tauc[t] = terminal.tau_c;
            psi[t] = terminal.psi;
            gdp_prev[t] = terminal.gdp * scale;
            Kst[t].k1t = terminal.capital.k1t * scale;
            Kst[t].k1i = terminal.capital.k1i * scale;
            Kst[t].k2t = terminal.capital.k2t * scale;
            Kst[t].k2i = terminal.capital.k2i * scale;
        }
    };
    pin_tail();

    auto solve_cohorts = [&]() {
        detail::parallel_for(ncoh * n_household_types, workers, [&](int idx) {
            int c = idx / n_household_types;
            int type = idx % n_household_types;
            int e = c + res.first_entry_offset;
            int first_age = std::max(0, -e);
            Gender g = type_gender(type);
            HouseholdPrefs pref{cfg.beta, cfg.leisure_weight, cfg.frisch(g)};
            CohortInputs in;
            in.n_ages = NA;
            in.first_age = first_age;
            in.entry_year = year0 + e;
            in.type = type;
            in.tax_table = &data.tax_table;
            in.initial_assets = (e < 0) ? initial.ref[type].assets[first_age] * std::pow(1.0 + gz, e)
                                        : 0.0;
            in.wage.assign(NA, 0.0);
            in.rate.assign(NA, 0.0);
            in.cons_tax.assign(NA, 0.0);
            in.tax_scale.assign(NA, 1.0);
            in.efficiency = eff[type];
            in.pension.assign(NA, 0.0);
            in.health_outlay.assign(NA, 0.0);
            in.transfer.assign(NA, 0.0);
            in.survival.assign(NA, 0.0);
            in.can_work.assign(NA, 0);
            for (int j = first_age; j < NA; ++j) {
                int t = e + j;
                int year = year0 + t;
                in.wage[j] = w_of(t);
                in.rate[j] = r_of(t);
                in.cons_tax[j] = tau_of(t);
                in.tax_scale[j] = zpow[t];
                int jr = scn.retirement_age(year);
                in.can_work[j] = (j + 1) < jr;
                if ((j + 1) >= jr)
                    in.pension[j] = scn.replacement(year) * Wearn[c][type][j] / (jr - 1);
                in.health_outlay[j] = scn.medical_copay(year, j) * health.med(year, g, j) +
                                      scn.ltc_copay(year, j) * health.ltc_cost(year, g, j);
                in.survival[j] = data.survival(year, g, j);
            }
            res.cohorts[c][type] = solve_lifecycle(pref, in);
        });
    };

    // Per-year aggregates recomputed each iteration.
    std::vector<double> C(T + 1), COPAY(T + 1), Ahold(T + 1), Tlab(T + 1), P(T + 1), Mgov(T + 1);
    std::vector<double> Lstar(T + 1), w_imp(T + 1), ik_imp(T + 1);
    std::vector<std::uint8_t> clearing_ok(T + 1, 1);
    std::vector<CapitalState> K_imp(T + 1);
    std::vector<double> Y(T + 1), P1(T + 1), P2(T + 1), Y1(T + 1), Y2(T + 1);
    std::vector<double> XT(T + 1), XI(T + 1), GDPimp(T + 1), Bimp(T + 2), tau_imp(T + 1),
        psi_imp(T + 1);

    auto aggregate = [&]() {
        for (int t = 0; t <= T; ++t) {
            int year = year0 + t;
            double c_sum = 0, copay_sum = 0, a_sum = 0, tl_sum = 0, p_sum = 0, m_sum = 0;
            for (int type = 0; type < n_household_types; ++type) {
                Gender g = type_gender(type);
                for (int j = 0; j < NA; ++j) {
                    double mass = res.pop(year, type, j);
                    if (mass <= 0.0) continue;
                    int c = (t - j) - res.first_entry_offset;
                    const HouseholdSolution& sol = res.cohorts[c][type];
                    c_sum += mass * sol.consumption[j];
                    a_sum += mass * sol.assets[j];
                    double y_lab = w_of(t) * sol.labor[j] * eff[type][j];
                    tl_sum += mass * data.tax_table.tax_scaled(y_lab, zpow[t]);
                    int jr = scn.retirement_age(year);
                    if ((j + 1) >= jr)
                        p_sum += mass * scn.replacement(year) * Wearn[c][type][j] / (jr - 1);
                    copay_sum += mass * (scn.medical_copay(year, j) * health.med(year, g, j) +
                                         scn.ltc_copay(year, j) * health.ltc_cost(year, g, j));
                    m_sum += mass *
                             ((1.0 - scn.medical_copay(year, j)) * health.med(year, g, j) +
                              (1.0 - scn.ltc_copay(year, j)) * health.ltc_cost(year, g, j));
                }
            }
            C[t] = c_sum;
            COPAY[t] = copay_sum;
            Ahold[t] = a_sum;
            Tlab[t] = tl_sum;
            P[t] = p_sum;
            Mgov[t] = m_sum;
        }
    };

    auto clear_markets = [&]() {
        detail::parallel_for(T + 1, workers, [&](int t) {
            int year = year0 + t;
            double tfp_idx = std::pow(1.0 + tech.gamma_a, t);
            double omega = std::pow(1.0 + tech.gamma_omega, t);
            // Labor market: supply at the solved marginal utilities equals
            // the marginal-product wage on the damped capital path.
            double L_hi = 1e-12;
            for (int type = 0; type < n_household_types; ++type)
                for (int j = 0; j < NA; ++j)
                    if ((j + 1) < scn.retirement_age(year))
                        L_hi += res.pop(year, type, j) * eff[type][j];
            auto supply_at = [&](double wage_try) {
                double L = 0.0;
                for (int type = 0; type < n_household_types; ++type) {
                    Gender g = type_gender(type);
                    for (int j = 0; j < NA; ++j) {
                        double mass = res.pop(year, type, j);
                        double e_j = eff[type][j];
                        if (mass <= 0.0 || e_j <= 0.0 || (j + 1) >= scn.retirement_age(year))
                            continue;
                        int c = (t - j) - res.first_entry_offset;
                        double l = labor_choice(res.cohorts[c][type].consumption[j],
                                                wage_try * e_j, tauc[t], zpow[t], data.tax_table,
                                                cfg.leisure_weight, cfg.frisch(g));
                        L += mass * l * e_j;
                    }
                }
                return L;
            };
            auto outputs_at = [&](double L) {
                double y1 = sector_output(tech.sector_tfp(tfp_idx, 0), omega, Kst[t].k1t,
                                          Kst[t].k1i, l1_share * L, tech.s1);
                double y2 = sector_output(tech.sector_tfp(tfp_idx, 1), omega, Kst[t].k2t,
                                          Kst[t].k2i, (1.0 - l1_share) * L, tech.s2);
                return std::pair<double, double>(y1, y2);
            };
            auto wage_demand = [&](double L) {
                auto [y1, y2] = outputs_at(L);
                double yv = final_good(y1, y2, tech.eta1);
                return tech.eta1 * tech.s1.labor_share() * yv / (l1_share * L);
            };
            double L = detail::bisect_decreasing(
                [&](double Ltry) { return supply_at(wage_demand(Ltry)) - Ltry; }, 1e-12 * L_hi,
                L_hi, 80);
            Lstar[t] = L;
            w_imp[t] = wage_demand(L);
            auto [y1, y2] = outputs_at(L);
            Y1[t] = y1;
            Y2[t] = y2;
            Y[t] = final_good(y1, y2, tech.eta1);
            P1[t] = tech.eta1 * Y[t] / y1;
            P2[t] = tech.eta2() * Y[t] / y2;

            // Asset market: the firm-side return whose capital demand
            // absorbs household savings net of government debt. Transient
            // iterates can leave no admissible root; those years keep the
            // previous stocks and hold the residual up instead.
            double target = Ahold[t] - cfg.debt.debt_to_gdp * gdp_prev[t];
            double ik_min = -std::min({(1.0 - tax.corp_tax) * tech.s1.delta_t, tech.s1.delta_i,
                                       tech.s2.delta_t, tech.s2.delta_i}) +
                            1e-4;
            auto excess = [&](double rho_try) {
                double yv = output_given_return(tech, tax, tfp_idx, omega, l1_share * L,
                                                (1.0 - l1_share) * L, rho_try);
                return claims_value(tax, capital_from_return(tech, tax, yv, rho_try)) - target;
            };
            clearing_ok[t] = target > 0.0 && excess(ik_min) > 0.0 && excess(1.5) < 0.0;
            if (clearing_ok[t]) {
                double rhov = detail::bisect_decreasing(excess, ik_min, 1.5, 100);
                rho[t] = rhov;
                double yv = output_given_return(tech, tax, tfp_idx, omega, l1_share * L,
                                                (1.0 - l1_share) * L, rhov);
                K_imp[t] = capital_from_return(tech, tax, yv, rhov);
            } else {
                K_imp[t] = Kst[t];
            }
        });
    };

    auto fiscal_pass = [&]() {
        Kst[T + 1].k1t = Kst[T].k1t * (1.0 + g_term);
        Kst[T + 1].k1i = Kst[T].k1i * (1.0 + g_term);
        Kst[T + 1].k2t = Kst[T].k2t * (1.0 + g_term);
        Kst[T + 1].k2i = Kst[T].k2i * (1.0 + g_term);
        for (int t = 0; t <= T; ++t) {
            XT[t] = (Kst[t + 1].k1t - (1.0 - tech.s1.delta_t) * Kst[t].k1t) +
                    (Kst[t + 1].k2t - (1.0 - tech.s2.delta_t) * Kst[t].k2t);
            XI[t] = (Kst[t + 1].k1i - (1.0 - tech.s1.delta_i) * Kst[t].k1i) +
                    (Kst[t + 1].k2i - (1.0 - tech.s2.delta_i) * Kst[t].k2i);
            GDPimp[t] = (C[t] + COPAY[t] + Mgov[t] + XT[t]) / (1.0 - cfg.debt.gov_cons_share);
            Bimp[t] = cfg.debt.debt_to_gdp * GDPimp[t];
        }
        Bimp[T + 1] = cfg.debt.debt_to_gdp * GDPimp[T] * (1.0 + g_term);
        for (int t = 0; t <= T; ++t) {
            double x1i = Kst[t + 1].k1i - (1.0 - tech.s1.delta_i) * Kst[t].k1i;
            double x2i = Kst[t + 1].k2i - (1.0 - tech.s2.delta_i) * Kst[t].k2i;
            double l1 = l1_share * Lstar[t], l2 = (1.0 - l1_share) * Lstar[t];
            Dividends div = profits_dividends(tech, tax, P1[t], Y1[t], P2[t], Y2[t], w_imp[t], l1,
                                              l2, x1i, x2i, Kst[t], Kst[t + 1].k1t);
            double d2_dist = div.d2 - (Kst[t + 1].k2t - Kst[t].k2t);
            GovernmentFlows flows;
            flows.gov_consumption = cfg.debt.gov_cons_share * GDPimp[t];
            flows.pension = P[t];
            flows.health = Mgov[t];
            flows.labor_tax_revenue = Tlab[t];
            flows.corp_tax_revenue = tax.corp_tax * div.profit1;
            flows.div_tax_revenue1 = tax.div_tax1 * div.d1;
            flows.div_tax_revenue2 = tax.div_tax2 * d2_dist;
            tau_imp[t] = consumption_tax_closure(Bimp[t], Bimp[t + 1], i_d, flows, C[t]).tau_c;
            psi_imp[t] = Bimp[t] / Ahold[t];
            ik_imp[t] = household_equity_return(tax, claims_value(tax, Kst[t]), div.d1, d2_dist,
                                                claims_value(tax, Kst[t + 1]));
        }
    };

    auto update_earnings = [&]() {
        for (int c = 0; c < ncoh; ++c) {
            int e = c + res.first_entry_offset;
            int first_age = std::max(0, -e);
            for (int type = 0; type < n_household_types; ++type) {
                double acc = (first_age > 0)
                                 ? initial.earn_hist[type][first_age - 1] * std::pow(1.0 + gz, e)
                                 : 0.0;
                const HouseholdSolution& sol = res.cohorts[c][type];
                for (int j = first_age; j < NA; ++j) {
                    int t = e + j;
                    if ((j + 1) < scn.retirement_age(year0 + t))
                        acc += w_of(t) * sol.labor[j] * eff[type][j];
                    Wearn[c][type][j] = acc;
                }
            }
        }
    };

    double damping = settings.damping;
    double best_residual = 1e18;
    int worse_count = 0;
    int improve_count = 0;
    bool converged = false;
    int it = 0;
    for (it = 0; it < settings.max_iterations; ++it) {
        auto tp0 = std::chrono::steady_clock::now();
        solve_cohorts();
        auto tp1 = std::chrono::steady_clock::now();
        aggregate();
        clear_markets();
        auto tp2 = std::chrono::steady_clock::now();
        fiscal_pass();
        update_earnings();
        double sec_solve = std::chrono::duration<double>(tp1 - tp0).count();
        double sec_clear = std::chrono::duration<double>(tp2 - tp1).count();

        double resid = 0.0;
        int worst_t = 0;
        const char* worst_what = "";
        auto track = [&](double v, int t, const char* what) {
            if (v > resid) {
                resid = v;
                worst_t = t;
                worst_what = what;
            }
        };
        for (int t = 0; t < pin_start; ++t) {
            track(std::abs(w_imp[t] - w[t]) / (initial.w * zpow[t]), t, "w");
            track(std::abs(ik_imp[t] - ik[t]), t, "ik");
            track(std::abs(tau_imp[t] - tauc[t]), t, "tau");
            track(std::abs(psi_imp[t] - psi[t]), t, "psi");
            track(std::abs(GDPimp[t] - gdp_prev[t]) / std::max(gdp_prev[t], 1e-12), t, "gdp");
            track(std::abs(K_imp[t].total() - Kst[t].total()) / std::max(Kst[t].total(), 1e-12), t,
                  "K");
            if (!clearing_ok[t]) track(1.0, t, "clearing");
        }
        res.residual_history.push_back(resid);
        if (std::getenv("OLG_TRACE") && it % 5 == 0) {
            int t2050 = std::min(T, 35), t2100 = std::min(T, 85);
            std::fprintf(stderr,
                         "tr it %4d res %.3e damp %.2f at %s[%d] | tau50 %.3f->%.3f w50 "
                         "%.4f->%.4f ik50 %.4f gdp50 %.1f A50 %.1f | tau2100 %.3f gdp2100 %.1f | "
                         "solve %.1fs clear %.1fs\n",
                         it, resid, damping, worst_what, year0 + worst_t, tauc[t2050],
                         tau_imp[t2050], w[t2050] / zpow[t2050], w_imp[t2050] / zpow[t2050],
                         ik[t2050], GDPimp[t2050], Ahold[t2050], tauc[t2100], GDPimp[t2100],
                         sec_solve, sec_clear);
        }
        double warm = (it < 20) ? std::min(damping, 0.25) : damping;
        for (int t = 0; t <= T; ++t) {
            double w_upd = std::clamp(w_imp[t], w[t] / 3.0, w[t] * 3.0);
            double ik_upd = std::clamp(ik_imp[t], -0.05, 0.60);
            double tau_upd = std::clamp(tau_imp[t], -0.90, 1.50);
            w[t] += warm * (w_upd - w[t]);
            ik[t] += warm * (ik_upd - ik[t]);
            tauc[t] += warm * (tau_upd - tauc[t]);
            psi[t] += warm * (psi_imp[t] - psi[t]);
            gdp_prev[t] += warm * (GDPimp[t] - gdp_prev[t]);
            Kst[t].k1t += warm * (K_imp[t].k1t - Kst[t].k1t);
            Kst[t].k1i += warm * (K_imp[t].k1i - Kst[t].k1i);
            Kst[t].k2t += warm * (K_imp[t].k2t - Kst[t].k2t);
            Kst[t].k2i += warm * (K_imp[t].k2i - Kst[t].k2i);
            w[t] = std::max(w[t], 1e-10);
            psi[t] = std::clamp(psi[t], 0.0, 1.0);
        }
        pin_tail();
        if (resid < settings.tolerance) {
            converged = true;
            break;
        }
        if (resid < best_residual) {
            best_residual = resid;
            worse_count = 0;
            if (++improve_count >= 25) {
                damping = std::min(0.9, damping * 1.25);
                improve_count = 0;
            }
        } else {
            improve_count = 0;
            if (++worse_count >= 10) {
                damping = std::max(0.05, damping * 0.5);
                worse_count = 0;
            }
        }
    }
    res.iterations = it + (converged ? 1 : 0);
    res.final_residual = res.residual_history.empty() ? 0.0 : res.residual_history.back();
    res.converged = converged;
    if (!converged)
        throw ConvergenceError("transition failed to converge: residual " +
                               std::to_string(res.final_residual) + " after " +
                               std::to_string(it) + " iterations (scenario " + scn.name + ")");

    // Final consistency pass at the converged prices.
    solve_cohorts();
    aggregate();
    clear_markets();
    fiscal_pass();

    EconomyPath& path = res.path;
    path.year0 = year0;
    path.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
        path.y[t] = Y[t];
        path.gdp[t] = GDPimp[t];
        path.c_util[t] = C[t];
        path.copay[t] = COPAY[t];
        path.c[t] = C[t] + COPAY[t];
        path.g_pure[t] = cfg.debt.gov_cons_share * GDPimp[t];
        path.g[t] = path.g_pure[t] + Mgov[t];
        path.x_t[t] = XT[t];
        path.x_i[t] = XI[t];
        path.b[t] = Bimp[t];
        path.tau_c[t] = tauc[t];
        path.tau_c_negative[t] = tau_imp[t] < 0.0;
        path.w[t] = w[t];
        path.i_k[t] = ik[t];
        path.r[t] = portfolio_return(psi[t], i_d, ik[t]);
        path.psi[t] = psi[t];
        path.p1[t] = P1[t];
        path.p2[t] = P2[t];
        path.pension[t] = P[t];
        path.health_gov[t] = Mgov[t];
        path.labor[t] = Lstar[t];
        path.l1[t] = l1_share * Lstar[t];
        path.l2[t] = (1.0 - l1_share) * Lstar[t];
        path.k1t[t] = Kst[t].k1t;
        path.k1i[t] = Kst[t].k1i;
        path.k2t[t] = Kst[t].k2t;
        path.k2i[t] = Kst[t].k2i;
        path.assets[t] = Ahold[t];
        path.population[t] = res.pop.total(year0 + t);
        path.resource_resid[t] =
            resource_residual(path.c[t], XT[t], XI[t], path.g[t], Y[t]);
        if (tau_imp[t] < 0.0) res.any_negative_tau = true;
    }
    return res;
}

}  // namespace olg
