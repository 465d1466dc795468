// Two-sector technology block: Cobb-Douglas sector outputs with tangible
// and intangible capital, the final-good aggregator, marginal-product
// pricing, profits and dividends, and the resource identity.
//
// Tax treatment behind the common after-tax return i_k:
//   sector 1 tangibles    rental taxed at tau_pi, depreciation deductible:
//                         user cost = i_k/(1-tau_pi) + delta_1T
//   sector 1 intangibles  investment expensed, so the wedge cancels:
//                         user cost = i_k + delta_1I
//   sector 2 (untaxed profits): user cost = i_k + delta
// Dividend taxes fall on distributions and enter the market value of the
// claims, V = (1-tau_d1)(K1T + (1-tau_pi)K1I) + (1-tau_d2)(K2T + K2I),
// which is what households hold against their savings.
#pragma once

#include <cmath>
#include <stdexcept>

#include "olg/common.hpp"

namespace olg {

struct SectorParams {
    double theta_t = 0.0;  // tangible capital share
    double theta_i = 0.0;  // intangible capital share
    double delta_t = 0.0;  // tangible depreciation
    double delta_i = 0.0;  // intangible depreciation

    double labor_share() const { return 1.0 - theta_t - theta_i; }
};

struct SectorTech {
    SectorParams s1{0.45, 0.15, 0.08, 0.08};
    SectorParams s2{0.35, 0.05, 0.05, 0.09};
    double eta1 = 0.64;        // aggregator share of sector 1
    double gamma_a = 0.003;    // TFP growth (per-capita growth contribution)
    double gamma_omega = 0.007;  // labor-augmenting growth

    double eta2() const { return 1.0 - eta1; }
    const SectorParams& sector(int i) const { return i == 0 ? s1 : s2; }
    double eta(int i) const { return i == 0 ? eta1 : eta2(); }

    // Value-weighted capital share of the composite good.
    double capital_share() const {
        return eta1 * (s1.theta_t + s1.theta_i) + eta2() * (s2.theta_t + s2.theta_i);
    }
    // The TFP index A multiplies sector output as A^(1-theta_T-theta_I), so
    // technology contributes gamma_a + gamma_omega to per-capita growth and
    // every quantity grows at a common rate on a balanced path.
    double sector_tfp(double tfp_index, int i) const {
        return std::pow(tfp_index, sector(i).labor_share());
    }
    // Per-capita trend factor per year.
    double trend_growth() const { return (1.0 + gamma_a) * (1.0 + gamma_omega) - 1.0; }

    // Labor allocation shares implied by wage equalization across sectors.
    double labor_share_sector1() const {
        double a = eta1 * s1.labor_share();
        double b = eta2() * s2.labor_share();
        return a / (a + b);
    }

    void validate() const {
        for (int i = 0; i < 2; ++i) {
            const auto& s = sector(i);
            if (!(s.theta_t > 0 && s.theta_i > 0 && s.theta_t + s.theta_i < 1.0))
                throw ValidationError("sector tech: capital shares must be in (0,1) and sum below 1");
            if (!(s.delta_t > 0 && s.delta_t < 1 && s.delta_i > 0 && s.delta_i < 1))
                throw ValidationError("sector tech: depreciation rates must be in (0,1)");
        }
        if (!(eta1 > 0 && eta1 < 1)) throw ValidationError("sector tech: eta1 must be in (0,1)");
    }
};

struct CapitalTaxes {
    double corp_tax = 0.25;   // tau_pi, sector 1 profits
    double div_tax1 = 0.25;   // tau_d1
    double div_tax2 = 0.25;   // tau_d2
};

struct CapitalState {
    double k1t = 0, k1i = 0, k2t = 0, k2i = 0;

    double total() const { return k1t + k1i + k2t + k2i; }
    double tangible() const { return k1t + k2t; }
    double intangible() const { return k1i + k2i; }
};

inline double sector_output(double tfp, double omega, double k_tangible, double k_intangible,
                            double labor, const SectorParams& p) {
    if (!(tfp > 0 && omega > 0 && k_tangible > 0 && k_intangible > 0 && labor > 0))
        throw ValidationError("sector_output: inputs must be positive");
    return tfp * std::pow(k_tangible, p.theta_t) * std::pow(k_intangible, p.theta_i) *
           std::pow(omega * labor, p.labor_share());
}

inline double final_good(double y1, double y2, double eta1) {
    if (!(y1 > 0 && y2 > 0)) throw ValidationError("final_good: sector outputs must be positive");
    return std::pow(y1, eta1) * std::pow(y2, 1.0 - eta1);
}

// User costs of the four capital stocks at a given after-tax return.
struct UserCosts {
    double u1t, u1i, u2t, u2i;
};
inline UserCosts user_costs(const SectorTech& tech, const CapitalTaxes& tax, double i_k) {
    return {i_k / (1.0 - tax.corp_tax) + tech.s1.delta_t, i_k + tech.s1.delta_i,
            i_k + tech.s2.delta_t, i_k + tech.s2.delta_i};
}

// Closed-form composite output when capital demands satisfy the FOCs at
// return i_k: K_ix = theta_ix * eta_i * Y / u_ix, so log Y solves a linear
// equation.
inline double output_given_return(const SectorTech& tech, const CapitalTaxes& tax, double tfp_index,
                                  double omega, double l1, double l2, double i_k) {
    if (!(l1 > 0 && l2 > 0)) throw ValidationError("output_given_return: labor must be positive");
    UserCosts u = user_costs(tech, tax, i_k);
    if (!(u.u1t > 0 && u.u1i > 0 && u.u2t > 0 && u.u2i > 0))
        throw ValidationError("output_given_return: non-positive user cost");
    double chi = tech.capital_share();
    double numer = 0.0;
    const double labor[2] = {l1, l2};
    const double uc[2][2] = {{u.u1t, u.u1i}, {u.u2t, u.u2i}};
    for (int i = 0; i < 2; ++i) {
        const auto& s = tech.sector(i);
        double eta = tech.eta(i);
        numer += eta * (std::log(tech.sector_tfp(tfp_index, i)) +
                        s.theta_t * std::log(s.theta_t * eta / uc[i][0]) +
                        s.theta_i * std::log(s.theta_i * eta / uc[i][1]) +
                        s.labor_share() * std::log(omega * labor[i]));
    }
    return std::exp(numer / (1.0 - chi));
}

inline CapitalState capital_from_return(const SectorTech& tech, const CapitalTaxes& tax, double output,
                                        double i_k) {
    UserCosts u = user_costs(tech, tax, i_k);
    CapitalState k;
    k.k1t = tech.s1.theta_t * tech.eta1 * output / u.u1t;
    k.k1i = tech.s1.theta_i * tech.eta1 * output / u.u1i;
    k.k2t = tech.s2.theta_t * tech.eta2() * output / u.u2t;
    k.k2i = tech.s2.theta_i * tech.eta2() * output / u.u2i;
    return k;
}

// Market value of the capital claims households hold into next period:
// tangibles and sector-2 intangibles at basis, sector-1 intangibles at the
// expensed basis (1-tau_pi). Dividend taxes are levied on distributions and
// enter the household's equity return as a flow wedge, not the claim price.
inline double claims_value(const CapitalTaxes& tax, const CapitalState& k) {
    return k.k1t + (1.0 - tax.corp_tax) * k.k1i + k.k2t + k.k2i;
}

// Realized household return on the capital claims: after-dividend-tax
// payouts plus the ex-dividend value of next period's claims, per unit of
// value held. Equals the firm-side no-arbitrage return net of the
// dividend-tax wedge; exact for arbitrary paths.
inline double household_equity_return(const CapitalTaxes& tax, double claims_held,
                                      double d1, double d2_dist, double claims_next) {
    return ((1.0 - tax.div_tax1) * d1 + (1.0 - tax.div_tax2) * d2_dist + claims_next) /
               claims_held -
           1.0;
}

struct FactorPrices {
    double wage = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double i_k = 0.0;
    double return_spread = 0.0;  // max deviation across the four asset returns
};

// Prices from marginal products at a given allocation. The final good is
// the numeraire; i_k is read off sector 1 tangibles and the spread across
// the other three no-arbitrage returns is reported as a diagnostic.
inline FactorPrices factor_prices(const SectorTech& tech, const CapitalTaxes& tax, double tfp_index,
                                  double omega, const CapitalState& k, double l1, double l2) {
    double y1 = sector_output(tech.sector_tfp(tfp_index, 0), omega, k.k1t, k.k1i, l1, tech.s1);
    double y2 = sector_output(tech.sector_tfp(tfp_index, 1), omega, k.k2t, k.k2i, l2, tech.s2);
    double y = final_good(y1, y2, tech.eta1);
    FactorPrices f;
    f.p1 = tech.eta1 * y / y1;
    f.p2 = tech.eta2() * y / y2;
    double w1 = f.p1 * tech.s1.labor_share() * y1 / l1;
    double w2 = f.p2 * tech.s2.labor_share() * y2 / l2;
    f.wage = w1;
    f.i_k = (1.0 - tax.corp_tax) * (f.p1 * tech.s1.theta_t * y1 / k.k1t - tech.s1.delta_t);
    double r1i = f.p1 * tech.s1.theta_i * y1 / k.k1i - tech.s1.delta_i;
    double r2t = f.p2 * tech.s2.theta_t * y2 / k.k2t - tech.s2.delta_t;
    double r2i = f.p2 * tech.s2.theta_i * y2 / k.k2i - tech.s2.delta_i;
    f.return_spread = std::max({std::abs(r1i - f.i_k), std::abs(r2t - f.i_k), std::abs(r2i - f.i_k),
                                std::abs(w2 - w1) / std::max(w1, 1e-300)});
    return f;
}

struct Dividends {
    double profit1 = 0.0;  // accounting profit of sector 1
    double d1 = 0.0;       // sector 1 dividend
    double d2 = 0.0;       // sector 2 accounting dividend (= profit 2)
};

// Accounting profit and dividends. Intangible investment is expensed;
// sector 1 dividends are net of tangible net investment.
inline Dividends profits_dividends(const SectorTech& tech, const CapitalTaxes& tax, double p1,
                                   double y1, double p2, double y2, double wage, double l1, double l2,
                                   double x1i, double x2i, const CapitalState& k, double k1t_next) {
    Dividends d;
    d.profit1 = p1 * y1 - wage * l1 - x1i - tech.s1.delta_t * k.k1t;
    d.d1 = (1.0 - tax.corp_tax) * d.profit1 - (k1t_next - k.k1t);
    d.d2 = p2 * y2 - wage * l2 - x2i - tech.s2.delta_t * k.k2t;
    return d;
}

inline double capital_step(double capital, double depreciation, double investment) {
    if (capital < 0 || investment < 0) throw ValidationError("capital_step: negative input");
    return (1.0 - depreciation) * capital + investment;
}

inline double resource_residual(double consumption, double x_tangible, double x_intangible,
                                double gov, double output) {
    return output - consumption - x_tangible - x_intangible - gov;
}

// Intangible investment is excluded from GDP.
inline double gdp(double consumption, double x_tangible, double gov) {
    return consumption + x_tangible + gov;
}

}  // namespace olg
