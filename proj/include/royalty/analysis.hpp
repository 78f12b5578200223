#pragma once

#include "royalty/functions.hpp"
#include "royalty/money.hpp"

#include <optional>
#include <string>
#include <vector>

namespace royalty {

// A side-band agreement: the current owner bribes every H-member player to
// waive their take-back, each backing the promise with collateral locked
// for `lockup` years while money earns `rate` (continuously compounded).
struct CollusionContract {
    int n_colluders = 0;
    std::vector<double> bribes;      // beta_i
    std::vector<double> collaterals; // kappa_i
    double lockup = 0.0;             // T, years
    double rate = 0.0;               // R, per year
    double hodl = 0.0;               // v
    double fee_at_xp = 0.0;          // phi(x) at the truthful disclosure
};

struct FeasibilityVerdict {
    bool feasible = false;
    std::vector<std::string> violated; // named inequalities, e.g. "lower bribe[2]"
};

struct SymmetricCollusion {
    double bribe = 0.0;
    double collateral = 0.0;
};

// Opportunity-cost discount on locked collateral: 1 - e^{-R T}.
double lockup_discount(double rate, double lockup);

// Checks the three strict feasibility inequalities: the total bribe is
// below the avoided fee, each bribe beats the forgone return on the
// collateral difference, and each collateral covers the owner's loss.
FeasibilityVerdict collusion_feasible(const CollusionContract& contract);

// Approximate bound on colluder-years, valid for R T << 1:
// T N < fee / (R v).
double collusion_tn_bound(double fee_at_xp, double hodl, double rate);

// Exact necessary-condition ratio fee / (lambda N v); collusion requires
// this to exceed 1.
double collusion_exact_ratio(double fee_at_xp, double hodl, double rate, double lockup, int n);

// Constructive search for a symmetric contract. A symmetric assignment
// exists iff lambda N < 1 and N lambda v / (1 - lambda N) < fee; the
// witness is chosen strictly inside all three inequalities.
std::optional<SymmetricCollusion> find_feasible_collusion(double fee_at_xp, double hodl,
                                                          double rate, double lockup, int n);

// Floor on the buyer's fair-market estimate after a sale at price c:
// c - phi(pi^{-1}(c)). Below it, the seller buys back at a profit.
double fmv_lower_bound(double sale_price, const FeeSpec& fee, const PriceSpec& price);

// Seller's gain from buying back at pi(x) and re-protecting at the honest
// disclosure: c - pi(x) - phi(pi^{-1}(c)). Positive means exploitable.
double arbitrage_profit(double sale_price, double disclosed_x, const FeeSpec& fee,
                        const PriceSpec& price);

// Cap on achievable fee avoidance: L_phi * phi(c); rho^2 c for linear fees.
double avoidance_cap(double sale_price, const FeeSpec& fee);

struct BoundsReport {
    double fmv_lower = 0.0;
    double avoidance_cap = 0.0;
    std::optional<double> arbitrage_profit;
};

BoundsReport compute_bounds(double sale_price, const FeeSpec& fee, const PriceSpec& price,
                            std::optional<double> disclosed_x = std::nullopt);

} // namespace royalty
