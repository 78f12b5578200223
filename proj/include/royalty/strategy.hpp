#pragma once

#include "royalty/functions.hpp"
#include "royalty/ledger.hpp"
#include "royalty/money.hpp"

namespace royalty {

// Agent decision rules available in scenarios. Deviation kinds scale the
// truthful disclosure by a factor; the arbitrage bot buys any listing
// priced below its configured floor.
enum class StrategyKind {
    BestResponse,
    Underreport,
    Overreport,
    NeverDisclose,
    SelfTransferer,
    ArbitrageBot,
};

const char* to_string(StrategyKind kind);

struct Strategy {
    StrategyKind kind = StrategyKind::BestResponse;
    double factor = 1.0; // under/over-report multiplier on the truthful x
    Money floor;         // arbitrage-bot buy threshold

    static Strategy best_response();
    static Strategy underreport(double factor); // requires 0 < factor < 1
    static Strategy overreport(double factor);  // requires factor > 1
    static Strategy never_disclose();
    static Strategy self_transferer();
    static Strategy arbitrage_bot(Money floor); // requires floor >= 0
};

// Utility of disclosing x and reselling in the window: pi(x) - c.
double utility_resell(const PriceSpec& price, double x, Money cost);

// Utility of disclosing x and keeping the token: v - phi(x) - c.
double utility_keep(Money hodl, const FeeSpec& fee, double x, Money cost);

// Piecewise utility: the resell branch below pi(x) = m, the keep branch
// above it, and the larger branch at exact equality.
double aggregate_utility(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                         double x, Money cost);

// Closed form of the utility supremum: max(m, v - phi(pi^{-1}(m))) - c.
double supremum_utility(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                        Money cost);

// Truthful disclosure pi^{-1}(m), rounded to a minor currency unit when the
// rounding stays within epsilon (it always does at the default epsilon).
double best_response_disclosure(Money fmv, const PriceSpec& price, double epsilon = 0.01);

// A controlled address sits in H and the owner's tenure has no disclosure,
// so reclaiming is free and gains max(m, v) >= 0.
bool should_take_back(const PlayerSpec& player, const TokenState& state);

// Strict gain only: buy below the player's fair-market estimate.
bool should_auto_buy(const PlayerSpec& player, Money listing_price);

struct GridResult {
    double x = 0.0;
    double utility = 0.0;
};

// Independent verification oracle: argmax of aggregate_utility over an
// inclusive grid of `steps` points. The first maximum encountered wins
// ties. The grid must bracket pi^{-1}(m) and have at least 1000 points.
GridResult brute_force_best_x(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                              Money cost, double grid_lo, double grid_hi, int steps);

} // namespace royalty
