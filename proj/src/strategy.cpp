#include "royalty/strategy.hpp"

#include "royalty/error.hpp"

#include <algorithm>
#include <cmath>

namespace royalty {

const char* to_string(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::BestResponse: return "best-response";
    case StrategyKind::Underreport: return "underreport";
    case StrategyKind::Overreport: return "overreport";
    case StrategyKind::NeverDisclose: return "never-disclose";
    case StrategyKind::SelfTransferer: return "self-transferer";
    case StrategyKind::ArbitrageBot: return "arbitrage-bot";
    }
    return "unknown";
}

Strategy Strategy::best_response() {
    return {};
}

Strategy Strategy::underreport(double factor) {
    if (!(factor > 0.0 && factor < 1.0))
        throw Error(ErrKind::Config, "underreport factor must be in (0,1)");
    Strategy s;
    s.kind = StrategyKind::Underreport;
    s.factor = factor;
    return s;
}

Strategy Strategy::overreport(double factor) {
    if (!(factor > 1.0))
        throw Error(ErrKind::Config, "overreport factor must exceed 1");
    Strategy s;
    s.kind = StrategyKind::Overreport;
    s.factor = factor;
    return s;
}

Strategy Strategy::never_disclose() {
    Strategy s;
    s.kind = StrategyKind::NeverDisclose;
    return s;
}

Strategy Strategy::self_transferer() {
    Strategy s;
    s.kind = StrategyKind::SelfTransferer;
    return s;
}

Strategy Strategy::arbitrage_bot(Money floor) {
    if (floor < Money{})
        throw Error(ErrKind::Config, "arbitrage floor cannot be negative");
    Strategy s;
    s.kind = StrategyKind::ArbitrageBot;
    s.floor = floor;
    return s;
}

double utility_resell(const PriceSpec& price, double x, Money cost) {
    return price.eval(x) - cost.value();
}

double utility_keep(Money hodl, const FeeSpec& fee, double x, Money cost) {
    return hodl.value() - fee.eval(x) - cost.value();
}

double aggregate_utility(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                         double x, Money cost) {
    double p = price.eval(x);
    double m = fmv.value();
    if (p < m)
        return utility_resell(price, x, cost);
    if (p > m)
        return utility_keep(hodl, fee, x, cost);
    // The piecewise form leaves equality open; the supremum is attained
    // there, so take the better branch.
    return std::max(utility_resell(price, x, cost), utility_keep(hodl, fee, x, cost));
}

double supremum_utility(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                        Money cost) {
    double xp = price.invert(fmv.value());
    return std::max(fmv.value(), hodl.value() - fee.eval(xp)) - cost.value();
}

double best_response_disclosure(Money fmv, const PriceSpec& price, double epsilon) {
    if (!(epsilon > 0.0))
        throw Error(ErrKind::Domain, "epsilon must be positive");
    double xp = price.invert(fmv.value());
    double rounded = std::floor(xp * kMoneyScale + 0.5) / kMoneyScale;
    if (std::fabs(rounded - xp) <= epsilon && rounded > 0.0)
        return rounded;
    return xp;
}

bool should_take_back(const PlayerSpec& player, const TokenState& state) {
    if (state.tenure_fee)
        return false;
    for (const auto& addr : player.addresses)
        if (state.history.count(addr))
            return true;
    return false;
}

bool should_auto_buy(const PlayerSpec& player, Money listing_price) {
    return listing_price < player.fmv;
}

GridResult brute_force_best_x(Money fmv, Money hodl, const FeeSpec& fee, const PriceSpec& price,
                              Money cost, double grid_lo, double grid_hi, int steps) {
    if (steps < 1000)
        throw Error(ErrKind::Config, "grid needs at least 1000 points");
    if (!(grid_lo > 0.0) || !(grid_lo < grid_hi))
        throw Error(ErrKind::Config, "grid bounds must satisfy 0 < lo < hi");
    double m = fmv.value();
    if (!(price.eval(grid_lo) < m && m < price.eval(grid_hi)))
        throw Error(ErrKind::Config, "fmv outside the grid's price image");

    double h = (grid_hi - grid_lo) / (steps - 1);
    GridResult best{grid_lo, aggregate_utility(fmv, hodl, fee, price, grid_lo, cost)};
    for (int i = 1; i < steps; ++i) {
        double x = (i == steps - 1) ? grid_hi : grid_lo + i * h;
        double u = aggregate_utility(fmv, hodl, fee, price, x, cost);
        if (u > best.utility)
            best = {x, u};
    }
    return best;
}

} // namespace royalty
