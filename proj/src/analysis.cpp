#include "royalty/analysis.hpp"

#include "royalty/error.hpp"

#include <cmath>
#include <string>

namespace royalty {

double lockup_discount(double rate, double lockup) {
    if (!(rate > 0.0) || !(lockup > 0.0))
        throw Error(ErrKind::Domain, "rate and lockup must be positive");
    return -std::expm1(-rate * lockup);
}

FeasibilityVerdict collusion_feasible(const CollusionContract& contract) {
    const int n = contract.n_colluders;
    if (n < 1 || static_cast<int>(contract.bribes.size()) != n ||
        static_cast<int>(contract.collaterals.size()) != n)
        throw Error(ErrKind::Config, "contract needs one bribe and collateral per colluder");
    if (contract.fee_at_xp < 0.0 || contract.hodl < 0.0)
        throw Error(ErrKind::Config, "contract amounts cannot be negative");
    for (int i = 0; i < n; ++i)
        if (contract.bribes[i] < 0.0 || contract.collaterals[i] < 0.0)
            throw Error(ErrKind::Config, "contract amounts cannot be negative");

    double lambda = lockup_discount(contract.rate, contract.lockup);
    double total_bribe = 0.0;
    for (double b : contract.bribes)
        total_bribe += b;

    FeasibilityVerdict verdict;
    if (!(contract.fee_at_xp > total_bribe))
        verdict.violated.push_back("total bribe");
    for (int i = 0; i < n; ++i) {
        if (!(contract.bribes[i] > lambda * contract.collaterals[i]))
            verdict.violated.push_back("lower bribe[" + std::to_string(i) + "]");
        if (!(contract.collaterals[i] > contract.hodl + total_bribe))
            verdict.violated.push_back("lower collateral[" + std::to_string(i) + "]");
    }
    verdict.feasible = verdict.violated.empty();
    return verdict;
}

double collusion_tn_bound(double fee_at_xp, double hodl, double rate) {
    if (!(fee_at_xp > 0.0) || !(hodl > 0.0) || !(rate > 0.0))
        throw Error(ErrKind::Domain, "fee, hodl value, and rate must be positive");
    return fee_at_xp / (rate * hodl);
}

double collusion_exact_ratio(double fee_at_xp, double hodl, double rate, double lockup, int n) {
    if (!(fee_at_xp > 0.0) || !(hodl > 0.0) || n < 1)
        throw Error(ErrKind::Domain, "fee, hodl value, and colluder count must be positive");
    double lambda = lockup_discount(rate, lockup);
    return fee_at_xp / (lambda * n * hodl);
}

std::optional<SymmetricCollusion> find_feasible_collusion(double fee_at_xp, double hodl,
                                                          double rate, double lockup, int n) {
    if (!(fee_at_xp > 0.0) || !(hodl > 0.0) || n < 1)
        throw Error(ErrKind::Domain, "fee, hodl value, and colluder count must be positive");
    double lambda = lockup_discount(rate, lockup);

    // With beta_i = beta and kappa_i = kappa the three inequalities chain to
    // beta (1 - lambda n) > lambda v, so the collateral recursion diverges
    // at lambda n >= 1 and the bribe window is (lambda v / (1 - lambda n),
    // fee / n).
    if (lambda * n >= 1.0)
        return std::nullopt;
    double bribe_lo = lambda * hodl / (1.0 - lambda * n);
    double bribe_hi = fee_at_xp / n;
    if (!(bribe_lo < bribe_hi))
        return std::nullopt;

    SymmetricCollusion pick;
    pick.bribe = 0.5 * (bribe_lo + bribe_hi);
    double coll_lo = hodl + n * pick.bribe;
    double coll_hi = pick.bribe / lambda;
    if (!(coll_lo < coll_hi))
        return std::nullopt;
    pick.collateral = 0.5 * (coll_lo + coll_hi);
    return pick;
}

double fmv_lower_bound(double sale_price, const FeeSpec& fee, const PriceSpec& price) {
    return sale_price - fee.eval(price.invert(sale_price));
}

double arbitrage_profit(double sale_price, double disclosed_x, const FeeSpec& fee,
                        const PriceSpec& price) {
    return sale_price - price.eval(disclosed_x) - fee.eval(price.invert(sale_price));
}

double avoidance_cap(double sale_price, const FeeSpec& fee) {
    return fee.lipschitz() * fee.eval(sale_price);
}

BoundsReport compute_bounds(double sale_price, const FeeSpec& fee, const PriceSpec& price,
                            std::optional<double> disclosed_x) {
    BoundsReport report;
    report.fmv_lower = fmv_lower_bound(sale_price, fee, price);
    report.avoidance_cap = avoidance_cap(sale_price, fee);
    if (disclosed_x)
        report.arbitrage_profit = arbitrage_profit(sale_price, *disclosed_x, fee, price);
    return report;
}

} // namespace royalty
