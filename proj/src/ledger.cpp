#include "royalty/ledger.hpp"

#include "royalty/error.hpp"

#include <cassert>
#include <utility>

namespace royalty {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::Transfer: return "Transfer";
    case EventKind::Disclose: return "Disclose";
    case EventKind::Decline: return "Decline";
    case EventKind::TakeBack: return "TakeBack";
    case EventKind::AutoBuy: return "AutoBuy";
    case EventKind::AutoSaleExpired: return "AutoSaleExpired";
    case EventKind::TurnExpired: return "TurnExpired";
    }
    return "unknown";
}

EventKind kind_of(const EventBody& body) {
    return std::visit(
        [](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, TransferEv>) return EventKind::Transfer;
            else if constexpr (std::is_same_v<T, DiscloseEv>) return EventKind::Disclose;
            else if constexpr (std::is_same_v<T, DeclineEv>) return EventKind::Decline;
            else if constexpr (std::is_same_v<T, TakeBackEv>) return EventKind::TakeBack;
            else if constexpr (std::is_same_v<T, AutoBuyEv>) return EventKind::AutoBuy;
            else if constexpr (std::is_same_v<T, AutoSaleExpiredEv>) return EventKind::AutoSaleExpired;
            else return EventKind::TurnExpired;
        },
        body);
}

std::set<Address> reconstruct_h(std::span<const OwnerEpoch> history) {
    std::set<Address> h;
    if (history.empty())
        return h;
    if (history.back().fee_paid)
        return h; // current owner disclosed this tenure
    // Walk back to the most recent fee payer (inclusive) or to creation.
    size_t start = 0;
    for (size_t i = history.size() - 1; i-- > 0;) {
        if (history[i].fee_paid) {
            start = i;
            break;
        }
    }
    for (size_t i = start; i + 1 < history.size(); ++i)
        h.insert(history[i].owner);
    h.erase(history.back().owner);
    return h;
}

Ledger::Ledger(std::vector<PlayerSpec> players, Address initial_owner, FeeSpec fee,
               PriceSpec price, MechanismParams params)
    : fee_(std::move(fee)), price_(std::move(price)), params_(params) {
    if (params_.d_turn < 1 || params_.w_window < 1)
        throw Error(ErrKind::Config, "turn and window lengths must be at least one tick");
    for (auto& p : players) {
        if (p.addresses.empty())
            throw Error(ErrKind::Config, "player '" + p.id + "' has no addresses");
        if (p.fmv < Money{} || p.hodl < Money{})
            throw Error(ErrKind::Config, "player '" + p.id + "' has negative valuation");
        if (players_.count(p.id))
            throw Error(ErrKind::Config, "duplicate player id '" + p.id + "'");
        for (const auto& a : p.addresses) {
            auto [it, fresh] = address_index_.emplace(a, p.id);
            if (!fresh)
                throw Error(ErrKind::Config, "disjoint address sets violated: address '" + a +
                                                 "' appears under '" + it->second + "' and '" +
                                                 p.id + "'");
        }
        players_.emplace(p.id, std::move(p));
    }
    if (!address_index_.count(initial_owner))
        throw Error(ErrKind::Config,
                    "initial owner '" + initial_owner + "' is not a player address");
    token_.owner = initial_owner;
    history_.push_back({initial_owner, false});
}

const PlayerSpec* Ledger::player_of(const Address& addr) const {
    auto it = address_index_.find(addr);
    if (it == address_index_.end())
        return nullptr;
    return &players_.at(it->second);
}

const PlayerSpec& Ledger::player(const PlayerId& id) const {
    auto it = players_.find(id);
    if (it == players_.end())
        throw Error(ErrKind::Config, "unknown player '" + id + "'");
    return it->second;
}

PlayerSpec& Ledger::player_for(const Address& addr, const char* role) {
    auto it = address_index_.find(addr);
    if (it == address_index_.end())
        throw Error(ErrKind::Config,
                    std::string(role) + " address '" + addr + "' is not registered");
    return players_.at(it->second);
}

Money Ledger::escrow() const {
    if (token_.tenure_fee && token_.tenure_fee->escrow_held)
        return token_.tenure_fee->fee;
    return Money{};
}

Money Ledger::conserved_total() const {
    Money total = escrow() + token_.creator_royalties;
    for (const auto& [id, p] : players_)
        total += p.balance;
    return total;
}

Event& Ledger::push(Tick now, EventBody body, std::map<Address, Money> deltas) {
    if (now < last_time_)
        throw Error(ErrKind::Config, "event time went backwards");
    last_time_ = now;
    apply_deltas(deltas);
    events_.push_back({now, std::move(body), std::move(deltas)});
    assert(!token_.history.count(token_.owner));
    assert(!token_.listing || token_.tenure_fee);
    assert(!token_.tenure_fee || token_.history.empty());
    return events_.back();
}

void Ledger::apply_deltas(const std::map<Address, Money>& deltas) {
    for (const auto& [addr, delta] : deltas)
        player_for(addr, "delta").balance += delta;
}

const Event& Ledger::transfer(const Address& from, const Address& to, Money cost, Tick now) {
    if (from != token_.owner)
        throw Error(ErrKind::NotOwner, "'" + from + "' does not own the token");
    if (to == from)
        throw Error(ErrKind::Config, "transfer requires a different receiving address");
    if (cost < Money{})
        throw Error(ErrKind::Config, "transfer cost cannot be negative");
    player_for(to, "receiving"); // must be registered

    // Copy the addresses before mutating: callers may pass references into
    // token state (e.g. token().owner), which the updates below invalidate.
    TransferEv ev;
    ev.from = from;
    ev.to = to;
    ev.cost = cost;
    ev.deadline = now + params_.d_turn;

    // A fee escrowed for a still-open window is forfeited to the creator:
    // only an auto-sale reimburses it.
    if (token_.tenure_fee && token_.tenure_fee->escrow_held) {
        ev.forfeited = token_.tenure_fee->fee;
        token_.creator_royalties += ev.forfeited;
        token_.tenure_fee->escrow_held = false;
    }

    token_.history.insert(ev.from);
    token_.history.erase(ev.to);
    token_.owner = ev.to;
    token_.tenure_fee.reset();
    token_.listing.reset();
    token_.first_move_deadline = ev.deadline;
    history_.push_back({ev.to, false});

    std::map<Address, Money> deltas;
    if (!cost.is_zero()) {
        deltas[ev.from] += cost;
        deltas[ev.to] -= cost;
    }
    return push(now, ev, std::move(deltas));
}

const Event& Ledger::disclose(double x, Tick now) {
    if (!token_.first_move_deadline)
        throw Error(ErrKind::TurnExpired, "no pending first-move turn");
    if (now > *token_.first_move_deadline)
        throw Error(ErrKind::TurnExpired, "first-move turn expired");

    Money fee_amount = Money::from_value(fee_.eval(x));
    Money list_price = Money::from_value(price_.eval(x));
    PlayerSpec& owner = player_for(token_.owner, "owner");
    if (owner.balance < fee_amount)
        throw Error(ErrKind::Funds, "owner balance cannot cover the fee");

    DiscloseEv ev;
    ev.owner = token_.owner;
    ev.x = x;
    ev.fee = fee_amount;
    ev.price = list_price;
    ev.expires = now + params_.w_window;

    token_.tenure_fee = TenureFee{x, fee_amount, true};
    token_.listing = Listing{list_price, ev.expires};
    token_.first_move_deadline.reset();
    token_.history.clear();
    history_.back().fee_paid = true;

    std::map<Address, Money> deltas;
    if (!fee_amount.is_zero())
        deltas[token_.owner] -= fee_amount;
    return push(now, ev, std::move(deltas));
}

const Event& Ledger::decline(Tick now) {
    if (token_.tenure_fee)
        throw Error(ErrKind::Config, "tenure already disclosed; nothing to decline");
    DeclineEv ev;
    ev.owner = token_.owner;
    token_.first_move_deadline.reset();
    return push(now, ev, {});
}

const Event& Ledger::take_back(const Address& claimant, Tick now) {
    if (!token_.history.count(claimant))
        throw Error(ErrKind::NotEntitled, "'" + claimant + "' is not in H");
    assert(!token_.tenure_fee && !token_.listing);

    // Copy first: `claimant` may reference the H node erased below.
    TakeBackEv ev;
    ev.claimant = claimant;
    ev.from = token_.owner;
    ev.deadline = now + params_.d_turn;

    token_.history.insert(ev.from);
    token_.history.erase(ev.claimant);
    token_.owner = ev.claimant;
    token_.first_move_deadline = ev.deadline;
    history_.push_back({ev.claimant, false});

    return push(now, ev, {});
}

const Event& Ledger::auto_buy(const Address& buyer, Money payment, Tick now) {
    if (!token_.listing)
        throw Error(ErrKind::NoListing, "no active auto-sale listing");
    if (now >= token_.listing->expires_at)
        throw Error(ErrKind::NoListing, "auto-sale listing expired");
    if (payment != token_.listing->price)
        throw Error(ErrKind::PriceMismatch, "payment must equal the listed price exactly");
    if (buyer == token_.owner)
        throw Error(ErrKind::Config, "owner cannot auto-buy their own listing");
    PlayerSpec& buying = player_for(buyer, "buyer");
    if (buying.balance < payment)
        throw Error(ErrKind::Funds, "buyer balance cannot cover the listed price");

    AutoBuyEv ev;
    ev.buyer = buyer;
    ev.seller = token_.owner;
    ev.payment = payment;
    ev.refund = token_.tenure_fee->fee;
    ev.deadline = now + params_.d_turn;

    // The sale reimburses the seller's fee; the seller stays on record as
    // the last fee payer, so the new H is exactly {seller}.
    token_.history = {ev.seller};
    token_.owner = ev.buyer;
    token_.tenure_fee.reset();
    token_.listing.reset();
    token_.first_move_deadline = ev.deadline;
    history_.push_back({ev.buyer, false});

    std::map<Address, Money> deltas;
    deltas[ev.buyer] -= payment;
    deltas[ev.seller] += payment + ev.refund;
    if (deltas[ev.seller].is_zero())
        deltas.erase(ev.seller);
    if (deltas[ev.buyer].is_zero())
        deltas.erase(ev.buyer);
    return push(now, ev, std::move(deltas));
}

const Event* Ledger::expire_listing(Tick now) {
    if (!token_.listing || now < token_.listing->expires_at)
        return nullptr;
    AutoSaleExpiredEv ev;
    ev.royalty = token_.tenure_fee->fee;
    token_.creator_royalties += ev.royalty;
    token_.tenure_fee->escrow_held = false;
    token_.listing.reset();
    return &push(now, ev, {});
}

const Event* Ledger::expire_turn(Tick now) {
    if (!token_.first_move_deadline || now <= *token_.first_move_deadline)
        return nullptr;
    TurnExpiredEv ev;
    ev.owner = token_.owner;
    token_.first_move_deadline.reset();
    return &push(now, ev, {});
}

} // namespace royalty
