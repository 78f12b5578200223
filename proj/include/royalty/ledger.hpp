#pragma once

#include "royalty/functions.hpp"
#include "royalty/money.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace royalty {

using Address = std::string;
using PlayerId = std::string;
using Tick = std::int64_t;

// A player acts through a private set of pseudonymous addresses. Valuations:
// fmv is the player's estimate of the current clearing price, hodl the
// self-assessed value of keeping the token long term.
struct PlayerSpec {
    PlayerId id;
    std::set<Address> addresses;
    Money fmv;
    Money hodl;
    Money balance;
};

// First-move turn length and auto-sale window length, in ticks.
struct MechanismParams {
    Tick d_turn = 10;
    Tick w_window = 100;
};

// Disclosure made during the current owner's tenure. escrow_held is true
// until the fee is either reimbursed by an auto-sale or forfeited to the
// creator (window expiry, or transfer during an open window).
struct TenureFee {
    double x = 0.0;
    Money fee;
    bool escrow_held = false;
};

struct Listing {
    Money price;
    Tick expires_at = 0;
};

struct TokenState {
    Address owner;
    std::set<Address> history; // H: non-fee-paying past owners, excl. owner
    std::optional<TenureFee> tenure_fee;
    std::optional<Listing> listing;
    std::optional<Tick> first_move_deadline;
    Money creator_royalties;
};

// One entry per tenure in the full ownership history; fee_paid is set
// retroactively when that owner discloses.
struct OwnerEpoch {
    Address owner;
    bool fee_paid = false;
};

enum class EventKind {
    Transfer,
    Disclose,
    Decline,
    TakeBack,
    AutoBuy,
    AutoSaleExpired,
    TurnExpired,
};

const char* to_string(EventKind kind);

struct TransferEv {
    Address from;
    Address to;
    Money cost;
    Tick deadline = 0;
    Money forfeited; // escrow sent to the creator if a window was open
};

struct DiscloseEv {
    Address owner;
    double x = 0.0;
    Money fee;
    Money price;
    Tick expires = 0;
};

struct DeclineEv {
    Address owner;
};

struct TakeBackEv {
    Address claimant;
    Address from;
    Tick deadline = 0;
};

struct AutoBuyEv {
    Address buyer;
    Address seller;
    Money payment;
    Money refund;
    Tick deadline = 0;
};

struct AutoSaleExpiredEv {
    Money royalty;
};

struct TurnExpiredEv {
    Address owner;
};

using EventBody = std::variant<TransferEv, DiscloseEv, DeclineEv, TakeBackEv, AutoBuyEv,
                               AutoSaleExpiredEv, TurnExpiredEv>;

EventKind kind_of(const EventBody& body);

struct Event {
    Tick time = 0;
    EventBody body;
    std::map<Address, Money> deltas; // per-address player balance changes
};

// Rebuilds H from an ownership history: the distinct addresses from the
// last fee-paying owner (inclusive) through the penultimate owner, minus
// the current owner; empty when the current owner paid this tenure.
std::set<Address> reconstruct_h(std::span<const OwnerEpoch> history);

// The mechanism state machine for a single token. Move methods validate
// their preconditions, throw Error on violation, and append to the event
// log on success. Times must be non-decreasing across moves.
class Ledger {
public:
    Ledger(std::vector<PlayerSpec> players, Address initial_owner, FeeSpec fee, PriceSpec price,
           MechanismParams params);

    const Event& transfer(const Address& from, const Address& to, Money cost, Tick now);
    const Event& disclose(double x, Tick now);
    const Event& decline(Tick now);
    const Event& take_back(const Address& claimant, Tick now);
    const Event& auto_buy(const Address& buyer, Money payment, Tick now);

    // Automatic moves. Return nullptr when there is nothing to expire.
    const Event* expire_listing(Tick now);
    const Event* expire_turn(Tick now);

    const TokenState& token() const { return token_; }
    const std::vector<Event>& events() const { return events_; }
    const std::vector<OwnerEpoch>& ownership_history() const { return history_; }
    const FeeSpec& fee() const { return fee_; }
    const PriceSpec& price() const { return price_; }
    const MechanismParams& params() const { return params_; }

    const PlayerSpec* player_of(const Address& addr) const;
    const PlayerSpec& player(const PlayerId& id) const;
    const std::map<PlayerId, PlayerSpec>& players() const { return players_; }
    Money escrow() const;

    // Sum of player balances + escrow + creator royalties; constant across
    // every move (transfer costs are zero-sum between two players).
    Money conserved_total() const;

private:
    PlayerSpec& player_for(const Address& addr, const char* role);
    Event& push(Tick now, EventBody body, std::map<Address, Money> deltas);
    void apply_deltas(const std::map<Address, Money>& deltas);

    std::map<PlayerId, PlayerSpec> players_;
    std::map<Address, PlayerId> address_index_;
    TokenState token_;
    std::vector<OwnerEpoch> history_;
    std::vector<Event> events_;
    FeeSpec fee_;
    PriceSpec price_;
    MechanismParams params_;
    Tick last_time_ = 0;
};

} // namespace royalty
