#pragma once

#include <stdexcept>
#include <string>

namespace royalty {

// Failure categories raised by the library. The CLI maps Parse/Config to
// usage errors (exit 2); everything else is reported in context.
enum class ErrKind {
    Domain,         // argument outside a function's mathematical domain
    Range,          // value outside a table's covered range / image
    NotOwner,       // transfer attempted by a non-owner
    TurnExpired,    // disclosure after the first-move turn lapsed
    Funds,          // player balance cannot cover a required payment
    NotEntitled,    // take-back by an address outside H
    NoListing,      // auto-buy with no active listing (or expired)
    PriceMismatch,  // auto-buy payment differs from the listed price
    Config,         // invalid configuration or precondition violation
    Parse,          // malformed input file
    ReplayMismatch, // replayed log diverged from the recorded one
};

const char* to_string(ErrKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrKind kind() const noexcept { return kind_; }

private:
    ErrKind kind_;
};

} // namespace royalty
