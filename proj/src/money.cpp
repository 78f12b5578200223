#include "royalty/money.hpp"

#include "royalty/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace royalty {

Money Money::from_value(double value) {
    if (!std::isfinite(value))
        throw Error(ErrKind::Domain, "non-finite currency amount");
    double scaled = value * static_cast<double>(kMoneyScale);
    if (std::fabs(scaled) > 9.0e17)
        throw Error(ErrKind::Domain, "currency amount overflows minor units");
    return from_units(static_cast<std::int64_t>(std::floor(scaled + 0.5)));
}

Money Money::parse(const std::string& text) {
    const char* s = text.c_str();
    const char* p = s;
    bool negative = false;
    if (*p == '+' || *p == '-') {
        negative = (*p == '-');
        ++p;
    }
    if (!std::isdigit(static_cast<unsigned char>(*p)))
        throw Error(ErrKind::Parse, "invalid currency amount '" + text + "'");

    std::int64_t whole = 0;
    while (std::isdigit(static_cast<unsigned char>(*p))) {
        whole = whole * 10 + (*p - '0');
        if (whole > std::numeric_limits<std::int64_t>::max() / kMoneyScale)
            throw Error(ErrKind::Parse, "currency amount too large '" + text + "'");
        ++p;
    }

    std::int64_t frac = 0;
    if (*p == '.') {
        ++p;
        int digits = 0;
        while (std::isdigit(static_cast<unsigned char>(*p))) {
            if (++digits > kMoneyDecimals)
                throw Error(ErrKind::Parse,
                            "more than " + std::to_string(kMoneyDecimals) +
                                " decimal places in '" + text + "'");
            frac = frac * 10 + (*p - '0');
            ++p;
        }
        if (digits == 0)
            throw Error(ErrKind::Parse, "invalid currency amount '" + text + "'");
        while (digits++ < kMoneyDecimals)
            frac *= 10;
    }
    if (*p != '\0')
        throw Error(ErrKind::Parse, "trailing characters in currency amount '" + text + "'");

    std::int64_t units = whole * kMoneyScale + frac;
    return from_units(negative ? -units : units);
}

std::string Money::str() const {
    std::int64_t u = units_;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    std::string whole = std::to_string(u / kMoneyScale);
    std::string frac = std::to_string(u % kMoneyScale);
    while (static_cast<int>(frac.size()) < kMoneyDecimals)
        frac.insert(frac.begin(), '0');
    return sign + whole + "." + frac;
}

const char* to_string(ErrKind kind) {
    switch (kind) {
    case ErrKind::Domain: return "domain";
    case ErrKind::Range: return "range";
    case ErrKind::NotOwner: return "not-owner";
    case ErrKind::TurnExpired: return "turn-expired";
    case ErrKind::Funds: return "insufficient-funds";
    case ErrKind::NotEntitled: return "not-entitled";
    case ErrKind::NoListing: return "no-listing";
    case ErrKind::PriceMismatch: return "price-mismatch";
    case ErrKind::Config: return "config";
    case ErrKind::Parse: return "parse";
    case ErrKind::ReplayMismatch: return "replay-mismatch";
    }
    return "unknown";
}

} // namespace royalty
