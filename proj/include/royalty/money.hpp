#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace royalty {

// Currency amounts are integer minor units at a fixed scale of two decimal
// places. Function evaluation happens in doubles; anything that enters the
// ledger is rounded to minor units, half up. Conservation checks compare
// integer units, never doubles.
inline constexpr int kMoneyDecimals = 2;
inline constexpr std::int64_t kMoneyScale = 100; // 10^kMoneyDecimals

class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_units(std::int64_t units) {
        Money m;
        m.units_ = units;
        return m;
    }

    // Rounds half up (toward +inf), e.g. 0.005 -> 0.01, -0.005 -> 0.00.
    static Money from_value(double value);

    // Exact decimal-string parse: optional sign, digits, at most
    // kMoneyDecimals fraction digits. Throws Error(Parse) otherwise.
    static Money parse(const std::string& text);

    constexpr std::int64_t units() const { return units_; }
    double value() const { return static_cast<double>(units_) / kMoneyScale; }
    std::string str() const;

    static constexpr Money minor_unit() { return from_units(1); }
    constexpr bool is_zero() const { return units_ == 0; }

    constexpr Money operator+(Money o) const { return from_units(units_ + o.units_); }
    constexpr Money operator-(Money o) const { return from_units(units_ - o.units_); }
    constexpr Money operator-() const { return from_units(-units_); }
    constexpr Money& operator+=(Money o) { units_ += o.units_; return *this; }
    constexpr Money& operator-=(Money o) { units_ -= o.units_; return *this; }

    constexpr auto operator<=>(const Money&) const = default;

private:
    std::int64_t units_ = 0;
};

} // namespace royalty
