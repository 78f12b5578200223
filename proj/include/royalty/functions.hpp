#pragma once

#include "royalty/error.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace royalty {

// Numerical inversion: forward-check residual and bisection cap.
inline constexpr double kInvertTol = 1e-9;
inline constexpr int kInvertMaxIter = 200;

// One sample of a piecewise-linear monotone table.
struct TablePoint {
    double x;
    double y;
};

enum class FeeKind { Linear, MonotoneTable };
enum class PriceKind { Identity, Linear, MonotoneTable };

// Token-specific royalty schedule phi. Strictly positive and strictly
// increasing on x > 0, with every inter-sample slope bounded by a declared
// Lipschitz constant below 1. Table specs interpolate linearly between
// samples and reject arguments outside the sampled range.
//
// Immutable after construction; safe to share across threads.
class FeeSpec {
public:
    static FeeSpec linear(double rho);
    static FeeSpec table(std::vector<TablePoint> points,
                         std::optional<double> declared_lipschitz = std::nullopt);

    double eval(double x) const;

    FeeKind kind() const { return kind_; }
    double lipschitz() const { return declared_lipschitz_; }
    double rho() const;
    const std::vector<TablePoint>& points() const { return points_; }

    // Covered x-range: (0, inf) for linear, [x_front, x_back] for tables.
    std::pair<double, double> domain() const;

private:
    FeeSpec() = default;

    FeeKind kind_ = FeeKind::Linear;
    double rho_ = 0.0;
    double declared_lipschitz_ = 0.0;
    std::vector<TablePoint> points_;
};

// Token-specific auto-sale price schedule pi. Strictly positive and strictly
// increasing on x > 0; invertible over its image. Identity and linear specs
// invert algebraically, tables by bisection then a final forward check.
class PriceSpec {
public:
    static PriceSpec identity();
    static PriceSpec linear(double scale);
    static PriceSpec table(std::vector<TablePoint> points);

    double eval(double x) const;

    // Returns x with |eval(x) - m| <= kInvertTol. Throws Error(Range) when
    // m lies outside the image of the spec over its domain.
    double invert(double m) const;

    PriceKind kind() const { return kind_; }
    double scale() const;
    const std::vector<TablePoint>& points() const { return points_; }
    std::pair<double, double> domain() const;
    std::pair<double, double> image() const;

private:
    PriceSpec() = default;

    PriceKind kind_ = PriceKind::Identity;
    double scale_ = 1.0;
    std::vector<TablePoint> points_;
};

// Max empirical slope of phi over adjacent grid pairs. Linear specs report
// rho, which is the slope everywhere. The grid must hold at least two
// strictly increasing points inside the spec's domain.
double lipschitz_estimate(const FeeSpec& spec, std::span<const double> grid);

} // namespace royalty
