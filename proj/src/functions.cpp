#include "royalty/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace royalty {

namespace {

void validate_table(const std::vector<TablePoint>& pts, const char* what) {
    if (pts.size() < 2)
        throw Error(ErrKind::Config, std::string(what) + " table needs at least two points");
    for (size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].x > 0.0) || !(pts[i].y > 0.0))
            throw Error(ErrKind::Config,
                        std::string(what) + " table samples must be strictly positive");
        if (i > 0 && !(pts[i].x > pts[i - 1].x && pts[i].y > pts[i - 1].y))
            throw Error(ErrKind::Config,
                        std::string(what) + " table must be strictly increasing");
    }
}

double table_eval(const std::vector<TablePoint>& pts, double x, const char* what) {
    if (x < pts.front().x || x > pts.back().x)
        throw Error(ErrKind::Range, std::string(what) + " argument " + std::to_string(x) +
                                         " outside table range");
    auto it = std::lower_bound(pts.begin(), pts.end(), x,
                               [](const TablePoint& p, double v) { return p.x < v; });
    if (it == pts.begin())
        return it->y;
    const TablePoint& hi = *it;
    const TablePoint& lo = *(it - 1);
    double t = (x - lo.x) / (hi.x - lo.x);
    return lo.y + t * (hi.y - lo.y);
}

double max_adjacent_slope(const std::vector<TablePoint>& pts) {
    double worst = 0.0;
    for (size_t i = 1; i < pts.size(); ++i)
        worst = std::max(worst, (pts[i].y - pts[i - 1].y) / (pts[i].x - pts[i - 1].x));
    return worst;
}

} // namespace

FeeSpec FeeSpec::linear(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw Error(ErrKind::Config, "linear fee requires rho in (0,1)");
    FeeSpec spec;
    spec.kind_ = FeeKind::Linear;
    spec.rho_ = rho;
    spec.declared_lipschitz_ = rho;
    return spec;
}

FeeSpec FeeSpec::table(std::vector<TablePoint> points, std::optional<double> declared_lipschitz) {
    validate_table(points, "fee");
    double empirical = max_adjacent_slope(points);
    double declared = declared_lipschitz.value_or(empirical);
    if (!(declared < 1.0))
        throw Error(ErrKind::Config, "fee Lipschitz constant must be below 1");
    if (empirical > declared)
        throw Error(ErrKind::Config, "fee table slope exceeds declared Lipschitz constant");
    FeeSpec spec;
    spec.kind_ = FeeKind::MonotoneTable;
    spec.declared_lipschitz_ = declared;
    spec.points_ = std::move(points);
    return spec;
}

double FeeSpec::eval(double x) const {
    if (!(x > 0.0))
        throw Error(ErrKind::Domain, "fee argument must be positive");
    if (kind_ == FeeKind::Linear)
        return rho_ * x;
    return table_eval(points_, x, "fee");
}

double FeeSpec::rho() const {
    if (kind_ != FeeKind::Linear)
        throw Error(ErrKind::Config, "rho is defined for linear fee specs only");
    return rho_;
}

std::pair<double, double> FeeSpec::domain() const {
    if (kind_ == FeeKind::Linear)
        return {0.0, std::numeric_limits<double>::infinity()};
    return {points_.front().x, points_.back().x};
}

PriceSpec PriceSpec::identity() {
    return PriceSpec{};
}

PriceSpec PriceSpec::linear(double scale) {
    if (!(scale > 0.0))
        throw Error(ErrKind::Config, "linear price requires a positive scale");
    PriceSpec spec;
    spec.kind_ = PriceKind::Linear;
    spec.scale_ = scale;
    return spec;
}

PriceSpec PriceSpec::table(std::vector<TablePoint> points) {
    validate_table(points, "price");
    PriceSpec spec;
    spec.kind_ = PriceKind::MonotoneTable;
    spec.points_ = std::move(points);
    return spec;
}

double PriceSpec::eval(double x) const {
    if (!(x > 0.0))
        throw Error(ErrKind::Domain, "price argument must be positive");
    switch (kind_) {
    case PriceKind::Identity: return x;
    case PriceKind::Linear: return scale_ * x;
    case PriceKind::MonotoneTable: return table_eval(points_, x, "price");
    }
    return x;
}

double PriceSpec::invert(double m) const {
    switch (kind_) {
    case PriceKind::Identity:
        if (!(m > 0.0))
            throw Error(ErrKind::Range, "price image is positive reals");
        return m;
    case PriceKind::Linear:
        if (!(m > 0.0))
            throw Error(ErrKind::Range, "price image is positive reals");
        return m / scale_;
    case PriceKind::MonotoneTable:
        break;
    }

    if (m < points_.front().y || m > points_.back().y)
        throw Error(ErrKind::Range, "value " + std::to_string(m) + " outside price image");

    double lo = points_.front().x;
    double hi = points_.back().x;
    double mid = lo;
    for (int iter = 0; iter < kInvertMaxIter; ++iter) {
        mid = 0.5 * (lo + hi);
        double y = table_eval(points_, mid, "price");
        // tight in both directions: the forward residual and the bracket
        if (std::fabs(y - m) <= kInvertTol && hi - lo <= kInvertTol)
            return mid;
        if (y < m)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

double PriceSpec::scale() const {
    if (kind_ != PriceKind::Linear)
        throw Error(ErrKind::Config, "scale is defined for linear price specs only");
    return scale_;
}

std::pair<double, double> PriceSpec::domain() const {
    if (kind_ == PriceKind::MonotoneTable)
        return {points_.front().x, points_.back().x};
    return {0.0, std::numeric_limits<double>::infinity()};
}

std::pair<double, double> PriceSpec::image() const {
    switch (kind_) {
    case PriceKind::Identity:
    case PriceKind::Linear:
        return {0.0, std::numeric_limits<double>::infinity()};
    case PriceKind::MonotoneTable:
        return {points_.front().y, points_.back().y};
    }
    return {0.0, std::numeric_limits<double>::infinity()};
}

double lipschitz_estimate(const FeeSpec& spec, std::span<const double> grid) {
    if (grid.size() < 2)
        throw Error(ErrKind::Domain, "lipschitz estimate needs at least two grid points");
    auto [dom_lo, dom_hi] = spec.domain();
    bool bounded = spec.kind() == FeeKind::MonotoneTable; // table endpoints are inclusive
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (bounded && (grid[i] < dom_lo || grid[i] > dom_hi)))
            throw Error(ErrKind::Domain, "grid point outside fee domain");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error(ErrKind::Domain, "grid must be strictly increasing");
    }
    if (spec.kind() == FeeKind::Linear)
        return spec.rho();
    double worst = 0.0;
    for (size_t i = 1; i < grid.size(); ++i) {
        double slope = (spec.eval(grid[i]) - spec.eval(grid[i - 1])) / (grid[i] - grid[i - 1]);
        worst = std::max(worst, slope);
    }
    return worst;
}

} // namespace royalty
