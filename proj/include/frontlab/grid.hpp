#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace frontlab {

struct Domain {
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::size_t n = 0;

    Domain() = default;
    Domain(double lo, double hi, std::size_t cells) : x_lo(lo), x_hi(hi), n(cells) {
        if (!(x_lo < x_hi)) throw std::invalid_argument("Domain: require x_lo < x_hi");
        if (n < 16) throw std::invalid_argument("Domain: require n >= 16");
    }

    double dx() const { return (x_hi - x_lo) / static_cast<double>(n); }
    double x(std::size_t i) const { return x_lo + (static_cast<double>(i) + 0.5) * dx(); }

    bool operator==(const Domain&) const = default;
};

// Solution u on a 1-D grid at one time stamp. Values live at cell centers.
struct ScalarField {
    Domain domain;
    std::vector<double> values;
    double time = 0.0;

    ScalarField() = default;
    ScalarField(const Domain& d, double fill = 0.0, double t = 0.0)
        : domain(d), values(d.n, fill), time(t) {}

    double max_value() const {
        double m = 0.0;
        for (double v : values)
            if (v > m) m = v;
        return m;
    }

    // Linear interpolation between cell centers; clamps outside the grid.
    double interpolate(double x) const {
        const double dx = domain.dx();
        const double s = (x - domain.x(0)) / dx;
        if (s <= 0.0) return values.front();
        const double smax = static_cast<double>(domain.n - 1);
        if (s >= smax) return values.back();
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }

    void check_finite() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]))
                throw std::runtime_error("ScalarField: non-finite value at x=" +
                                         std::to_string(domain.x(i)) + ", t=" + std::to_string(time));
        }
    }
};

} // namespace frontlab
