#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include "frontlab/grid.hpp"
#include "frontlab/kernels.hpp"

#include <cmath>
#include <vector>

namespace frontlab::testing {

// Direct O(n*m) convolution with the solver's extension policy: left edge
// value on the left, zero on the right.
inline std::vector<double> naive_convolve(const SampledKernel& kernel,
                                          const std::vector<double>& u) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    const auto m = static_cast<std::ptrdiff_t>(kernel.half_width_cells);
    std::vector<double> out(u.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -m; k <= m; ++k) {
            const std::ptrdiff_t j = i - k;
            double v;
            if (j < 0) v = u.front();
            else if (j >= n) v = 0.0;
            else v = u[static_cast<std::size_t>(j)];
            acc += kernel.at_offset(k) * v;
        }
        out[static_cast<std::size_t>(i)] = acc * kernel.dx;
    }
    return out;
}

// Logistic closed form: solution of y' = y(1-y), y(0) = c.
inline double logistic(double c, double t) {
    const double e = std::exp(t);
    return c * e / (1.0 + c * (e - 1.0));
}

// P(Z > x) by Taylor series (x < 3) or Lentz continued fraction (x >= 3);
// independent of std::erfc.
inline double normal_tail_oracle(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (x < 3.0) {
        // 0.5 - phi * sum x^(2n+1) * prod(1/(2k+1))
        double term = x, sum = x;
        for (int n = 1; n < 200; ++n) {
            term *= x * x / (2.0 * n + 1.0);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return 0.5 - phi * sum;
    }
    // continued fraction: Q(x) = phi / (x + 1/(x + 2/(x + 3/(x + ...))))
    double f = x;
    for (int k = 60; k >= 1; --k) f = x + static_cast<double>(k) / f;
    return phi / f;
}

// Direct scalar-loop sampling of the analytic kernel density (oracle for
// build_kernel's normalization).
inline double sampled_mass_oracle(const KernelSpec& spec, double dx, std::ptrdiff_t n_cells) {
    double sum = 0.0;
    for (std::ptrdiff_t i = -n_cells; i <= n_cells; ++i)
        sum += kernel_density(spec, static_cast<double>(i) * dx);
    return sum * dx;
}

} // namespace frontlab::testing
