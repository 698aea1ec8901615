#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace frontlab {

// Interaction kernels. All variants are symmetric, non-negative and carry
// unit mass; each keeps a flat core so the positivity-on-a-core condition
// (phi >= eta on (-sigma, sigma)) holds with explicit constants.

struct UniformKernel {
    double half_width = 0.5; // support [-half_width, half_width], density 1/(2 half_width)
};

// Flat core of half-width `core_halfwidth`, algebraic tail |x|^-(1+alpha)
// beyond it, continuous at the junction. One-sided tail mass has the closed
// form tail_coefficient() * r^-alpha for r >= core_halfwidth.
struct PowerTailKernel {
    double alpha = 1.0;
    double core_halfwidth = 1.0;
};

struct TruncGaussianKernel {
    double scale = 1.0;  // gaussian scale parameter
    double cutoff = 4.0; // support [-cutoff, cutoff]
};

using KernelSpec = std::variant<UniformKernel, PowerTailKernel, TruncGaussianKernel>;

// Analytic density phi(x).
double kernel_density(const KernelSpec& spec, double x);

// Half-width of the flat/high core (sigma in the positivity condition).
double kernel_core_halfwidth(const KernelSpec& spec);

// One-sided analytic tail integral over [r, inf), r >= 0.
double tail_mass(const KernelSpec& spec, double r);

// For PowerTail: C such that tail_mass(r) = C * r^-alpha for r >= core.
double tail_coefficient(const PowerTailKernel& k);

std::string kernel_name(const KernelSpec& spec);

// Kernel sampled on a grid of spacing dx, cells -half_width_cells..+half_width_cells,
// rescaled so sum(values)*dx == 1. Immutable after construction.
struct SampledKernel {
    double dx = 0.0;
    std::size_t half_width_cells = 0;
    std::vector<double> values; // size 2*half_width_cells + 1, center at index half_width_cells
    double discrete_mass = 0.0; // sum(values)*dx, == 1 after normalization

    double radius() const { return static_cast<double>(half_width_cells) * dx; }
    double at_offset(std::ptrdiff_t i) const {
        return values[static_cast<std::size_t>(i + static_cast<std::ptrdiff_t>(half_width_cells))];
    }
};

// Cell-center sampling followed by exact renormalization. Trailing zero
// cells (compact-support kernels narrower than the requested radius) are
// trimmed. For heavy tails the discarded one-sided tail mass must stay
// below 1% or the build fails: the heavy-tail experiments live in the tail,
// so silent truncation is not an option.
SampledKernel build_kernel(const KernelSpec& spec, double dx, double truncation_radius);

struct KernelAuditRow {
    double r = 0.0;
    double upper_scaled = 0.0; // r^alpha * tail_mass(r)
    double window_scaled = 0.0; // r^alpha * integral over [r, K r]
};

// Tail-condition audit against a claimed exponent: checks whether
// tail(r) <= c r^-alpha and window(r, Kr) >= c' r^-alpha hold with fitted
// constants on a log-spaced grid, and verifies phi >= eta on the core.
struct KernelAuditReport {
    double alpha_claim = 0.0;
    double window_factor = 0.0;
    std::vector<KernelAuditRow> rows;
    bool upper_holds = false;
    bool lower_holds = false;
    double c_upper = 0.0;  // fitted sup of r^alpha * tail(r)
    double c_lower = 0.0;  // fitted inf of r^alpha * window(r)
    double eta = 0.0;      // min phi on the core
    double sigma = 0.0;    // core half-width used for eta
};

KernelAuditReport audit_conditions(const KernelSpec& spec, double alpha_claim, double window_factor);

// Two-column CSV (x, phi) for inspection.
void export_kernel_csv(const SampledKernel& kernel, std::ostream& out);

} // namespace frontlab
