#include "frontlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace frontlab {

namespace {

void validate(const KernelSpec& spec) {
    if (const auto* u = std::get_if<UniformKernel>(&spec)) {
        if (!(u->half_width > 0.0)) throw std::invalid_argument("Uniform kernel: half_width must be > 0");
    } else if (const auto* p = std::get_if<PowerTailKernel>(&spec)) {
        if (!(p->alpha > 0.0)) throw std::invalid_argument("PowerTail kernel: alpha must be > 0");
        if (!(p->core_halfwidth > 0.0)) throw std::invalid_argument("PowerTail kernel: core_halfwidth must be > 0");
    } else if (const auto* g = std::get_if<TruncGaussianKernel>(&spec)) {
        if (!(g->scale > 0.0)) throw std::invalid_argument("TruncGaussian kernel: scale must be > 0");
        if (!(g->cutoff > 0.0)) throw std::invalid_argument("TruncGaussian kernel: cutoff must be > 0");
    }
}

double power_core_height(const PowerTailKernel& k) {
    // Unit mass: 2 h sigma0 + 2 h sigma0 / alpha = 1.
    return k.alpha / (2.0 * k.core_halfwidth * (1.0 + k.alpha));
}

double trunc_gaussian_norm(const TruncGaussianKernel& k) {
    // integral of exp(-x^2 / 2 s^2) over [-cutoff, cutoff]
    const double s = k.scale;
    return s * std::sqrt(2.0 * std::numbers::pi) * std::erf(k.cutoff / (s * std::numbers::sqrt2));
}

} // namespace

double kernel_density(const KernelSpec& spec, double x) {
    validate(spec);
    const double ax = std::abs(x);
    if (const auto* u = std::get_if<UniformKernel>(&spec)) {
        return ax <= u->half_width ? 1.0 / (2.0 * u->half_width) : 0.0;
    }
    if (const auto* p = std::get_if<PowerTailKernel>(&spec)) {
        const double h = power_core_height(*p);
        if (ax <= p->core_halfwidth) return h;
        return h * std::pow(p->core_halfwidth, 1.0 + p->alpha) * std::pow(ax, -(1.0 + p->alpha));
    }
    const auto& g = std::get<TruncGaussianKernel>(spec);
    if (ax > g.cutoff) return 0.0;
    return std::exp(-x * x / (2.0 * g.scale * g.scale)) / trunc_gaussian_norm(g);
}

double kernel_core_halfwidth(const KernelSpec& spec) {
    if (const auto* u = std::get_if<UniformKernel>(&spec)) return u->half_width;
    if (const auto* p = std::get_if<PowerTailKernel>(&spec)) return p->core_halfwidth;
    return std::get<TruncGaussianKernel>(spec).cutoff;
}

double tail_coefficient(const PowerTailKernel& k) {
    return std::pow(k.core_halfwidth, k.alpha) / (2.0 * (1.0 + k.alpha));
}

double tail_mass(const KernelSpec& spec, double r) {
    validate(spec);
    if (r < 0.0) throw std::invalid_argument("tail_mass: r must be >= 0");
    if (const auto* u = std::get_if<UniformKernel>(&spec)) {
        if (r >= u->half_width) return 0.0;
        return (u->half_width - r) / (2.0 * u->half_width);
    }
    if (const auto* p = std::get_if<PowerTailKernel>(&spec)) {
        const double h = power_core_height(*p);
        const double s0 = p->core_halfwidth;
        const double beyond_core = h * s0 / p->alpha; // = tail_mass(s0)
        if (r >= s0) return tail_coefficient(*p) * std::pow(r, -p->alpha);
        return h * (s0 - r) + beyond_core;
    }
    const auto& g = std::get<TruncGaussianKernel>(spec);
    if (r >= g.cutoff) return 0.0;
    const double z = g.scale * std::numbers::sqrt2;
    return g.scale * std::sqrt(std::numbers::pi / 2.0) *
           (std::erf(g.cutoff / z) - std::erf(r / z)) / trunc_gaussian_norm(g);
}

std::string kernel_name(const KernelSpec& spec) {
    if (std::holds_alternative<UniformKernel>(spec)) return "uniform";
    if (std::holds_alternative<PowerTailKernel>(spec)) return "power_tail";
    return "trunc_gaussian";
}

SampledKernel build_kernel(const KernelSpec& spec, double dx, double truncation_radius) {
    validate(spec);
    if (!(dx > 0.0)) throw std::invalid_argument("build_kernel: dx must be > 0");
    const double core = kernel_core_halfwidth(spec);
    if (!(dx < core))
        throw std::invalid_argument("build_kernel: dx must be smaller than the kernel core half-width");
    if (!(truncation_radius >= core))
        throw std::invalid_argument("build_kernel: truncation_radius must cover the kernel core");

    // The discarded-mass gate is the real protection: heavy-tail experiments
    // live in the tail, and a quiet truncation would corrupt them.
    const double discarded = tail_mass(spec, truncation_radius);
    if (!(discarded < 0.01))
        throw std::invalid_argument("build_kernel: truncation at r=" + std::to_string(truncation_radius) +
                                    " discards one-sided tail mass " + std::to_string(discarded) +
                                    " (>= 1% of total); enlarge the truncation radius");

    auto n = static_cast<std::size_t>(std::llround(truncation_radius / dx));
    SampledKernel k;
    k.dx = dx;
    k.values.assign(2 * n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
        const double v = kernel_density(spec, static_cast<double>(i) * dx);
        k.values[n + i] = v;
        k.values[n - i] = v;
    }
    // Trim trailing zeros so compact kernels don't carry dead cells.
    while (n > 0 && k.values[n + n] == 0.0 && k.values.front() == 0.0) {
        k.values.erase(k.values.begin());
        k.values.pop_back();
        --n;
    }
    k.half_width_cells = n;

    double sum = 0.0;
    for (double v : k.values) sum += v;
    if (!(sum > 0.0)) throw std::invalid_argument("build_kernel: kernel is identically zero on the grid");
    const double scale = 1.0 / (sum * dx);
    for (double& v : k.values) v *= scale;
    sum = 0.0;
    for (double v : k.values) sum += v;
    k.discrete_mass = sum * dx;
    return k;
}

KernelAuditReport audit_conditions(const KernelSpec& spec, double alpha_claim, double window_factor) {
    validate(spec);
    if (!(alpha_claim > 0.0)) throw std::invalid_argument("audit_conditions: alpha_claim must be > 0");
    if (!(window_factor > 1.0)) throw std::invalid_argument("audit_conditions: window factor K must be > 1");

    KernelAuditReport rep;
    rep.alpha_claim = alpha_claim;
    rep.window_factor = window_factor;

    const double core = kernel_core_halfwidth(spec);
    rep.sigma = core;
    rep.eta = kernel_density(spec, 0.0);
    for (int i = 0; i <= 64; ++i) {
        const double x = core * (static_cast<double>(i) / 64.0) * (1.0 - 1e-12);
        rep.eta = std::min(rep.eta, kernel_density(spec, x));
    }

    constexpr int kGridPoints = 64;
    const double r_lo = 2.0 * core;
    const double r_hi = 1e4 * core;
    for (int i = 0; i < kGridPoints; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (kGridPoints - 1));
        KernelAuditRow row;
        row.r = r;
        row.upper_scaled = std::pow(r, alpha_claim) * tail_mass(spec, r);
        row.window_scaled = std::pow(r, alpha_claim) * (tail_mass(spec, r) - tail_mass(spec, window_factor * r));
        rep.rows.push_back(row);
    }

    // Fitted constants: c = sup of the scaled tail, c' = inf of the scaled
    // window over the top decade. The condition "holds" if the scaled value
    // does not drift as r grows (slope of its log against log r near 0).
    const double decade_lo = r_hi / 10.0;
    double sup_all = 0.0, inf_top = std::numeric_limits<double>::infinity();
    double first_top_upper = -1.0, last_upper = -1.0;
    double first_top_window = -1.0, last_window = -1.0;
    for (const auto& row : rep.rows) {
        sup_all = std::max(sup_all, row.upper_scaled);
        if (row.r >= decade_lo) {
            inf_top = std::min(inf_top, row.window_scaled);
            if (first_top_upper < 0.0) {
                first_top_upper = row.upper_scaled;
                first_top_window = row.window_scaled;
            }
            last_upper = row.upper_scaled;
            last_window = row.window_scaled;
        }
    }
    rep.c_upper = sup_all;
    rep.c_lower = std::isfinite(inf_top) ? inf_top : 0.0;

    // log-slope over the top decade; tails that have already vanished hold trivially.
    const double ln10 = std::numbers::ln10;
    if (last_upper <= 0.0) {
        rep.upper_holds = true;
    } else {
        const double slope = std::log(last_upper / first_top_upper) / ln10;
        rep.upper_holds = slope <= 0.1;
    }
    if (last_window <= 0.0 || first_top_window <= 0.0) {
        rep.lower_holds = false;
    } else {
        const double slope = std::log(last_window / first_top_window) / ln10;
        rep.lower_holds = slope >= -0.1 && rep.c_lower > 0.0;
    }
    return rep;
}

void export_kernel_csv(const SampledKernel& kernel, std::ostream& out) {
    out << "x,phi\n";
    const auto n = static_cast<std::ptrdiff_t>(kernel.half_width_cells);
    char buf[64];
    for (std::ptrdiff_t i = -n; i <= n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", static_cast<double>(i) * kernel.dx,
                      kernel.at_offset(i));
        out << buf;
    }
}

} // namespace frontlab
