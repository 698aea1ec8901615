#pragma once

#include <cstdint>
#include <vector>

namespace frontlab {

// Brownian bridge from 0 to 0 of length t must stay above the line through
// (0, -y2) and (t, -y1).
struct BarrierLine {
    double y1 = 1.0; // clearance at s = t
    double y2 = 1.0; // clearance at s = 0
    double t = 1.0;
};

// Band of half-width R0 around the line b*s, with terminal window r.
struct TubeSpec {
    double R0 = 1.0;
    double b = 0.0;
    double t = 1.0;
    double r = 1.0; // terminal window half-width, in (0, R0]
};

struct EstimateWithCI {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
};

// P(bridge stays above the line) = 1 - exp(-2 y1 y2 / t), exactly.
double bridge_above_line_exact(const BarrierLine& barrier);

// Bridge survival by Monte Carlo on an n_steps grid. Between grid points the
// analytic crossing probability exp(-2 d_i d_{i+1} / delta) for a linear
// barrier is applied multiplicatively, removing the discrete-monitoring bias;
// disable it only to demonstrate that bias.
EstimateWithCI bridge_stay_mc(const BarrierLine& barrier, std::size_t n_paths, std::size_t n_steps,
                              std::uint64_t seed, bool crossing_correction = true,
                              std::size_t n_threads = 0);

struct GaussianTail {
    double exact = 0.0;          // P(Z > x)
    double bound_chernoff = 0.0; // exp(-x^2/2)
    double bound_mills = 0.0;    // exp(-x^2/2) / (x sqrt(2 pi))
};

GaussianTail gaussian_tail(double x);

// P(|B(s)| <= 1 for all s <= t) via the alternating eigenfunction series,
// truncated below 1e-15. Requires t > 0.1 so the truncation bound holds.
double interval_survival_exact(double t);

struct TubeRatePoint {
    double t = 0.0;
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t hits = 0;
};

struct TubeRateResult {
    double slope = 0.0; // fitted decay rate of -ln P against t
    std::vector<TubeRatePoint> points;
};

// Estimates P(|B(s) - b s| <= R0 for s <= t, |B(t) - b t| <= r) on the time
// grid (per-interval crossing corrections on both walls), then regresses
// -ln P on t. The grid times must be multiples of the step 0.01. Expected
// slope: b^2/2 + pi^2 / (8 R0^2).
TubeRateResult tube_decay_rate_mc(const TubeSpec& spec, const std::vector<double>& t_grid,
                                  std::size_t n_paths, std::uint64_t seed, std::size_t n_threads = 0);

} // namespace frontlab
