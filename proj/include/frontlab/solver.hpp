#pragma once

#include "frontlab/grid.hpp"
#include "frontlab/kernels.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace frontlab {

struct SolverConfig {
    double dt = 0.02;
    double t_final = 0.0;
    std::vector<double> snapshot_times; // must be multiples of dt, sorted
    bool clamp_negative = true;
    bool reaction_enabled = true; // disabled only by diffusion-oracle tests
    // Re-solve the diffusion substep ahead of the front (u < 1e-6) with a
    // local tridiagonal scheme and overwrite the spectral values there.
    // Global FFTs leave absolute-scale roundoff ahead of the front, where the
    // reaction amplifies it like e^t into a spurious front; local solves keep
    // tail errors relative to the local scale. Ignored when reaction is off.
    bool tail_guard = true;
    std::size_t observe_stride = 5;
    // Abort margin: the run stops (flagged, partial results kept) once the
    // front comes within this distance of x_hi. < 0 selects 10 sampled
    // kernel radii; the harness overrides with 10 kernel core half-widths
    // for heavy tails, whose truncation radius spans the whole domain.
    double front_guard = -1.0;
};

struct InitialCondition {
    enum class Kind { Indicator, HalfLine, Custom };
    Kind kind = Kind::Indicator;
    double a = -20.0; // Indicator support [a, b]
    double b = 0.0;   // rightmost support point
    double amplitude = 1.0;
    std::vector<double> custom;

    static InitialCondition indicator(double a, double b, double amplitude = 1.0);
    static InitialCondition half_line(double b, double amplitude = 1.0);
    static InitialCondition custom_values(std::vector<double> values, double amplitude);

    double evaluate(double x) const; // analytic kinds only
    ScalarField sample(const Domain& domain) const;
};

// One Strang step: half reaction, full diffusion, half reaction.
// Reaction freezes c = phi*u and applies u <- u*exp((1-c) dt/2) pointwise;
// diffusion multiplies the spectrum of the zero-padded field by
// exp(-k^2 dt/2). The field is extended by its left edge value on the left
// and by zero on the right; padding is max(kernel radius, 8 sqrt(dt)) cells,
// rounded up so the FFT length stays 7-smooth.
class SplittingSolver {
public:
    SplittingSolver(const Domain& domain, const SampledKernel& kernel, const SolverConfig& config);
    ~SplittingSolver();
    SplittingSolver(const SplittingSolver&) = delete;
    SplittingSolver& operator=(const SplittingSolver&) = delete;

    void step(ScalarField& field);
    void convolve_into(const ScalarField& field, std::vector<double>& out);

    struct StepStats {
        double max_u = 0.0;
        double clamped_max = 0.0; // largest |negative| clamped this step
        double clamped_sum = 0.0;
    };
    const StepStats& last_stats() const { return stats_; }
    std::size_t padded_size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    StepStats stats_;
};

// phi * u with linear (non-circular) convolution; u extended by its left
// edge value on the left, zero on the right.
ScalarField convolve(const SampledKernel& kernel, const ScalarField& field);

// Single splitting step as a pure function (for tests and small studies).
ScalarField step(const ScalarField& field, const SampledKernel& kernel, double dt,
                 bool clamp_negative = true, bool reaction_enabled = true);

struct TraceRow {
    double t = 0.0;
    std::vector<double> front_x; // one entry per requested level; NaN if no crossing
    double max_u = 0.0;
    double probe_lemma25 = 0.0; // t*u at the decay probe point; NaN when undefined
};

struct Snapshot {
    ScalarField u;
    ScalarField conv; // phi*u at the same time (Feynman-Kac potential)
};

struct RunResult {
    std::vector<TraceRow> trace;
    std::vector<Snapshot> snapshots;
    double observed_max = 0.0;      // running sup of u over the whole run
    double worst_clamp_ratio = 0.0; // max over steps of clamped_max / max_u
    bool domain_exhausted = false;  // aborted early, partial results
    double abort_time = 0.0;
};

// Integrates to t_final, sampling the trace every observe_stride steps and
// storing snapshots at the configured times. Deterministic given inputs.
RunResult run(const SolverConfig& config, const Domain& domain, const SampledKernel& kernel,
              const InitialCondition& u0, const std::vector<double>& front_levels);

// Explicit Euler with 3-point Laplacian and direct-summation convolution;
// independent oracle for the splitting solver on small instances
// (n <= 4096, T <= 10). dt_ref <= dx^2/4; pass 0 to pick dx^2/8.
ScalarField reference_solve(const Domain& domain, const SampledKernel& kernel,
                            const InitialCondition& u0, double t_final, double dt_ref = 0.0,
                            bool reaction_enabled = true);

} // namespace frontlab
