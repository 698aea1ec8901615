#pragma once

#include "frontlab/grid.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace frontlab {

// One experiment: kernel, grid, integration horizon, observers, fit window,
// Feynman-Kac probe plan, seed. Parsed from "key = value" sections; every
// field is validated against the module preconditions before a run starts.
struct ExperimentConfig {
    KernelSpec kernel = UniformKernel{0.5};
    double truncation_radius = 2.0;

    double x_lo = -100.0;
    double margin = 70.0; // x_hi = sqrt(2) t_final + margin, rounded up to the grid

    double dx = 0.05;
    double dt = 0.02;
    double t_final = 3000.0;

    InitialCondition u0 = InitialCondition::indicator(-20.0, 0.0, 1.0);

    std::size_t observe_stride = 5;
    std::vector<double> snapshot_times;
    std::vector<double> levels{0.5, 0.1};

    double fit_t_min = 300.0;
    double fit_t_max = 3000.0;

    bool fk_enabled = false;
    double fk_probe_time = 50.0;
    double fk_horizon = 5.0;
    double fk_path_dt = 0.01;
    std::size_t fk_n_paths = 100000;
    // Offsets relative to the half-height front position; mostly behind the
    // front, where the exponential weight stays bounded and the z-statistic
    // is trustworthy at 1e5 paths.
    std::vector<double> fk_probe_offsets{-12, -10, -8, -6, -5, -4, -3, -2, -1, 0};

    std::uint64_t seed = 1;

    Domain make_domain() const;
    SampledKernel make_kernel() const;
    double x_hi() const;

    // Canonical serialization (fixed key order); its FNV-1a hash is stamped
    // into every output header so mixed-run contamination is detectable.
    std::string canonical() const;
    std::uint64_t hash() const;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

} // namespace frontlab
