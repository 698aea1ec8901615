#pragma once

#include "frontlab/grid.hpp"
#include "frontlab/solver.hpp"

#include <cstdint>
#include <vector>

namespace frontlab {

// Time-indexed snapshots of u and of phi*u, interpolated linearly in x and
// in t. Read-only during estimation; lookups outside the spatial range clamp
// to the edge value (the caller counts such paths and gates on their share).
class FieldOracle {
public:
    explicit FieldOracle(std::vector<Snapshot> snapshots);

    double u(double t, double x) const;
    double potential(double t, double x) const; // phi*u
    bool covers(double t_lo, double t_hi) const;
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double t_min() const { return times_.front(); }
    double t_max() const { return times_.back(); }

private:
    double interp(double t, double x, bool potential) const;

    std::vector<Snapshot> snaps_;
    std::vector<double> times_;
    double x_min_ = 0.0;
    double x_max_ = 0.0;
};

struct FKConfig {
    std::size_t n_paths = 100000;
    double path_dt = 0.01;
    double horizon = 5.0; // look-back time t'
    std::uint64_t rng_seed = 1;
    std::size_t n_threads = 0; // 0 = resolve from environment
};

struct FKEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_exited = 0; // paths that left the oracle's spatial range
    bool flagged = false;     // > 0.1% of paths exited
};

// Monte Carlo of u(t,x) = E_x[ exp(int_0^t' (1 - phi*u(t-s, B(s))) ds)
//                              * u(t-t', B(t')) ]
// with exact Gaussian increments and trapezoidal quadrature along paths.
FKEstimate estimate_u(double x, double t, const FieldOracle& oracle, const FKConfig& config);

// Full-horizon variant weighting the initial condition: terminal u0(B(t)),
// integral over [0, t].
FKEstimate estimate_u_from_initial(double x, double t, const InitialCondition& u0,
                                   const FieldOracle& oracle_for_potential, const FKConfig& config);

double zscore(const FKEstimate& estimate, double grid_value);

} // namespace frontlab
