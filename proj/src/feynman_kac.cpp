#include "frontlab/feynman_kac.hpp"

#include "frontlab/parallel.hpp"
#include "frontlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frontlab {

FieldOracle::FieldOracle(std::vector<Snapshot> snapshots) : snaps_(std::move(snapshots)) {
    if (snaps_.empty()) throw std::invalid_argument("FieldOracle: no snapshots");
    for (const auto& s : snaps_) {
        if (s.u.domain != snaps_.front().u.domain || s.conv.domain != s.u.domain)
            throw std::invalid_argument("FieldOracle: snapshots on mismatched grids");
        times_.push_back(s.u.time);
    }
    if (!std::is_sorted(times_.begin(), times_.end()))
        throw std::invalid_argument("FieldOracle: snapshots must be time-ordered");
    const auto& d = snaps_.front().u.domain;
    x_min_ = d.x(0);
    x_max_ = d.x(d.n - 1);
}

bool FieldOracle::covers(double t_lo, double t_hi) const {
    const double eps = 1e-9 * std::max(1.0, std::abs(t_hi));
    return times_.front() <= t_lo + eps && times_.back() >= t_hi - eps;
}

double FieldOracle::interp(double t, double x, bool potential) const {
    const double eps = 1e-9 * std::max(1.0, std::abs(t));
    if (t < times_.front() - eps || t > times_.back() + eps)
        throw std::runtime_error("FieldOracle: time " + std::to_string(t) + " outside snapshot coverage");
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    std::size_t hi = std::min(static_cast<std::size_t>(it - times_.begin()), times_.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == 0) hi = std::min<std::size_t>(1, times_.size() - 1);
    const auto& f_lo = potential ? snaps_[lo].conv : snaps_[lo].u;
    const auto& f_hi = potential ? snaps_[hi].conv : snaps_[hi].u;
    const double span = times_[hi] - times_[lo];
    const double w = span > 0.0 ? std::clamp((t - times_[lo]) / span, 0.0, 1.0) : 0.0;
    const double v = (1.0 - w) * f_lo.interpolate(x) + w * f_hi.interpolate(x);
    return v > 0.0 ? v : 0.0;
}

double FieldOracle::u(double t, double x) const { return interp(t, x, false); }
double FieldOracle::potential(double t, double x) const { return interp(t, x, true); }

namespace {

void validate_fk(const FKConfig& config, double t) {
    if (config.n_paths < 100) throw std::invalid_argument("FKConfig: n_paths must be >= 100");
    if (!(config.path_dt > 0.0) || config.path_dt > config.horizon)
        throw std::invalid_argument("FKConfig: require 0 < path_dt <= horizon");
    if (config.horizon > t + 1e-12) throw std::invalid_argument("FKConfig: horizon t' must be <= t");
}

struct PathSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t exited = 0;
};

// Terminal value comes either from the oracle at t - t' or from u0 at time 0.
template <typename Terminal>
FKEstimate run_paths(double x, double t, double horizon, const FieldOracle& oracle,
                     const FKConfig& config, Terminal&& terminal) {
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / config.path_dt));
    const double dt = horizon / static_cast<double>(std::max<std::size_t>(n_steps, 1));
    const double sqrt_dt = std::sqrt(dt);
    const double x_lo = oracle.x_min();
    const double x_hi = oracle.x_max();

    const std::size_t n_blocks = 64;
    std::vector<PathSums> blocks(n_blocks);
    parallel_blocks(config.n_paths, n_blocks, resolve_thread_cap(config.n_threads),
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        PathSums acc;
                        for (std::size_t p = lo; p < hi; ++p) {
                            Rng rng(config.rng_seed, p);
                            double pos = x;
                            bool exited = false;
                            double integral = 0.0;
                            double g_prev = 1.0 - oracle.potential(t, pos);
                            for (std::size_t s = 1; s <= n_steps; ++s) {
                                pos += sqrt_dt * rng.normal();
                                if (pos < x_lo || pos > x_hi) exited = true;
                                const double g =
                                    1.0 - oracle.potential(t - static_cast<double>(s) * dt, pos);
                                integral += 0.5 * (g_prev + g) * dt;
                                g_prev = g;
                            }
                            const double w = std::exp(integral) * terminal(pos);
                            acc.sum += w;
                            acc.sum_sq += w * w;
                            if (exited) ++acc.exited;
                        }
                        blocks[block] = acc;
                    });

    PathSums total;
    for (const auto& b : blocks) {
        total.sum += b.sum;
        total.sum_sq += b.sum_sq;
        total.exited += b.exited;
    }
    const auto n = static_cast<double>(config.n_paths);
    FKEstimate est;
    est.n_paths = config.n_paths;
    est.mean = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.standard_error = std::sqrt(var / n);
    est.n_exited = total.exited;
    est.flagged = static_cast<double>(total.exited) > 0.001 * n;
    return est;
}

} // namespace

FKEstimate estimate_u(double x, double t, const FieldOracle& oracle, const FKConfig& config) {
    validate_fk(config, t);
    if (!oracle.covers(t - config.horizon, t))
        throw std::invalid_argument("estimate_u: oracle does not cover [t - t', t]");
    const double margin = 6.0 * std::sqrt(config.horizon);
    if (x < oracle.x_min() + margin || x > oracle.x_max() - margin)
        throw std::invalid_argument("estimate_u: x too close to the oracle's spatial boundary");
    const double t_terminal = t - config.horizon;
    return run_paths(x, t, config.horizon, oracle, config,
                     [&](double pos) { return oracle.u(t_terminal, pos); });
}

FKEstimate estimate_u_from_initial(double x, double t, const InitialCondition& u0,
                                   const FieldOracle& oracle_for_potential, const FKConfig& config) {
    if (t == 0.0) {
        FKEstimate est;
        est.mean = u0.evaluate(x);
        est.standard_error = 0.0;
        est.n_paths = config.n_paths;
        return est;
    }
    FKConfig cfg = config;
    cfg.horizon = t;
    validate_fk(cfg, t);
    if (!oracle_for_potential.covers(0.0, t))
        throw std::invalid_argument("estimate_u_from_initial: oracle does not cover [0, t]");
    return run_paths(x, t, t, oracle_for_potential, cfg, [&](double pos) { return u0.evaluate(pos); });
}

double zscore(const FKEstimate& estimate, double grid_value) {
    if (estimate.standard_error > 0.0) return (estimate.mean - grid_value) / estimate.standard_error;
    if (estimate.mean == grid_value) return 0.0;
    throw std::invalid_argument("zscore: zero standard error with mean != grid value");
}

} // namespace frontlab
