#include "frontlab/bridge.hpp"

#include "frontlab/parallel.hpp"
#include "frontlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frontlab {

namespace {

void validate(const BarrierLine& b) {
    if (!(b.y1 > 0.0) || !(b.y2 > 0.0) || !(b.t > 0.0) || !std::isfinite(b.y1 + b.y2 + b.t))
        throw std::invalid_argument("BarrierLine: y1, y2, t must be positive and finite");
}

void validate(const TubeSpec& s) {
    if (!(s.R0 > 0.0) || !(s.t > 0.0)) throw std::invalid_argument("TubeSpec: R0 and t must be > 0");
    if (!(s.r > 0.0) || s.r > s.R0) throw std::invalid_argument("TubeSpec: terminal window r must be in (0, R0]");
}

struct MomentSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t hits = 0;
};

// 1 - exp(-arg); exp(-arg) is below one ulp of 1 once arg > 40.
inline double crossing_survival(double arg) { return arg > 40.0 ? 1.0 : 1.0 - std::exp(-arg); }

EstimateWithCI finalize(const MomentSums& total, std::size_t n_paths, std::size_t n_steps) {
    const auto n = static_cast<double>(n_paths);
    EstimateWithCI est;
    est.n_paths = n_paths;
    est.n_steps = n_steps;
    est.mean = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.standard_error = std::sqrt(var / n);
    return est;
}

} // namespace

double bridge_above_line_exact(const BarrierLine& barrier) {
    validate(barrier);
    return 1.0 - std::exp(-2.0 * barrier.y1 * barrier.y2 / barrier.t);
}

EstimateWithCI bridge_stay_mc(const BarrierLine& barrier, std::size_t n_paths, std::size_t n_steps,
                              std::uint64_t seed, bool crossing_correction, std::size_t n_threads) {
    validate(barrier);
    if (n_steps < 64) throw std::invalid_argument("bridge_stay_mc: n_steps must be >= 64");
    if (n_paths < 2) throw std::invalid_argument("bridge_stay_mc: n_paths must be >= 2");

    const double t = barrier.t;
    const double delta = t / static_cast<double>(n_steps);
    const double sqrt_delta = std::sqrt(delta);

    const std::size_t n_blocks = 64;
    std::vector<MomentSums> blocks(n_blocks);

    parallel_blocks(n_paths, n_blocks, resolve_thread_cap(n_threads),
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        MomentSums acc;
                        std::vector<double> walk(n_steps + 1);
                        for (std::size_t p = lo; p < hi; ++p) {
                            Rng rng(seed, p);
                            walk[0] = 0.0;
                            for (std::size_t i = 1; i <= n_steps; ++i)
                                walk[i] = walk[i - 1] + sqrt_delta * rng.normal();
                            const double endpoint = walk[n_steps];
                            double weight = 1.0;
                            double d_prev = barrier.y2; // clearance of the bridge at s = 0
                            for (std::size_t i = 1; i <= n_steps; ++i) {
                                const double frac = static_cast<double>(i) / static_cast<double>(n_steps);
                                const double bridge = walk[i] - frac * endpoint;
                                const double line = -frac * barrier.y1 - (1.0 - frac) * barrier.y2;
                                const double d = bridge - line;
                                if (d < 0.0) {
                                    weight = 0.0;
                                    break;
                                }
                                if (crossing_correction)
                                    weight *= crossing_survival(2.0 * d_prev * d / delta);
                                d_prev = d;
                            }
                            acc.sum += weight;
                            acc.sum_sq += weight * weight;
                        }
                        blocks[block] = acc;
                    });

    MomentSums total;
    for (const auto& b : blocks) {
        total.sum += b.sum;
        total.sum_sq += b.sum_sq;
    }
    return finalize(total, n_paths, n_steps);
}

GaussianTail gaussian_tail(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("gaussian_tail: x must be > 0 (Mills bound)");
    GaussianTail g;
    g.exact = 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double e = std::exp(-0.5 * x * x);
    g.bound_chernoff = e;
    g.bound_mills = e / (x * std::sqrt(2.0 * std::numbers::pi));
    return g;
}

double interval_survival_exact(double t) {
    if (!(t > 0.1))
        throw std::invalid_argument("interval_survival_exact: series truncation requires t > 0.1");
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int n = 0;; ++n) {
        const double odd = 2.0 * n + 1.0;
        const double term = (4.0 / (odd * pi)) * std::exp(-odd * odd * pi * pi * t / 8.0);
        if (term < 1e-15) break;
        sum += (n % 2 == 0) ? term : -term;
    }
    return sum;
}

TubeRateResult tube_decay_rate_mc(const TubeSpec& spec, const std::vector<double>& t_grid,
                                  std::size_t n_paths, std::uint64_t seed, std::size_t n_threads) {
    validate(spec);
    if (t_grid.size() < 3) throw std::invalid_argument("tube_decay_rate_mc: need at least 3 grid times");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("tube_decay_rate_mc: t_grid must be sorted");

    constexpr double kStep = 0.01;
    const double t_max = t_grid.back();
    const auto n_steps = static_cast<std::size_t>(std::llround(t_max / kStep));
    std::vector<std::size_t> grid_steps;
    for (double tg : t_grid) {
        if (!(tg > 0.0)) throw std::invalid_argument("tube_decay_rate_mc: grid times must be > 0");
        const auto idx = static_cast<std::size_t>(std::llround(tg / kStep));
        if (std::abs(static_cast<double>(idx) * kStep - tg) > 1e-9)
            throw std::invalid_argument("tube_decay_rate_mc: grid times must be multiples of 0.01");
        grid_steps.push_back(idx);
    }

    const double delta = kStep;
    const double sqrt_delta = std::sqrt(delta);
    const std::size_t n_grid = t_grid.size();

    struct BlockSums {
        std::vector<double> sum, sum_sq;
        std::vector<std::size_t> hits;
    };
    const std::size_t n_blocks = 64;
    std::vector<BlockSums> blocks(n_blocks);
    for (auto& b : blocks) {
        b.sum.assign(n_grid, 0.0);
        b.sum_sq.assign(n_grid, 0.0);
        b.hits.assign(n_grid, 0);
    }

    parallel_blocks(n_paths, n_blocks, resolve_thread_cap(n_threads),
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        auto& acc = blocks[block];
                        for (std::size_t p = lo; p < hi; ++p) {
                            Rng rng(seed, p);
                            double pos = 0.0;
                            double weight = 1.0;
                            double up_prev = spec.R0; // clearance to the upper wall at s=0
                            double lo_prev = spec.R0;
                            std::size_t g = 0;
                            for (std::size_t i = 1; i <= n_steps && weight > 0.0; ++i) {
                                pos += sqrt_delta * rng.normal();
                                const double center = spec.b * static_cast<double>(i) * delta;
                                const double up = (center + spec.R0) - pos;
                                const double down = pos - (center - spec.R0);
                                if (up < 0.0 || down < 0.0) {
                                    weight = 0.0;
                                    break;
                                }
                                weight *= crossing_survival(2.0 * up_prev * up / delta) *
                                          crossing_survival(2.0 * lo_prev * down / delta);
                                up_prev = up;
                                lo_prev = down;
                                while (g < n_grid && grid_steps[g] == i) {
                                    const double w =
                                        std::abs(pos - center) <= spec.r ? weight : 0.0;
                                    acc.sum[g] += w;
                                    acc.sum_sq[g] += w * w;
                                    if (w > 0.0) ++acc.hits[g];
                                    ++g;
                                }
                            }
                        }
                    });

    TubeRateResult result;
    const auto n = static_cast<double>(n_paths);
    std::vector<double> ts, neglogp;
    for (std::size_t g = 0; g < n_grid; ++g) {
        TubeRatePoint pt;
        pt.t = t_grid[g];
        double sum = 0.0, sum_sq = 0.0;
        std::size_t hits = 0;
        for (const auto& b : blocks) {
            sum += b.sum[g];
            sum_sq += b.sum_sq[g];
            hits += b.hits[g];
        }
        pt.mean = sum / n;
        const double var = std::max(0.0, (sum_sq - n * pt.mean * pt.mean) / (n - 1.0));
        pt.standard_error = std::sqrt(var / n);
        pt.hits = hits;
        result.points.push_back(pt);
        if (hits < 50)
            throw std::runtime_error("tube_decay_rate_mc: only " + std::to_string(hits) +
                                     " hits at t=" + std::to_string(pt.t) +
                                     "; shrink the grid or raise n_paths");
        ts.push_back(pt.t);
        neglogp.push_back(-std::log(pt.mean));
    }

    // least squares of -ln P on t
    const auto m = static_cast<double>(ts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sx += ts[i];
        sy += neglogp[i];
        sxx += ts[i] * ts[i];
        sxy += ts[i] * neglogp[i];
    }
    result.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return result;
}

} // namespace frontlab
