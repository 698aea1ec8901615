#include "frontlab/front.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace frontlab {

namespace {

std::vector<std::pair<double, double>> window_slice(const std::vector<std::pair<double, double>>& samples,
                                                    double t_min, double t_max) {
    if (!(t_min < t_max)) throw std::invalid_argument("fit window: require t_min < t_max");
    std::vector<std::pair<double, double>> out;
    for (const auto& s : samples)
        if (s.first >= t_min && s.first <= t_max && std::isfinite(s.second)) out.push_back(s);
    if (out.size() < 20)
        throw std::invalid_argument("fit window: fewer than 20 samples in [" + std::to_string(t_min) +
                                    ", " + std::to_string(t_max) + "]");
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("least_squares: degenerate abscissa");
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

} // namespace

double front_location(const ScalarField& field, double level) {
    if (!(level > 0.0)) throw std::invalid_argument("front_location: level must be > 0");
    const auto& u = field.values;
    const std::size_t n = u.size();
    if (n < 2) throw std::invalid_argument("front_location: field too small");
    if (u.back() >= level)
        throw std::runtime_error("front_location: level at or below the far-field value (no downward crossing)");
    for (std::size_t i = n - 1; i-- > 0;) {
        if (u[i] >= level && u[i + 1] < level) {
            const double w = (u[i] - level) / (u[i] - u[i + 1]);
            return field.domain.x(i) + w * field.domain.dx();
        }
    }
    throw std::runtime_error("front_location: field everywhere below the level (no crossing)");
}

DelaySeries delay_series(const FrontTrace& trace) {
    if (trace.samples.empty()) throw std::invalid_argument("delay_series: empty trace");
    DelaySeries d;
    d.samples.reserve(trace.samples.size());
    for (const auto& [t, x] : trace.samples) d.samples.emplace_back(t, std::numbers::sqrt2 * t - x);
    return d;
}

FitReport fit_log(const DelaySeries& series, double t_min, double t_max) {
    const auto pts = window_slice(series.samples, t_min, t_max);
    std::vector<double> lt(pts.size()), d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        lt[i] = std::log(pts[i].first);
        d[i] = pts[i].second;
    }
    const auto f = least_squares(lt, d);
    double ss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = d[i] - (f.slope * lt[i] + f.intercept);
        ss += r * r;
    }
    FitReport rep;
    rep.model = DelayModel::Log;
    rep.c = f.slope;
    rep.b = f.intercept;
    rep.rms_residual = std::sqrt(ss / static_cast<double>(pts.size()));
    rep.t_min = t_min;
    rep.t_max = t_max;
    return rep;
}

namespace {

struct PowerCandidate {
    double a = 0.0;
    double beta = 0.0;
    double rms = std::numeric_limits<double>::infinity();
    bool valid = false;
};

PowerCandidate power_fit_at_offset(const std::vector<double>& t, const std::vector<double>& d, double b) {
    PowerCandidate cand;
    std::vector<double> lt(t.size()), ly(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = d[i] - b;
        if (!(y > 0.0)) return cand;
        lt[i] = std::log(t[i]);
        ly[i] = std::log(y);
    }
    const auto f = least_squares(lt, ly);
    cand.beta = f.slope;
    cand.a = std::exp(f.intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = d[i] - (cand.a * std::pow(t[i], cand.beta) + b);
        ss += r * r;
    }
    cand.rms = std::sqrt(ss / static_cast<double>(t.size()));
    cand.valid = true;
    return cand;
}

} // namespace

FitReport fit_power(const DelaySeries& series, double t_min, double t_max) {
    const auto pts = window_slice(series.samples, t_min, t_max);
    std::vector<double> t(pts.size()), d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        t[i] = pts[i].first;
        d[i] = pts[i].second;
    }
    const double d_min = *std::min_element(d.begin(), d.end());
    const double d_max = *std::max_element(d.begin(), d.end());
    const double span = d_max - d_min;
    if (!(span > 0.0)) throw std::runtime_error("fit_power: model inapplicable (constant delay)");

    constexpr int kGrid = 512;
    const double b_lo = d_min - 2.0 * span;
    const double b_hi = d_min - 1e-9 * span;
    double best_b = b_lo;
    PowerCandidate best;
    for (int i = 0; i < kGrid; ++i) {
        const double b = b_lo + (b_hi - b_lo) * static_cast<double>(i) / (kGrid - 1);
        const auto cand = power_fit_at_offset(t, d, b);
        if (cand.valid && cand.rms < best.rms) {
            best = cand;
            best_b = b;
        }
    }
    if (!best.valid) throw std::runtime_error("fit_power: model inapplicable (d - b non-positive for all offsets)");

    // Golden-section refinement around the winning grid cell.
    const double cell = (b_hi - b_lo) / (kGrid - 1);
    double lo = best_b - cell;
    double hi = std::min(best_b + cell, b_hi);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    auto objective = [&](double b) {
        const auto cand = power_fit_at_offset(t, d, b);
        return cand.valid ? cand.rms : std::numeric_limits<double>::infinity();
    };
    double c1 = hi - golden * (hi - lo);
    double c2 = lo + golden * (hi - lo);
    double f1 = objective(c1), f2 = objective(c2);
    for (int it = 0; it < 90; ++it) {
        if (f1 < f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - golden * (hi - lo);
            f1 = objective(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + golden * (hi - lo);
            f2 = objective(c2);
        }
    }
    const double b_ref = 0.5 * (lo + hi);
    const auto refined = power_fit_at_offset(t, d, b_ref);
    FitReport rep;
    rep.model = DelayModel::Power;
    rep.t_min = t_min;
    rep.t_max = t_max;
    if (refined.valid && refined.rms <= best.rms) {
        rep.a = refined.a;
        rep.beta = refined.beta;
        rep.b = b_ref;
        rep.rms_residual = refined.rms;
    } else {
        rep.a = best.a;
        rep.beta = best.beta;
        rep.b = best_b;
        rep.rms_residual = best.rms;
    }
    return rep;
}

ModelSelection model_select(const DelaySeries& series, double t_min, double t_max) {
    ModelSelection sel;
    sel.log_fit = fit_log(series, t_min, t_max);
    sel.power_fit = fit_power(series, t_min, t_max);
    const double rl = sel.log_fit.rms_residual;
    const double rp = sel.power_fit.rms_residual;
    constexpr double kMargin = 1.2;
    if (rp >= kMargin * rl && rp > 0.0) {
        sel.preference = ModelPreference::Log;
        sel.log_fit.preferred = true;
    } else if (rl >= kMargin * rp && rl > 0.0) {
        sel.preference = ModelPreference::Power;
        sel.power_fit.preferred = true;
    } else {
        sel.preference = ModelPreference::Inconclusive;
    }
    return sel;
}

double speed_estimate(const FrontTrace& trace, double t_min, double t_max) {
    const auto pts = window_slice(trace.samples, t_min, t_max);
    std::vector<double> t(pts.size()), x(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        t[i] = pts[i].first;
        x[i] = pts[i].second;
    }
    return least_squares(t, x).slope;
}

double ahead_of_front_probe(const ScalarField& field, double amplitude_bound) {
    const double t = field.time;
    const double t_min = std::max(amplitude_bound / (std::numbers::sqrt2 - 1.0), 1.0);
    if (!(t >= t_min))
        throw std::invalid_argument("ahead_of_front_probe: t below the probe's validity threshold");
    const double x_probe = std::numbers::sqrt2 * t + std::log(t) / (2.0 * std::numbers::sqrt2);
    if (x_probe < field.domain.x(0) || x_probe > field.domain.x(field.domain.n - 1))
        throw std::runtime_error("ahead_of_front_probe: probe point outside the domain");
    return t * field.interpolate(x_probe);
}

} // namespace frontlab
