#include "frontlab/solver.hpp"

#include "frontlab/front.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace frontlab {

namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_fast_size(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 16);; ++m) {
        std::size_t k = m;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (k % p == 0) k /= p;
        if (k == 1) return m;
    }
}

void validate_config(const SolverConfig& config) {
    if (!(config.dt > 0.0 && config.dt <= 0.1))
        throw std::invalid_argument("SolverConfig: require 0 < dt <= 0.1");
}

} // namespace

InitialCondition InitialCondition::indicator(double a, double b, double amplitude) {
    if (!(a < b)) throw std::invalid_argument("InitialCondition: indicator requires a < b");
    if (!(amplitude > 0.0)) throw std::invalid_argument("InitialCondition: amplitude must be > 0");
    InitialCondition ic;
    ic.kind = Kind::Indicator;
    ic.a = a;
    ic.b = b;
    ic.amplitude = amplitude;
    return ic;
}

InitialCondition InitialCondition::half_line(double b, double amplitude) {
    if (!(amplitude > 0.0)) throw std::invalid_argument("InitialCondition: amplitude must be > 0");
    InitialCondition ic;
    ic.kind = Kind::HalfLine;
    ic.a = -std::numeric_limits<double>::infinity();
    ic.b = b;
    ic.amplitude = amplitude;
    return ic;
}

InitialCondition InitialCondition::custom_values(std::vector<double> values, double amplitude) {
    InitialCondition ic;
    ic.kind = Kind::Custom;
    ic.amplitude = amplitude;
    ic.custom = std::move(values);
    for (double v : ic.custom)
        if (!(v >= 0.0) || v > amplitude)
            throw std::invalid_argument("InitialCondition: custom values must lie in [0, amplitude]");
    return ic;
}

double InitialCondition::evaluate(double x) const {
    switch (kind) {
        case Kind::Indicator: return (x >= a && x <= b) ? amplitude : 0.0;
        case Kind::HalfLine: return x <= b ? amplitude : 0.0;
        case Kind::Custom:
            throw std::invalid_argument("InitialCondition: custom data has no analytic evaluation");
    }
    return 0.0;
}

ScalarField InitialCondition::sample(const Domain& domain) const {
    ScalarField f(domain, 0.0, 0.0);
    if (kind == Kind::Custom) {
        if (custom.size() != domain.n)
            throw std::invalid_argument("InitialCondition: custom data does not match the grid");
        f.values = custom;
        return f;
    }
    for (std::size_t i = 0; i < domain.n; ++i) f.values[i] = evaluate(domain.x(i));
    return f;
}

struct SplittingSolver::Impl {
    Domain domain;
    SampledKernel kernel;
    SolverConfig config;

    std::size_t pad = 0;      // cells of padding on the left (and at least on the right)
    std::size_t padded_n = 0; // 7-smooth FFT length
    double* buf = nullptr;
    fftw_complex* spectrum = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<double> kernel_hat;    // real spectrum of the symmetric kernel, dx/N folded in
    std::vector<double> diffusion_mul; // exp(-k^2 dt/2)/N
    std::vector<double> conv; // scratch for phi*u
    std::vector<double> tail_old, tail_new, thomas_c, thomas_d; // tail-guard scratch

    Impl(const Domain& d, const SampledKernel& k, const SolverConfig& c)
        : domain(d), kernel(k), config(c) {
        validate_config(config);
        const double dx = domain.dx();
        if (std::abs(kernel.dx - dx) > 1e-12 * std::max(1.0, dx))
            throw std::invalid_argument("SplittingSolver: kernel grid spacing does not match the domain");
        if (kernel.radius() > domain.x_hi - domain.x_lo)
            throw std::invalid_argument("SplittingSolver: kernel half-width exceeds the domain length");

        const auto diffusion_pad =
            static_cast<std::size_t>(std::ceil(8.0 * std::sqrt(config.dt) / dx));
        pad = std::max(kernel.half_width_cells, diffusion_pad);
        padded_n = next_fast_size(domain.n + 2 * pad);

        buf = fftw_alloc_real(padded_n);
        spectrum = fftw_alloc_complex(padded_n / 2 + 1);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            // FFTW_ESTIMATE keeps plan selection deterministic run-to-run,
            // which the byte-identical-output guarantee depends on.
            forward = fftw_plan_dft_r2c_1d(static_cast<int>(padded_n), buf, spectrum, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r_1d(static_cast<int>(padded_n), spectrum, buf, FFTW_ESTIMATE);
        }
        if (!forward || !backward) throw std::runtime_error("SplittingSolver: FFT planning failed");

        const std::size_t nbins = padded_n / 2 + 1;
        const double inv_n = 1.0 / static_cast<double>(padded_n);

        // Kernel spectrum: symmetric kernel wrapped around index 0 is real-even.
        std::memset(buf, 0, padded_n * sizeof(double));
        buf[0] = kernel.at_offset(0);
        for (std::size_t i = 1; i <= kernel.half_width_cells; ++i) {
            const double v = kernel.at_offset(static_cast<std::ptrdiff_t>(i));
            buf[i] = v;
            buf[padded_n - i] = v;
        }
        fftw_execute(forward);
        kernel_hat.resize(nbins);
        for (std::size_t m = 0; m < nbins; ++m) kernel_hat[m] = spectrum[m][0] * dx * inv_n;

        diffusion_mul.resize(nbins);
        const double dk = 2.0 * std::numbers::pi / (static_cast<double>(padded_n) * dx);
        for (std::size_t m = 0; m < nbins; ++m) {
            const double k_m = dk * static_cast<double>(m);
            diffusion_mul[m] = std::exp(-0.5 * k_m * k_m * config.dt) * inv_n;
        }
        conv.resize(domain.n);
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(buf);
        fftw_free(spectrum);
    }

    // Pad with the left edge value on the left, zero on the right.
    void load_padded(const std::vector<double>& u) {
        const double left = u.front();
        for (std::size_t i = 0; i < pad; ++i) buf[i] = left;
        std::memcpy(buf + pad, u.data(), u.size() * sizeof(double));
        std::memset(buf + pad + u.size(), 0, (padded_n - pad - u.size()) * sizeof(double));
    }

    void apply_spectrum(const std::vector<double>& mul) {
        fftw_execute(forward);
        const std::size_t nbins = padded_n / 2 + 1;
        for (std::size_t m = 0; m < nbins; ++m) {
            spectrum[m][0] *= mul[m];
            spectrum[m][1] *= mul[m];
        }
        fftw_execute(backward);
    }

    void convolve_into(const std::vector<double>& u, std::vector<double>& out) {
        load_padded(u);
        apply_spectrum(kernel_hat);
        out.resize(u.size());
        std::memcpy(out.data(), buf + pad, u.size() * sizeof(double));
    }

    void reaction_half(std::vector<double>& u, double dt_half) {
        convolve_into(u, conv);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::exp((1.0 - conv[i]) * dt_half);
    }

    // Global transforms deposit absolute-scale roundoff everywhere, and ahead
    // of the front such noise grows like e^t until it nucleates a spurious
    // front. Beyond the rightmost crossing of kTailLevel the diffusion substep
    // is therefore re-solved with a local compact-4th-order Crank-Nicolson
    // scheme, whose errors stay relative to the local solution scale, and the
    // spectral values there are overwritten.
    static constexpr double kTailLevel = 1e-6;
    static constexpr double kTailFloor = 1e-280; // flush-to-zero, keeps denormals out

    std::size_t tail_interface(const std::vector<double>& u) const {
        std::size_t i = u.size();
        while (i-- > 0)
            if (u[i] >= kTailLevel) return i;
        return u.size(); // no cell at or above the level
    }

    // One tridiagonal Crank-Nicolson substep of u_t = (1/2) u_xx on the strip
    // with Dirichlet values at index 0 (old/new) and a zero ghost on the right.
    void tail_cn_substep(std::vector<double>& u, double left_new, double kappa) {
        const std::size_t m = u.size();
        if (m < 3) {
            if (m >= 1) u[0] = left_new;
            return;
        }
        const double a_off = 1.0 / 12.0 - kappa; // A sub/super diagonal
        const double a_diag = 5.0 / 6.0 + 2.0 * kappa;
        const double b_off = 1.0 / 12.0 + kappa;
        const double b_diag = 5.0 / 6.0 - 2.0 * kappa;

        thomas_c.assign(m, 0.0);
        thomas_d.assign(m, 0.0);
        // unknowns j = 1..m-1; u[m] ghost = 0 at both levels
        for (std::size_t j = 1; j < m; ++j) {
            const double right = j + 1 < m ? u[j + 1] : 0.0;
            thomas_d[j] = b_off * (u[j - 1] + right) + b_diag * u[j];
        }
        thomas_d[1] -= a_off * left_new;
        u[0] = left_new;

        // Thomas elimination
        thomas_c[1] = a_off / a_diag;
        thomas_d[1] /= a_diag;
        for (std::size_t j = 2; j < m; ++j) {
            const double denom = a_diag - a_off * thomas_c[j - 1];
            thomas_c[j] = a_off / denom;
            thomas_d[j] = (thomas_d[j] - a_off * thomas_d[j - 1]) / denom;
        }
        u[m - 1] = thomas_d[m - 1];
        for (std::size_t j = m - 1; j-- > 1;) u[j] = thomas_d[j] - thomas_c[j] * u[j + 1];
    }

    // Steepest log-slope of the tail (per unit length), for substep control.
    double tail_log_slope(const std::vector<double>& u) const {
        const double dx = domain.dx();
        double steepest = 1.5;
        for (std::size_t j = 0; j + 1 < u.size(); ++j) {
            if (u[j] > 1e-30 && u[j + 1] > 1e-30) {
                const double s = std::abs(std::log(u[j + 1] / u[j])) / dx;
                steepest = std::max(steepest, s);
            }
        }
        return std::min(steepest, 8.0);
    }

    void tail_guard_diffuse(std::vector<double>& u, const std::vector<double>& u_pre) {
        const std::size_t i_s = tail_interface(u_pre);
        if (i_s + 3 >= u_pre.size()) return; // no usable strip
        const std::size_t m = u_pre.size() - i_s;
        tail_old.assign(u_pre.begin() + static_cast<std::ptrdiff_t>(i_s), u_pre.end());

        const double slope = tail_log_slope(tail_old);
        const double dt = config.dt;
        // keep the per-substep growth-factor argument lambda^2 dt_sub / 2 small
        const auto k_sub = std::min<std::size_t>(
            256, std::max<std::size_t>(1, static_cast<std::size_t>(
                                              std::ceil(0.5 * slope * slope * dt / 0.01))));
        const double dt_sub = dt / static_cast<double>(k_sub);
        const double dx = domain.dx();
        const double kappa = dt_sub / (4.0 * dx * dx);

        const double left_old = u_pre[i_s];
        const double left_new = u[i_s]; // post-spectral seam value
        for (std::size_t s = 1; s <= k_sub; ++s) {
            const double w = static_cast<double>(s) / static_cast<double>(k_sub);
            tail_cn_substep(tail_old, (1.0 - w) * left_old + w * left_new, kappa);
        }
        for (std::size_t j = 1; j < m; ++j) {
            double v = tail_old[j];
            if (v < kTailFloor) v = 0.0;
            u[i_s + j] = v;
        }
    }
};

SplittingSolver::SplittingSolver(const Domain& domain, const SampledKernel& kernel,
                                 const SolverConfig& config)
    : impl_(std::make_unique<Impl>(domain, kernel, config)) {}

SplittingSolver::~SplittingSolver() = default;

std::size_t SplittingSolver::padded_size() const { return impl_->padded_n; }

void SplittingSolver::convolve_into(const ScalarField& field, std::vector<double>& out) {
    if (field.domain != impl_->domain)
        throw std::invalid_argument("SplittingSolver: field domain does not match");
    impl_->convolve_into(field.values, out);
}

void SplittingSolver::step(ScalarField& field) {
    if (field.domain != impl_->domain)
        throw std::invalid_argument("SplittingSolver: field domain does not match");
    auto& u = field.values;
    const double dt = impl_->config.dt;
    const bool react = impl_->config.reaction_enabled;

    if (react) impl_->reaction_half(u, 0.5 * dt);

    // The tail guard needs pre-diffusion values; only reaction-driven runs
    // amplify tail noise, so pure-diffusion studies stay fully spectral.
    const bool guard = react && impl_->config.tail_guard;
    if (guard) impl_->tail_new = u;

    impl_->load_padded(u);
    impl_->apply_spectrum(impl_->diffusion_mul);
    stats_ = StepStats{};
    double* interior = impl_->buf + impl_->pad;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double v = interior[i];
        if (v < 0.0 && impl_->config.clamp_negative) {
            const double mag = -v;
            stats_.clamped_max = std::max(stats_.clamped_max, mag);
            stats_.clamped_sum += mag;
            v = 0.0;
        }
        u[i] = v;
        stats_.max_u = std::max(stats_.max_u, v);
    }
    if (guard) impl_->tail_guard_diffuse(u, impl_->tail_new);

    if (react) impl_->reaction_half(u, 0.5 * dt);

    field.time += dt;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i]))
            throw std::runtime_error("SplittingSolver: blow-up detected at t=" + std::to_string(field.time) +
                                     ", x=" + std::to_string(field.domain.x(i)));
        stats_.max_u = std::max(stats_.max_u, u[i]);
    }
    if (stats_.clamped_max > 1e-10 * std::max(stats_.max_u, 1e-300))
        throw std::runtime_error("SplittingSolver: clamped negative mass exceeds tolerance at t=" +
                                 std::to_string(field.time) + " (clamped " +
                                 std::to_string(stats_.clamped_max) + ", max u " +
                                 std::to_string(stats_.max_u) + ")");
}

ScalarField convolve(const SampledKernel& kernel, const ScalarField& field) {
    SolverConfig cfg;
    cfg.dt = 0.01;
    SplittingSolver solver(field.domain, kernel, cfg);
    ScalarField out(field.domain, 0.0, field.time);
    solver.convolve_into(field, out.values);
    return out;
}

ScalarField step(const ScalarField& field, const SampledKernel& kernel, double dt, bool clamp_negative,
                 bool reaction_enabled) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.clamp_negative = clamp_negative;
    cfg.reaction_enabled = reaction_enabled;
    SplittingSolver solver(field.domain, kernel, cfg);
    ScalarField out = field;
    solver.step(out);
    return out;
}

RunResult run(const SolverConfig& config, const Domain& domain, const SampledKernel& kernel,
              const InitialCondition& u0, const std::vector<double>& front_levels) {
    validate_config(config);
    if (!(config.t_final > 0.0)) throw std::invalid_argument("run: t_final must be > 0");
    const double sqrt2 = std::numbers::sqrt2;
    if (domain.x_hi < sqrt2 * config.t_final)
        throw std::invalid_argument("run: domain too small, need x_hi >= sqrt(2) * t_final");

    const auto total_steps = static_cast<std::size_t>(std::llround(config.t_final / config.dt));
    if (std::abs(static_cast<double>(total_steps) * config.dt - config.t_final) > 1e-9 * config.t_final)
        throw std::invalid_argument("run: t_final must be an integer multiple of dt");

    std::vector<std::size_t> snapshot_steps;
    for (double ts : config.snapshot_times) {
        if (ts < 0.0 || ts > config.t_final)
            throw std::invalid_argument("run: snapshot time outside [0, t_final]");
        const auto idx = static_cast<std::size_t>(std::llround(ts / config.dt));
        if (std::abs(static_cast<double>(idx) * config.dt - ts) > 1e-9 * std::max(1.0, ts))
            throw std::invalid_argument("run: snapshot time " + std::to_string(ts) +
                                        " is not a multiple of dt");
        snapshot_steps.push_back(idx);
    }
    if (!std::is_sorted(snapshot_steps.begin(), snapshot_steps.end()))
        throw std::invalid_argument("run: snapshot times must be sorted");

    const double guard =
        config.front_guard >= 0.0 ? config.front_guard : 10.0 * kernel.radius();

    SplittingSolver solver(domain, kernel, config);
    ScalarField field = u0.sample(domain);

    RunResult result;
    std::vector<double> conv_scratch;
    const std::size_t stride = std::max<std::size_t>(config.observe_stride, 1);

    auto observe = [&](std::size_t step_index) -> bool {
        TraceRow row;
        row.t = static_cast<double>(step_index) * config.dt;
        row.max_u = field.max_value();
        result.observed_max = std::max(result.observed_max, row.max_u);
        for (double level : front_levels) {
            double x = std::numeric_limits<double>::quiet_NaN();
            if (level < row.max_u && !field.values.empty() && field.values.back() < level) {
                try {
                    x = front_location(field, level);
                } catch (const std::exception&) {
                    x = std::numeric_limits<double>::quiet_NaN();
                }
            }
            row.front_x.push_back(x);
        }
        row.probe_lemma25 = std::numeric_limits<double>::quiet_NaN();
        const double probe_threshold = std::max(u0.amplitude / (sqrt2 - 1.0), 1.0);
        if (row.t >= probe_threshold) {
            const double x_probe = sqrt2 * row.t + std::log(row.t) / (2.0 * sqrt2);
            if (x_probe <= domain.x(domain.n - 1)) row.probe_lemma25 = row.t * field.interpolate(x_probe);
        }
        result.trace.push_back(std::move(row));

        // Domain-exhaustion guard on the primary level.
        if (!result.trace.back().front_x.empty()) {
            const double x_front = result.trace.back().front_x.front();
            if (std::isfinite(x_front) && x_front > domain.x_hi - guard) {
                result.domain_exhausted = true;
                result.abort_time = result.trace.back().t;
                return false;
            }
        }
        return true;
    };

    auto maybe_snapshot = [&](std::size_t step_index, std::size_t& next_snap) {
        while (next_snap < snapshot_steps.size() && snapshot_steps[next_snap] == step_index) {
            Snapshot snap;
            snap.u = field;
            solver.convolve_into(field, conv_scratch);
            snap.conv = ScalarField(domain, 0.0, field.time);
            snap.conv.values = conv_scratch;
            result.snapshots.push_back(std::move(snap));
            ++next_snap;
        }
    };

    std::size_t next_snap = 0;
    maybe_snapshot(0, next_snap);
    if (!observe(0)) return result;

    for (std::size_t i = 1; i <= total_steps; ++i) {
        solver.step(field);
        field.time = static_cast<double>(i) * config.dt; // avoid accumulation drift
        const auto& st = solver.last_stats();
        if (st.max_u > 0.0)
            result.worst_clamp_ratio = std::max(result.worst_clamp_ratio, st.clamped_max / st.max_u);
        maybe_snapshot(i, next_snap);
        if (i % stride == 0 || i == total_steps) {
            if (!observe(i)) return result;
        }
    }
    return result;
}

ScalarField reference_solve(const Domain& domain, const SampledKernel& kernel,
                            const InitialCondition& u0, double t_final, double dt_ref,
                            bool reaction_enabled) {
    if (domain.n > 4096) throw std::invalid_argument("reference_solve: small instances only (n <= 4096)");
    if (!(t_final > 0.0 && t_final <= 10.0))
        throw std::invalid_argument("reference_solve: small instances only (0 < T <= 10)");
    const double dx = domain.dx();
    if (std::abs(kernel.dx - dx) > 1e-12 * std::max(1.0, dx))
        throw std::invalid_argument("reference_solve: kernel grid spacing does not match the domain");
    const double dt_max = dx * dx / 4.0;
    if (dt_ref == 0.0) dt_ref = dx * dx / 8.0;
    if (!(dt_ref > 0.0) || dt_ref > dt_max)
        throw std::invalid_argument("reference_solve: stability bound violated (need dt_ref <= dx^2/4)");

    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt_ref - 1e-12));
    const double dt = t_final / static_cast<double>(steps);

    ScalarField f = u0.sample(domain);
    const std::size_t n = domain.n;
    const auto m = static_cast<std::ptrdiff_t>(kernel.half_width_cells);
    std::vector<double> conv(n), next(n);
    const double inv_dx2 = 1.0 / (dx * dx);

    auto extended = [&](std::ptrdiff_t j) -> double {
        if (j < 0) return f.values.front();
        if (j >= static_cast<std::ptrdiff_t>(n)) return 0.0;
        return f.values[static_cast<std::size_t>(j)];
    };

    for (std::size_t s = 0; s < steps; ++s) {
        if (reaction_enabled) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -m; k <= m; ++k)
                    acc += kernel.at_offset(k) * extended(static_cast<std::ptrdiff_t>(i) - k);
                conv[i] = acc * dx;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double here = f.values[i];
            const double lap =
                (extended(static_cast<std::ptrdiff_t>(i) + 1) - 2.0 * here +
                 extended(static_cast<std::ptrdiff_t>(i) - 1)) * inv_dx2;
            double v = here + dt * 0.5 * lap;
            if (reaction_enabled) v += dt * here * (1.0 - conv[i]);
            next[i] = v;
        }
        f.values.swap(next);
    }
    f.time = t_final;
    f.check_finite();
    return f;
}

} // namespace frontlab
