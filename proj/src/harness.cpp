#include "frontlab/harness.hpp"

#include "frontlab/io.hpp"
#include "frontlab/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace frontlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
    return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

json fit_to_json(const FitReport& f) {
    json j;
    j["model"] = f.model == DelayModel::Log ? "log" : "power";
    if (f.model == DelayModel::Log) {
        j["c"] = f.c;
    } else {
        j["a"] = f.a;
        j["beta"] = f.beta;
    }
    j["b"] = f.b;
    j["rms_residual"] = f.rms_residual;
    j["window"] = {f.t_min, f.t_max};
    j["preferred"] = f.preferred;
    return j;
}

} // namespace

RunResult cmd_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "snapshots");

    const Domain domain = config.make_domain();
    const SampledKernel kernel = config.make_kernel();
    const std::uint64_t hash = config.hash();

    SolverConfig scfg;
    scfg.dt = config.dt;
    scfg.t_final = config.t_final;
    scfg.snapshot_times = config.snapshot_times;
    scfg.observe_stride = config.observe_stride;
    // Heavy-tail truncation radii span the whole domain, so the exhaustion
    // guard is tied to the kernel's intrinsic core scale instead.
    scfg.front_guard = 10.0 * kernel_core_halfwidth(config.kernel);

    const std::string started = iso_now();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result = run(scfg, domain, kernel, config.u0, config.levels);
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
        auto out = open_out(out_dir / "trace.csv");
        write_trace_csv(out, result.trace, config.levels, hash, config.seed);
    }
    {
        auto out = open_out(out_dir / "kernel.csv");
        export_kernel_csv(kernel, out);
    }

    json snap_index = json::array();
    for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
        char name_u[64], name_c[64];
        std::snprintf(name_u, sizeof(name_u), "snap_u_%05zu.bin", i);
        std::snprintf(name_c, sizeof(name_c), "snap_c_%05zu.bin", i);
        {
            auto out = open_out(out_dir / "snapshots" / name_u, std::ios::binary);
            write_snapshot(out, result.snapshots[i].u, hash);
        }
        {
            auto out = open_out(out_dir / "snapshots" / name_c, std::ios::binary);
            write_snapshot(out, result.snapshots[i].conv, hash);
        }
        snap_index.push_back({{"t", result.snapshots[i].u.time},
                              {"u", std::string("snapshots/") + name_u},
                              {"conv", std::string("snapshots/") + name_c}});
    }

    json manifest;
    manifest["config_hash"] = hash;
    manifest["seed"] = config.seed;
    manifest["code_version"] = FRONTLAB_VERSION;
    manifest["started"] = started;
    manifest["finished"] = iso_now();
    manifest["wall_seconds"] = wall_s;
    manifest["domain_exhausted"] = result.domain_exhausted;
    if (result.domain_exhausted) manifest["abort_time"] = result.abort_time;
    manifest["observed_max"] = result.observed_max;
    manifest["worst_clamp_ratio"] = result.worst_clamp_ratio;
    manifest["levels"] = config.levels;
    manifest["snapshots"] = snap_index;
    manifest["config"] = config.canonical();
    open_out(out_dir / "manifest.json") << manifest.dump(2) << "\n";
    return result;
}

FrontAnalysis cmd_front(const fs::path& run_dir, double t_min, double t_max) {
    std::ifstream in(run_dir / "trace.csv");
    if (!in) throw std::runtime_error("cmd_front: missing " + (run_dir / "trace.csv").string());
    const TraceFile tf = read_trace_csv(in);

    std::uint64_t hash = 0;
    {
        std::ifstream mf(run_dir / "manifest.json");
        if (mf) {
            json manifest = json::parse(mf);
            hash = manifest.value("config_hash", 0ull);
        }
    }

    FrontAnalysis analysis;
    analysis.t_min = t_min;
    analysis.t_max = t_max;
    json levels_json = json::array();
    for (std::size_t li = 0; li < tf.levels.size(); ++li) {
        FrontTrace trace;
        trace.level = tf.levels[li];
        for (const auto& row : tf.rows)
            if (std::isfinite(row.front_x[li])) trace.samples.emplace_back(row.t, row.front_x[li]);

        LevelAnalysis la;
        la.level = trace.level;
        la.speed = speed_estimate(trace, t_min, t_max);
        const DelaySeries delays = delay_series(trace);
        la.selection = model_select(delays, t_min, t_max);
        analysis.levels.push_back(la);

        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "%g", trace.level);
        {
            auto out = open_out(run_dir / (std::string("delay_") + suffix + ".csv"));
            write_delay_csv(out, delays, hash);
        }
        {
            auto out = open_out(run_dir / (std::string("delay_lnt_") + suffix + ".csv"));
            out << "# frontlab delay (log abscissa) v1\n# config_hash=" << hash << "\nln_t,d\n";
            for (const auto& [t, d] : delays.samples)
                if (t > 0.0) out << format_double(std::log(t)) << "," << format_double(d) << "\n";
        }

        json jl;
        jl["level"] = la.level;
        jl["speed"] = la.speed;
        jl["log_fit"] = fit_to_json(la.selection.log_fit);
        jl["power_fit"] = fit_to_json(la.selection.power_fit);
        jl["preference"] = la.selection.preference == ModelPreference::Log
                               ? "log"
                               : (la.selection.preference == ModelPreference::Power ? "power"
                                                                                    : "inconclusive");
        levels_json.push_back(jl);
    }

    // Cross-level agreement: same preferred model and exponents within the
    // tolerance the theorems are checked at.
    analysis.levels_agree = !analysis.levels.empty();
    for (std::size_t i = 1; i < analysis.levels.size(); ++i) {
        const auto& a = analysis.levels[0];
        const auto& b = analysis.levels[i];
        if (a.selection.preference != b.selection.preference) analysis.levels_agree = false;
        if (a.selection.preference == ModelPreference::Log &&
            std::abs(a.selection.log_fit.c - b.selection.log_fit.c) > 0.3)
            analysis.levels_agree = false;
        if (a.selection.preference == ModelPreference::Power &&
            std::abs(a.selection.power_fit.beta - b.selection.power_fit.beta) > 0.1)
            analysis.levels_agree = false;
    }

    json out;
    out["config_hash"] = hash;
    out["window"] = {t_min, t_max};
    out["levels"] = levels_json;
    out["levels_agree"] = analysis.levels_agree;
    open_out(run_dir / "fits.json") << out.dump(2) << "\n";
    return analysis;
}

namespace {

std::vector<Snapshot> load_snapshots(const fs::path& run_dir, double t_lo, double t_hi) {
    std::ifstream mf(run_dir / "manifest.json");
    if (!mf) throw std::runtime_error("cmd_fk_validate: missing manifest.json");
    json manifest = json::parse(mf);
    std::vector<Snapshot> snaps;
    for (const auto& entry : manifest.at("snapshots")) {
        const double t = entry.at("t").get<double>();
        if (t < t_lo - 1e-9 || t > t_hi + 1e-9) continue;
        Snapshot s;
        {
            std::ifstream in(run_dir / entry.at("u").get<std::string>(), std::ios::binary);
            if (!in) throw std::runtime_error("cmd_fk_validate: missing snapshot file");
            s.u = read_snapshot(in);
        }
        {
            std::ifstream in(run_dir / entry.at("conv").get<std::string>(), std::ios::binary);
            if (!in) throw std::runtime_error("cmd_fk_validate: missing snapshot file");
            s.conv = read_snapshot(in);
        }
        snaps.push_back(std::move(s));
    }
    return snaps;
}

} // namespace

std::vector<FkProbeRow> cmd_fk_validate(const ExperimentConfig& config, const fs::path& run_dir,
                                        std::size_t n_threads) {
    const double t = config.fk_probe_time;
    const double t_lo = t - config.fk_horizon;
    auto snaps = load_snapshots(run_dir, t_lo, t);
    if (snaps.empty() || snaps.front().u.time > t_lo + 1e-9 || snaps.back().u.time < t - 1e-9)
        throw std::runtime_error("cmd_fk_validate: snapshots do not cover the probe window [" +
                                 std::to_string(t_lo) + ", " + std::to_string(t) + "]");
    FieldOracle oracle(std::move(snaps));

    // Probe set is anchored at the half-height front position at probe time.
    std::ifstream in(run_dir / "trace.csv");
    if (!in) throw std::runtime_error("cmd_fk_validate: missing trace.csv");
    const TraceFile tf = read_trace_csv(in);
    double anchor = std::numeric_limits<double>::quiet_NaN();
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& row : tf.rows) {
        const double gap = std::abs(row.t - t);
        if (gap < best_gap && std::isfinite(row.front_x[0])) {
            best_gap = gap;
            anchor = row.front_x[0];
        }
    }
    if (!std::isfinite(anchor)) throw std::runtime_error("cmd_fk_validate: no front location near probe time");

    FKConfig fk;
    fk.n_paths = config.fk_n_paths;
    fk.path_dt = config.fk_path_dt;
    fk.horizon = config.fk_horizon;
    fk.n_threads = n_threads;

    std::vector<FkProbeRow> rows;
    for (std::size_t i = 0; i < config.fk_probe_offsets.size(); ++i) {
        const double x = anchor + config.fk_probe_offsets[i];
        fk.rng_seed = config.seed + 7919 * (i + 1); // independent streams per probe
        FkProbeRow row;
        row.x = x;
        row.t = t;
        row.grid_u = oracle.u(t, x);
        const FKEstimate est = estimate_u(x, t, oracle, fk);
        row.fk_mean = est.mean;
        row.fk_se = est.standard_error;
        row.z = zscore(est, row.grid_u);
        row.n_paths = est.n_paths;
        row.flagged = est.flagged;
        rows.push_back(row);
    }

    auto out = open_out(run_dir / "probes.csv");
    out << "# frontlab fk probes v1\n# config_hash=" << config.hash() << "\n";
    out << "x,t,grid_u,fk_mean,fk_se,z,n_paths,flagged\n";
    for (const auto& r : rows)
        out << format_double(r.x) << "," << format_double(r.t) << "," << format_double(r.grid_u) << ","
            << format_double(r.fk_mean) << "," << format_double(r.fk_se) << "," << format_double(r.z)
            << "," << r.n_paths << "," << (r.flagged ? 1 : 0) << "\n";
    return rows;
}

BridgeValidation cmd_bridge(const fs::path& out_dir, std::uint64_t seed, std::size_t n_paths,
                            std::size_t n_threads) {
    fs::create_directories(out_dir);
    BridgeValidation v;

    const std::vector<BarrierLine> grid = {
        {1.0, 1.0, 2.0}, {3.0, 2.0, 4.0}, {0.5, 1.0, 1.0}, {2.0, 2.0, 1.0},
        {1.0, 0.5, 0.5}, {2.0, 1.0, 3.0}, {0.5, 0.5, 2.0}, {1.0, 2.0, 2.0},
        {3.0, 1.0, 1.0}, {1.0, 1.0, 0.5}, {2.0, 3.0, 5.0}, {1.5, 1.5, 2.0},
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        BridgeCell cell;
        cell.barrier = grid[i];
        cell.exact = bridge_above_line_exact(grid[i]);
        cell.mc = bridge_stay_mc(grid[i], n_paths, 256, seed + 17 * (i + 1), true, n_threads);
        cell.z = cell.mc.standard_error > 0.0 ? (cell.mc.mean - cell.exact) / cell.mc.standard_error : 0.0;
        v.cells.push_back(cell);
    }

    {
        auto out = open_out(out_dir / "bridge.csv");
        out << "# frontlab bridge validation v1\n";
        out << "y1,y2,t,exact,mc_mean,mc_se,z\n";
        for (const auto& c : v.cells)
            out << format_double(c.barrier.y1) << "," << format_double(c.barrier.y2) << ","
                << format_double(c.barrier.t) << "," << format_double(c.exact) << ","
                << format_double(c.mc.mean) << "," << format_double(c.mc.standard_error) << ","
                << format_double(c.z) << "\n";
    }

    std::vector<double> t_grid;
    for (double t = 0.5; t <= 5.0 + 1e-9; t += 0.5) t_grid.push_back(t);
    const std::vector<TubeSpec> tubes = {
        {1.0, 0.0, 5.0, 1.0},
        {1.0, 1.0, 5.0, 1.0},
        {2.0, 0.0, 5.0, 2.0},
    };
    const std::size_t tube_paths = 4000000;
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        auto rate = tube_decay_rate_mc(tubes[i], t_grid, tube_paths, seed + 1009 * (i + 1), n_threads);
        v.tube_rates.emplace_back(tubes[i], std::move(rate));
    }

    {
        auto out = open_out(out_dir / "tube.csv");
        out << "# frontlab tube decay v1\n";
        out << "b,R0,r,t,mc_mean,mc_se,hits\n";
        for (const auto& [spec, rate] : v.tube_rates)
            for (const auto& pt : rate.points)
                out << format_double(spec.b) << "," << format_double(spec.R0) << ","
                    << format_double(spec.r) << "," << format_double(pt.t) << ","
                    << format_double(pt.mean) << "," << format_double(pt.standard_error) << ","
                    << pt.hits << "\n";
    }
    {
        json j = json::array();
        for (const auto& [spec, rate] : v.tube_rates) {
            const double expected = 0.5 * spec.b * spec.b +
                                    std::numbers::pi * std::numbers::pi / (8.0 * spec.R0 * spec.R0);
            j.push_back({{"b", spec.b},
                         {"R0", spec.R0},
                         {"fitted_rate", rate.slope},
                         {"expected_rate", expected}});
        }
        open_out(out_dir / "tube_rates.json") << j.dump(2) << "\n";
    }
    return v;
}

std::string cmd_report(const fs::path& run_dir) {
    std::vector<std::string> missing;
    if (!fs::exists(run_dir / "manifest.json")) missing.push_back("manifest.json");
    if (!fs::exists(run_dir / "trace.csv")) missing.push_back("trace.csv");
    if (!missing.empty()) {
        std::string msg = "cmd_report: missing artifacts:";
        for (const auto& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }

    std::ifstream mf(run_dir / "manifest.json");
    json manifest = json::parse(mf);

    json report;
    report["config_hash"] = manifest.at("config_hash");
    report["seed"] = manifest.at("seed");
    report["code_version"] = manifest.value("code_version", "unknown");
    report["wall_seconds"] = manifest.value("wall_seconds", 0.0);
    report["observed_max"] = manifest.value("observed_max", 0.0);
    report["domain_exhausted"] = manifest.value("domain_exhausted", false);
    report["config"] = manifest.value("config", "");
    report["bound_ok"] = manifest.value("observed_max", 0.0) <= 10.0;

    std::ostringstream summary;
    summary << "frontlab run report\n";
    summary << "  config_hash: " << manifest.at("config_hash") << "\n";
    summary << "  observed sup u: " << manifest.value("observed_max", 0.0)
            << (report["bound_ok"].get<bool>() ? "  (within bound 10)" : "  (EXCEEDS bound 10)") << "\n";
    if (manifest.value("domain_exhausted", false))
        summary << "  WARNING: domain exhausted at t=" << manifest.value("abort_time", 0.0)
                << "; results are partial\n";

    if (fs::exists(run_dir / "fits.json")) {
        std::ifstream ff(run_dir / "fits.json");
        json fits = json::parse(ff);
        report["fits"] = fits;
        for (const auto& jl : fits.at("levels")) {
            summary << "  level " << jl.at("level").get<double>() << ": speed "
                    << jl.at("speed").get<double>() << ", preference " << jl.at("preference").get<std::string>();
            if (jl.at("preference") == "log")
                summary << " (c=" << jl.at("log_fit").at("c").get<double>() << ")";
            if (jl.at("preference") == "power")
                summary << " (beta=" << jl.at("power_fit").at("beta").get<double>() << ")";
            summary << "\n";
        }
    } else {
        report["fits"] = nullptr;
        summary << "  fits: not computed (run the front command)\n";
    }

    if (fs::exists(run_dir / "probes.csv")) {
        std::ifstream pf(run_dir / "probes.csv");
        std::string line;
        std::size_t n = 0, n_large = 0, n_flagged = 0;
        double max_abs_z = 0.0;
        while (std::getline(pf, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() != 8) continue;
            ++n;
            const double z = std::stod(cells[5]);
            max_abs_z = std::max(max_abs_z, std::abs(z));
            if (std::abs(z) > 3.0) ++n_large;
            if (cells[7] == "1") ++n_flagged;
        }
        report["fk_probes"] = {{"n", n}, {"max_abs_z", max_abs_z}, {"n_abs_z_gt_3", n_large},
                               {"n_flagged", n_flagged}};
        report["fk_ok"] = n > 0 && n_large <= 1 && n_flagged == 0;
        summary << "  fk probes: " << n << " points, max |z| = " << max_abs_z << ", " << n_large
                << " with |z|>3\n";
    } else {
        report["fk_probes"] = nullptr;
        summary << "  fk probes: not computed (run the fk-validate command)\n";
    }

    open_out(run_dir / "report.json") << report.dump(2) << "\n";
    const std::string text = summary.str();
    open_out(run_dir / "summary.txt") << text;
    return text;
}

} // namespace frontlab
