#include "frontlab/config.hpp"
#include "frontlab/harness.hpp"
#include "frontlab/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

// Fit window defaults live in the manifest's config echo ("fit.t_min=...").
double manifest_config_value(const std::filesystem::path& run_dir, const std::string& key,
                             double fallback) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) return fallback;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string needle = key + "=";
    auto pos = text.find(needle);
    if (pos == std::string::npos) return fallback;
    pos += needle.size();
    return std::stod(text.substr(pos, text.find_first_of("\\\"\n", pos) - pos));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: non-local Fisher-KPP front propagation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs/out", run_dir, in_file, out_file;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t threads = 0, paths = 100000;
    double t_min = -1.0, t_max = -1.0;

    auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", threads, "worker thread cap (default: FRONTLAB_THREADS or all cores)");
    };

    auto* sim = app.add_subcommand("simulate", "run a configured experiment");
    sim->add_option("--config", config_path, "experiment config file")->required();
    sim->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_set = true; });
    sim->add_option("--out", out_dir, "output directory");
    add_threads(sim);

    auto* front = app.add_subcommand("front", "fit front traces from a finished run");
    front->add_option("--run", run_dir, "run directory (contains trace.csv)")->required();
    front->add_option("--t-min", t_min, "fit window start (default: config fit.t_min)");
    front->add_option("--t-max", t_max, "fit window end (default: config fit.t_max)");

    auto* fkv = app.add_subcommand("fk-validate", "Feynman-Kac cross-validation of a finished run");
    fkv->add_option("--config", config_path, "experiment config file")->required();
    fkv->add_option("--run", run_dir, "run directory")->required();
    fkv->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_set = true; });
    add_threads(fkv);

    auto* bridge = app.add_subcommand("bridge", "Brownian bridge / tube validation grid");
    bridge->add_option("--out", out_dir, "output directory");
    bridge->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { seed_set = true; });
    bridge->add_option("--paths", paths, "Monte Carlo paths per bridge cell");
    add_threads(bridge);

    auto* report = app.add_subcommand("report", "consolidate run artifacts into a report");
    report->add_option("--run", run_dir, "run directory")->required();

    auto* kexp = app.add_subcommand("kernel-export", "write the sampled kernel as CSV");
    kexp->add_option("--config", config_path, "experiment config file")->required();
    kexp->add_option("--out", out_file, "output CSV path")->required();

    auto* sexp = app.add_subcommand("snapshot-export", "convert a binary snapshot to CSV");
    sexp->add_option("--in", in_file, "snapshot .bin path")->required();
    sexp->add_option("--out", out_file, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto cfg = frontlab::load_config(config_path);
            if (seed_set) cfg.seed = seed;
            const auto result = frontlab::cmd_simulate(cfg, out_dir);
            std::cout << "simulate: " << result.trace.size() << " trace samples, "
                      << result.snapshots.size() << " snapshots, sup u = " << result.observed_max
                      << (result.domain_exhausted ? " [DOMAIN EXHAUSTED - partial results]" : "")
                      << "\n";
            return result.domain_exhausted ? 2 : 0;
        }
        if (front->parsed()) {
            if (t_min < 0.0) t_min = manifest_config_value(run_dir, "fit.t_min", 0.0);
            if (t_max < 0.0) t_max = manifest_config_value(run_dir, "fit.t_max", 0.0);
            const auto analysis = frontlab::cmd_front(run_dir, t_min, t_max);
            for (const auto& la : analysis.levels) {
                std::cout << "level " << la.level << ": speed " << la.speed << ", ";
                switch (la.selection.preference) {
                    case frontlab::ModelPreference::Log:
                        std::cout << "prefers log (c=" << la.selection.log_fit.c << ")";
                        break;
                    case frontlab::ModelPreference::Power:
                        std::cout << "prefers power (beta=" << la.selection.power_fit.beta << ")";
                        break;
                    default: std::cout << "inconclusive";
                }
                std::cout << "\n";
            }
            std::cout << "levels agree: " << (analysis.levels_agree ? "yes" : "no") << "\n";
            return 0;
        }
        if (fkv->parsed()) {
            auto cfg = frontlab::load_config(config_path);
            if (seed_set) cfg.seed = seed;
            const auto rows = frontlab::cmd_fk_validate(cfg, run_dir, threads);
            std::size_t bad = 0;
            for (const auto& r : rows)
                if (std::abs(r.z) > 3.0) ++bad;
            std::cout << "fk-validate: " << rows.size() << " probes, " << bad << " with |z| > 3\n";
            return 0;
        }
        if (bridge->parsed()) {
            const auto v = frontlab::cmd_bridge(out_dir, seed_set ? seed : 1, paths, threads);
            std::size_t bad = 0;
            for (const auto& c : v.cells)
                if (std::abs(c.z) > 3.0) ++bad;
            std::cout << "bridge: " << v.cells.size() << " cells, " << bad << " with |z| > 3\n";
            for (const auto& [spec, rate] : v.tube_rates)
                std::cout << "tube b=" << spec.b << " R0=" << spec.R0 << ": fitted rate " << rate.slope
                          << "\n";
            return 0;
        }
        if (report->parsed()) {
            std::cout << frontlab::cmd_report(run_dir);
            return 0;
        }
        if (kexp->parsed()) {
            const auto cfg = frontlab::load_config(config_path);
            std::ofstream out(out_file);
            if (!out) throw std::runtime_error("cannot write " + out_file);
            frontlab::export_kernel_csv(cfg.make_kernel(), out);
            return 0;
        }
        if (sexp->parsed()) {
            std::ifstream in(in_file, std::ios::binary);
            if (!in) throw std::runtime_error("cannot read " + in_file);
            std::uint64_t hash = 0;
            const auto field = frontlab::read_snapshot(in, &hash);
            std::ofstream out(out_file);
            if (!out) throw std::runtime_error("cannot write " + out_file);
            frontlab::write_field_csv(out, field, hash);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
