#pragma once

#include "frontlab/bridge.hpp"
#include "frontlab/config.hpp"
#include "frontlab/feynman_kac.hpp"
#include "frontlab/front.hpp"
#include "frontlab/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace frontlab {

// Runs the experiment and persists trace.csv, snapshots/*.bin, kernel.csv
// and manifest.json under out_dir. Returns the in-memory result as well so
// callers can keep analyzing without re-reading the artifacts.
RunResult cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct LevelAnalysis {
    double level = 0.0;
    double speed = 0.0;
    ModelSelection selection;
};

struct FrontAnalysis {
    std::vector<LevelAnalysis> levels;
    bool levels_agree = false;
    double t_min = 0.0;
    double t_max = 0.0;
};

// Reads trace.csv from a run directory, fits every recorded level and writes
// fits.json plus plot-ready (t, d) and (ln t, d) CSVs.
FrontAnalysis cmd_front(const std::filesystem::path& run_dir, double t_min, double t_max);

struct FkProbeRow {
    double x = 0.0;
    double t = 0.0;
    double grid_u = 0.0;
    double fk_mean = 0.0;
    double fk_se = 0.0;
    double z = 0.0;
    std::size_t n_paths = 0;
    bool flagged = false;
};

// Feynman-Kac cross-validation against the stored snapshots; writes
// probes.csv and returns the rows.
std::vector<FkProbeRow> cmd_fk_validate(const ExperimentConfig& config,
                                        const std::filesystem::path& run_dir,
                                        std::size_t n_threads = 0);

struct BridgeCell {
    BarrierLine barrier;
    double exact = 0.0;
    EstimateWithCI mc;
    double z = 0.0;
};

struct BridgeValidation {
    std::vector<BridgeCell> cells;
    std::vector<std::pair<TubeSpec, TubeRateResult>> tube_rates;
};

// Default validation plan: 12-cell exact-vs-MC bridge grid plus the three
// tube decay-rate cases. Writes bridge.csv and tube.csv.
BridgeValidation cmd_bridge(const std::filesystem::path& out_dir, std::uint64_t seed,
                            std::size_t n_paths = 100000, std::size_t n_threads = 0);

// Consolidates run artifacts into report.json and summary.txt. Missing
// required artifacts are enumerated in the thrown error.
std::string cmd_report(const std::filesystem::path& run_dir);

} // namespace frontlab
