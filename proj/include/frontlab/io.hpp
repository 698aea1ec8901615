#pragma once

#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace frontlab {

// FNV-1a; stable across platforms so config hashes written into output
// headers are comparable between runs.
std::uint64_t fnv1a64(const std::string& data);

std::string format_double(double v); // shortest round-trip decimal (%.17g)

// Trace CSV: header comments (# config_hash=..., # seed=...), then
// t,X_level_<l1>,...,max_u,probe_lemma25 with one row per observation.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace,
                     const std::vector<double>& levels, std::uint64_t config_hash,
                     std::uint64_t seed);

struct TraceFile {
    std::vector<double> levels;
    std::vector<TraceRow> rows;
};

TraceFile read_trace_csv(std::istream& in);

void write_field_csv(std::ostream& out, const ScalarField& field, std::uint64_t config_hash);

// Binary snapshot, little-endian:
//   magic   u32 = 0x464C534E ("NSLF" on disk)
//   version u32 = 1
//   config_hash u64
//   n       u64
//   dx      f64
//   x_lo    f64
//   t       f64
//   values  n * f64
void write_snapshot(std::ostream& out, const ScalarField& field, std::uint64_t config_hash);
ScalarField read_snapshot(std::istream& in, std::uint64_t* config_hash = nullptr);

void write_delay_csv(std::ostream& out, const DelaySeries& series, std::uint64_t config_hash);

} // namespace frontlab
