#include "frontlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace frontlab {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace,
                     const std::vector<double>& levels, std::uint64_t config_hash,
                     std::uint64_t seed) {
    out << "# frontlab trace v1\n";
    out << "# config_hash=" << config_hash << "\n";
    out << "# seed=" << seed << "\n";
    out << "t";
    for (double l : levels) out << ",X_level_" << format_double(l);
    out << ",max_u,probe_lemma25\n";
    for (const auto& row : trace) {
        out << format_double(row.t);
        for (double x : row.front_x) out << "," << format_double(x);
        out << "," << format_double(row.max_u) << "," << format_double(row.probe_lemma25) << "\n";
    }
}

TraceFile read_trace_csv(std::istream& in) {
    TraceFile tf;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (!have_header) {
            std::vector<std::string> names;
            while (std::getline(ss, cell, ',')) names.push_back(cell);
            if (names.empty() || names.front() != "t")
                throw std::runtime_error("trace csv: malformed header");
            for (const auto& name : names) {
                constexpr const char* prefix = "X_level_";
                if (name.rfind(prefix, 0) == 0) tf.levels.push_back(std::stod(name.substr(8)));
            }
            have_header = true;
            continue;
        }
        std::vector<double> vals;
        while (std::getline(ss, cell, ','))
            vals.push_back(cell == "nan" || cell == "-nan" ? std::numeric_limits<double>::quiet_NaN()
                                                           : std::stod(cell));
        if (vals.size() != tf.levels.size() + 3)
            throw std::runtime_error("trace csv: row width does not match header");
        TraceRow row;
        row.t = vals[0];
        for (std::size_t i = 0; i < tf.levels.size(); ++i) row.front_x.push_back(vals[1 + i]);
        row.max_u = vals[tf.levels.size() + 1];
        row.probe_lemma25 = vals[tf.levels.size() + 2];
        tf.rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error("trace csv: empty file");
    return tf;
}

void write_field_csv(std::ostream& out, const ScalarField& field, std::uint64_t config_hash) {
    out << "# frontlab field v1\n";
    out << "# config_hash=" << config_hash << "\n";
    out << "# t=" << format_double(field.time) << "\n";
    out << "x,u\n";
    for (std::size_t i = 0; i < field.domain.n; ++i)
        out << format_double(field.domain.x(i)) << "," << format_double(field.values[i]) << "\n";
}

namespace {

constexpr std::uint32_t kSnapshotMagic = 0x464C534E;
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot: truncated file");
    return v;
}

} // namespace

void write_snapshot(std::ostream& out, const ScalarField& field, std::uint64_t config_hash) {
    put(out, kSnapshotMagic);
    put(out, kSnapshotVersion);
    put(out, config_hash);
    put(out, static_cast<std::uint64_t>(field.domain.n));
    put(out, field.domain.dx());
    put(out, field.domain.x_lo);
    put(out, field.time);
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

ScalarField read_snapshot(std::istream& in, std::uint64_t* config_hash) {
    if (get<std::uint32_t>(in) != kSnapshotMagic) throw std::runtime_error("snapshot: bad magic");
    if (get<std::uint32_t>(in) != kSnapshotVersion) throw std::runtime_error("snapshot: unknown version");
    const auto hash = get<std::uint64_t>(in);
    if (config_hash) *config_hash = hash;
    const auto n = static_cast<std::size_t>(get<std::uint64_t>(in));
    const double dx = get<double>(in);
    const double x_lo = get<double>(in);
    const double t = get<double>(in);
    if (n < 16 || n > (1ull << 32)) throw std::runtime_error("snapshot: implausible cell count");
    ScalarField f(Domain(x_lo, x_lo + static_cast<double>(n) * dx, n), 0.0, t);
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot: truncated values");
    return f;
}

void write_delay_csv(std::ostream& out, const DelaySeries& series, std::uint64_t config_hash) {
    out << "# frontlab delay v1\n";
    out << "# config_hash=" << config_hash << "\n";
    out << "t,d\n";
    for (const auto& [t, d] : series.samples)
        out << format_double(t) << "," << format_double(d) << "\n";
}

} // namespace frontlab
