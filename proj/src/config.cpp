#include "frontlab/config.hpp"

#include "frontlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace frontlab {

Domain ExperimentConfig::make_domain() const {
    const double target_hi = std::numbers::sqrt2 * t_final + margin;
    const auto n = static_cast<std::size_t>(std::ceil((target_hi - x_lo) / dx - 1e-9));
    return Domain(x_lo, x_lo + static_cast<double>(n) * dx, n);
}

double ExperimentConfig::x_hi() const { return make_domain().x_hi; }

SampledKernel ExperimentConfig::make_kernel() const { return build_kernel(kernel, dx, truncation_radius); }

namespace {

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Accepts "a,b,c" with "lo:hi:step" range expansion inside elements.
std::vector<double> parse_list(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(std::stod(item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw std::invalid_argument("config: bad range '" + item + "' in " + where);
        const double lo = std::stod(item.substr(0, c1));
        const double hi = std::stod(item.substr(c1 + 1, c2 - c1 - 1));
        const double step = std::stod(item.substr(c2 + 1));
        if (!(step > 0.0) || hi < lo)
            throw std::invalid_argument("config: bad range '" + item + "' in " + where);
        for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    }
    return out;
}

} // namespace

std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    out << "kernel.type=" << kernel_name(kernel) << "\n";
    if (const auto* u = std::get_if<UniformKernel>(&kernel)) {
        out << "kernel.sigma=" << format_double(u->half_width) << "\n";
    } else if (const auto* p = std::get_if<PowerTailKernel>(&kernel)) {
        out << "kernel.alpha=" << format_double(p->alpha) << "\n";
        out << "kernel.core=" << format_double(p->core_halfwidth) << "\n";
    } else if (const auto* g = std::get_if<TruncGaussianKernel>(&kernel)) {
        out << "kernel.scale=" << format_double(g->scale) << "\n";
        out << "kernel.cutoff=" << format_double(g->cutoff) << "\n";
    }
    out << "kernel.truncation_radius=" << format_double(truncation_radius) << "\n";
    out << "domain.x_lo=" << format_double(x_lo) << "\n";
    out << "domain.margin=" << format_double(margin) << "\n";
    out << "time.dx=" << format_double(dx) << "\n";
    out << "time.dt=" << format_double(dt) << "\n";
    out << "time.t_final=" << format_double(t_final) << "\n";
    out << "initial.type="
        << (u0.kind == InitialCondition::Kind::Indicator
                ? "indicator"
                : (u0.kind == InitialCondition::Kind::HalfLine ? "half_line" : "custom"))
        << "\n";
    if (u0.kind == InitialCondition::Kind::Indicator) out << "initial.a=" << format_double(u0.a) << "\n";
    out << "initial.b=" << format_double(u0.b) << "\n";
    out << "initial.amplitude=" << format_double(u0.amplitude) << "\n";
    out << "observe.stride=" << observe_stride << "\n";
    out << "observe.snapshot_times=" << join(snapshot_times) << "\n";
    out << "observe.levels=" << join(levels) << "\n";
    out << "fit.t_min=" << format_double(fit_t_min) << "\n";
    out << "fit.t_max=" << format_double(fit_t_max) << "\n";
    out << "fk.enabled=" << (fk_enabled ? "true" : "false") << "\n";
    out << "fk.probe_time=" << format_double(fk_probe_time) << "\n";
    out << "fk.horizon=" << format_double(fk_horizon) << "\n";
    out << "fk.path_dt=" << format_double(fk_path_dt) << "\n";
    out << "fk.n_paths=" << fk_n_paths << "\n";
    out << "fk.probe_offsets=" << join(fk_probe_offsets) << "\n";
    out << "run.seed=" << seed << "\n";
    return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

void ExperimentConfig::validate() const {
    if (!(dx > 0.0)) throw std::invalid_argument("config: dx must be > 0");
    if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("config: require 0 < dt <= 0.1");
    if (!(t_final > 0.0)) throw std::invalid_argument("config: t_final must be > 0");
    const auto steps = std::llround(t_final / dt);
    if (std::abs(static_cast<double>(steps) * dt - t_final) > 1e-9 * t_final)
        throw std::invalid_argument("config: t_final must be a multiple of dt");
    if (!(margin > 0.0)) throw std::invalid_argument("config: margin must be > 0");
    const Domain domain = make_domain();
    if (truncation_radius > domain.x_hi - domain.x_lo)
        throw std::invalid_argument("config: kernel truncation radius exceeds the domain length");
    if (levels.empty()) throw std::invalid_argument("config: need at least one front level");
    for (double l : levels)
        if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("config: front levels must lie in (0,1)");
    for (double ts : snapshot_times) {
        if (ts < 0.0 || ts > t_final)
            throw std::invalid_argument("config: snapshot times must lie in [0, t_final]");
        const auto k = std::llround(ts / dt);
        if (std::abs(static_cast<double>(k) * dt - ts) > 1e-9 * std::max(1.0, ts))
            throw std::invalid_argument("config: snapshot time " + format_double(ts) +
                                        " is not a multiple of dt");
    }
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
        throw std::invalid_argument("config: snapshot times must be sorted");
    if (!(fit_t_min < fit_t_max)) throw std::invalid_argument("config: fit window requires t_min < t_max");
    if (u0.b >= domain.x_hi)
        throw std::invalid_argument("config: initial support must end inside the domain");
    if (u0.kind == InitialCondition::Kind::Indicator && u0.a < domain.x_lo)
        throw std::invalid_argument("config: initial support starts left of the domain");
    if (fk_enabled) {
        if (fk_n_paths < 100) throw std::invalid_argument("config: fk n_paths must be >= 100");
        if (!(fk_path_dt > 0.0 && fk_path_dt <= fk_horizon))
            throw std::invalid_argument("config: require 0 < fk path_dt <= horizon");
        if (!(fk_horizon > 0.0 && fk_horizon <= fk_probe_time))
            throw std::invalid_argument("config: require 0 < fk horizon <= probe_time");
        if (fk_probe_time > t_final) throw std::invalid_argument("config: fk probe_time beyond t_final");
        if (fk_probe_offsets.empty()) throw std::invalid_argument("config: fk probe set is empty");
    }
    // Building the kernel enforces dx < core and the discarded-mass gate.
    (void)make_kernel();
}

namespace {

struct RawConfig {
    std::map<std::string, std::string> kv; // "section.key" -> value
};

RawConfig parse_ini(std::istream& in) {
    RawConfig raw;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty() || key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": key outside a section");
        if (!raw.kv.emplace(section + "." + key, value).second)
            throw std::invalid_argument("config: duplicate key " + section + "." + key);
    }
    return raw;
}

class Reader {
public:
    explicit Reader(RawConfig raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.kv.count(key) > 0; }

    std::string take(const std::string& key, const std::string& fallback) {
        auto it = raw_.kv.find(key);
        if (it == raw_.kv.end()) return fallback;
        seen_.insert(key);
        return it->second;
    }

    double take_num(const std::string& key, double fallback) {
        auto it = raw_.kv.find(key);
        if (it == raw_.kv.end()) return fallback;
        seen_.insert(key);
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: " + key + " is not a number: '" + it->second + "'");
        }
    }

    bool take_bool(const std::string& key, bool fallback) {
        auto it = raw_.kv.find(key);
        if (it == raw_.kv.end()) return fallback;
        seen_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::invalid_argument("config: " + key + " must be true or false");
    }

    std::vector<double> take_list(const std::string& key, std::vector<double> fallback) {
        auto it = raw_.kv.find(key);
        if (it == raw_.kv.end()) return fallback;
        seen_.insert(key);
        return parse_list(it->second, key);
    }

    void reject_unknown() const {
        for (const auto& [key, value] : raw_.kv)
            if (!seen_.count(key))
                throw std::invalid_argument("config: unknown key '" + key + "'");
    }

private:
    RawConfig raw_;
    std::set<std::string> seen_;
};

} // namespace

ExperimentConfig parse_config(std::istream& in) {
    Reader r(parse_ini(in));
    ExperimentConfig cfg;

    const std::string ktype = r.take("kernel.type", "uniform");
    if (ktype == "uniform") {
        cfg.kernel = UniformKernel{r.take_num("kernel.sigma", 0.5)};
    } else if (ktype == "power_tail") {
        cfg.kernel = PowerTailKernel{r.take_num("kernel.alpha", 1.0), r.take_num("kernel.core", 1.0)};
    } else if (ktype == "trunc_gaussian") {
        cfg.kernel = TruncGaussianKernel{r.take_num("kernel.scale", 1.0), r.take_num("kernel.cutoff", 4.0)};
    } else {
        throw std::invalid_argument("config: unknown kernel.type '" + ktype + "'");
    }
    cfg.truncation_radius = r.take_num("kernel.truncation_radius", cfg.truncation_radius);

    cfg.x_lo = r.take_num("domain.x_lo", cfg.x_lo);
    cfg.margin = r.take_num("domain.margin", cfg.margin);

    cfg.dx = r.take_num("time.dx", cfg.dx);
    cfg.dt = r.take_num("time.dt", cfg.dt);
    cfg.t_final = r.take_num("time.t_final", cfg.t_final);

    const std::string itype = r.take("initial.type", "indicator");
    const double amplitude = r.take_num("initial.amplitude", 1.0);
    if (itype == "indicator") {
        cfg.u0 = InitialCondition::indicator(r.take_num("initial.a", -20.0), r.take_num("initial.b", 0.0),
                                             amplitude);
    } else if (itype == "half_line") {
        cfg.u0 = InitialCondition::half_line(r.take_num("initial.b", 0.0), amplitude);
    } else {
        throw std::invalid_argument("config: unknown initial.type '" + itype + "'");
    }

    cfg.observe_stride = static_cast<std::size_t>(r.take_num("observe.stride", 5));
    cfg.snapshot_times = r.take_list("observe.snapshot_times", {});
    cfg.levels = r.take_list("observe.levels", cfg.levels);

    cfg.fit_t_min = r.take_num("fit.t_min", cfg.t_final / 10.0);
    cfg.fit_t_max = r.take_num("fit.t_max", cfg.t_final);

    cfg.fk_enabled = r.take_bool("fk.enabled", false);
    cfg.fk_probe_time = r.take_num("fk.probe_time", cfg.fk_probe_time);
    cfg.fk_horizon = r.take_num("fk.horizon", cfg.fk_horizon);
    cfg.fk_path_dt = r.take_num("fk.path_dt", cfg.fk_path_dt);
    cfg.fk_n_paths = static_cast<std::size_t>(r.take_num("fk.n_paths", 100000));
    cfg.fk_probe_offsets = r.take_list("fk.probe_offsets", cfg.fk_probe_offsets);

    cfg.seed = static_cast<std::uint64_t>(r.take_num("run.seed", 1));

    r.reject_unknown();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_config(in);
}

} // namespace frontlab
