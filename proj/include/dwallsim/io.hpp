#ifndef DWALLSIM_IO_HPP
#define DWALLSIM_IO_HPP

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dwallsim/applied_field.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/integrator.hpp"
#include "dwallsim/params.hpp"

namespace dwallsim {

// ---------------------------------------------------------------------------------------------
// Number formatting shared by every writer: shortest text that reads back to the same double
// is not portable, so use 17 significant digits.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::optional<double> parse_double(const std::string& s) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    if (b == e) return std::nullopt;
    if (*b == '+') ++b;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------------------------
// Run configuration

struct GridSpec {
    double x_min = -40.0;
    double x_max = 40.0;
    std::size_t n = 2001;

    Grid1D grid() const { return Grid1D::make(x_min, x_max, n); }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct OutputSpec {
    std::string dir = "out";
    std::size_t stride = 100;
    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Experiment selector and its free-form parameters (validated against a whitelist).
struct ExperimentSpec {
    std::string name = "simulate";
    std::map<std::string, std::string> values;

    std::optional<double> number(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        return parse_double(it->second);
    }
    double number_or(const std::string& key, double fallback) const { return number(key).value_or(fallback); }
    std::string text_or(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

struct RunConfig {
    double alpha = 0.5;
    double gamma = 0.0;
    AppliedField field = AppliedField::constant(0.0);
    GridSpec grid{};
    SimConfig sim{};
    ExperimentSpec experiment{};
    OutputSpec output{};
    std::uint64_t seed = 1;

    ModelParams params() const { return ModelParams(alpha, gamma, field); }
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"model", {"alpha", "gamma"}},
        {"field", {"kind", "value", "values"}},
        {"grid", {"x_min", "x_max", "n"}},
        {"sim", {"t_end", "cfl", "dt", "scheme", "boundary"}},
        {"experiment",
         {"name", "seed", "initial", "initial_file", "sigma1", "sigma2", "sigma2_minus", "y0", "phi0", "L", "delta",
          "y_plus", "phi_plus", "y_minus", "phi_minus", "k", "lambda", "R", "t_max", "dt_out", "amplitudes",
          "snapshot_interval", "tail_fraction", "window_fraction", "tol", "max_iter"}},
        {"output", {"dir", "stride"}},
    };
    return schema;
}

inline Error validation(const std::string& key, const std::string& why) {
    return Error(ErrorCode::ValidationError, key + ": " + why);
}

inline double require_number(const boost::property_tree::ptree& sec, const std::string& section,
                             const std::string& key, std::optional<double> fallback = std::nullopt) {
    const auto v = sec.get_optional<std::string>(key);
    if (!v) {
        if (fallback) return *fallback;
        throw validation(key, "missing required key in [" + section + "]");
    }
    const auto d = parse_double(*v);
    if (!d || !std::isfinite(*d)) throw validation(key, "not a finite number: '" + *v + "'");
    return *d;
}

inline std::vector<AppliedField::Breakpoint> parse_breakpoints(const std::string& text) {
    std::vector<AppliedField::Breakpoint> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw validation("values", "expected t:h pairs, got '" + item + "'");
        const auto t = parse_double(item.substr(0, colon));
        const auto h = parse_double(item.substr(colon + 1));
        if (!t || !h) throw validation("values", "bad breakpoint '" + item + "'");
        out.push_back({*t, *h});
    }
    if (out.empty()) throw validation("values", "no breakpoints");
    return out;
}

}  // namespace detail

/// Parses the INI-style run configuration. Syntax errors raise PARSE_ERROR with the line number;
/// semantic problems raise VALIDATION_ERROR naming the offending key.
inline RunConfig parse_config_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    const auto& schema = detail::config_schema();
    for (const auto& [section, body] : tree) {
        const auto it = schema.find(section);
        if (it == schema.end()) {
            throw detail::validation(section, body.empty() && !body.data().empty() ? "key outside any section"
                                                                                     : "unknown section");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw detail::validation(key, "unknown key in [" + section + "]");
        }
    }
    RunConfig cfg;
    const pt::ptree empty;
    auto section = [&](const char* name) -> const pt::ptree& {
        const auto c = tree.get_child_optional(name);
        return c ? *c : empty;
    };

    const auto& model = section("model");
    cfg.alpha = detail::require_number(model, "model", "alpha");
    cfg.gamma = detail::require_number(model, "model", "gamma");
    if (!(cfg.alpha > 0.0)) throw detail::validation("alpha", "must be > 0");
    if (!(std::abs(cfg.gamma) < 1.0)) throw detail::validation("gamma", "must satisfy |gamma| < 1");

    const auto& field = section("field");
    const std::string kind = field.get<std::string>("kind", "constant");
    try {
        if (kind == "constant") {
            cfg.field = AppliedField::constant(detail::require_number(field, "field", "value", 0.0));
        } else if (kind == "piecewise" || kind == "ramp") {
            const auto values = field.get_optional<std::string>("values");
            if (!values) throw detail::validation("values", "required for kind=" + kind);
            const auto pts = detail::parse_breakpoints(*values);
            cfg.field = kind == "piecewise" ? AppliedField::piecewise(pts) : AppliedField::ramp(pts);
        } else {
            throw detail::validation("kind", "expected constant|piecewise|ramp, got '" + kind + "'");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ValidationError) throw;
        throw detail::validation("values", e.what());
    }

    const auto& grid = section("grid");
    cfg.grid.x_min = detail::require_number(grid, "grid", "x_min");
    cfg.grid.x_max = detail::require_number(grid, "grid", "x_max");
    const double n = detail::require_number(grid, "grid", "n");
    if (!(cfg.grid.x_max > cfg.grid.x_min)) throw detail::validation("x_max", "must exceed x_min");
    if (n < 3 || n != std::floor(n) || n > 1e8) throw detail::validation("n", "must be an integer >= 3");
    cfg.grid.n = static_cast<std::size_t>(n);

    const auto& sim = section("sim");
    cfg.sim.t_end = detail::require_number(sim, "sim", "t_end");
    if (!(cfg.sim.t_end > 0.0)) throw detail::validation("t_end", "must be > 0");
    cfg.sim.cfl = detail::require_number(sim, "sim", "cfl", 0.2);
    if (!(cfg.sim.cfl > 0.0)) throw detail::validation("cfl", "must be > 0");
    const std::string dt = sim.get<std::string>("dt", "auto");
    if (dt != "auto" && dt != "AUTO") {
        const auto d = parse_double(dt);
        if (!d || !(*d > 0.0)) throw detail::validation("dt", "must be a positive number or auto");
        cfg.sim.dt = *d;
    }
    const std::string scheme = sim.get<std::string>("scheme", "RK4_PROJECT");
    if (scheme == "RK4_PROJECT") cfg.sim.scheme = Scheme::Rk4Project;
    else if (scheme == "HEUN_PROJECT") cfg.sim.scheme = Scheme::HeunProject;
    else throw detail::validation("scheme", "expected RK4_PROJECT|HEUN_PROJECT");
    const std::string boundary = sim.get<std::string>("boundary", "NEUMANN");
    if (boundary == "NEUMANN") cfg.sim.boundary = Boundary::Neumann;
    else if (boundary == "CLAMP_E1") cfg.sim.boundary = Boundary::ClampE1;
    else throw detail::validation("boundary", "expected NEUMANN|CLAMP_E1");

    const auto& exp = section("experiment");
    for (const auto& [key, value] : exp) cfg.experiment.values[key] = value.data();
    cfg.experiment.name = cfg.experiment.text_or("name", "simulate");
    cfg.experiment.values.erase("name");
    if (exp.get_optional<std::string>("seed")) {
        const double s = detail::require_number(exp, "experiment", "seed");
        if (s < 0 || s != std::floor(s) || s > 9.0e15) throw detail::validation("seed", "must be a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.experiment.values.erase("seed");
    }
    for (const auto& [key, value] : cfg.experiment.values) {
        static const std::set<std::string> textual{"initial", "initial_file", "amplitudes"};
        if (!textual.count(key) && !parse_double(value)) throw detail::validation(key, "not a number: '" + value + "'");
    }

    const auto& out = section("output");
    cfg.output.dir = out.get<std::string>("dir", "out");
    const double stride = detail::require_number(out, "output", "stride", 100.0);
    if (stride < 1 || stride != std::floor(stride)) throw detail::validation("stride", "must be an integer >= 1");
    cfg.output.stride = static_cast<std::size_t>(stride);
    cfg.sim.snapshot_stride = cfg.output.stride;
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream o;
    o << "[model]\nalpha = " << format_double(cfg.alpha) << "\ngamma = " << format_double(cfg.gamma) << "\n\n[field]\n";
    switch (cfg.field.kind()) {
        case AppliedField::Kind::Constant: o << "kind = constant\nvalue = " << format_double(cfg.field(0.0)) << "\n"; break;
        case AppliedField::Kind::Piecewise:
        case AppliedField::Kind::Ramp: {
            o << "kind = " << (cfg.field.kind() == AppliedField::Kind::Ramp ? "ramp" : "piecewise") << "\nvalues = ";
            const auto& pts = cfg.field.points();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                o << (i ? ", " : "") << format_double(pts[i].t) << ":" << format_double(pts[i].h);
            }
            o << "\n";
            break;
        }
        case AppliedField::Kind::Custom: throw Error(ErrorCode::ValidationError, "field: custom fields cannot be serialized");
    }
    o << "\n[grid]\nx_min = " << format_double(cfg.grid.x_min) << "\nx_max = " << format_double(cfg.grid.x_max)
      << "\nn = " << cfg.grid.n << "\n\n[sim]\nt_end = " << format_double(cfg.sim.t_end)
      << "\ncfl = " << format_double(cfg.sim.cfl) << "\ndt = " << (cfg.sim.dt ? format_double(*cfg.sim.dt) : "auto")
      << "\nscheme = " << to_string(cfg.sim.scheme) << "\nboundary = " << to_string(cfg.sim.boundary)
      << "\n\n[experiment]\nname = " << cfg.experiment.name << "\nseed = " << cfg.seed << "\n";
    for (const auto& [k, v] : cfg.experiment.values) o << k << " = " << v << "\n";
    o << "\n[output]\ndir = " << cfg.output.dir << "\nstride = " << cfg.output.stride << "\n";
    return o.str();
}

// ---------------------------------------------------------------------------------------------
// Snapshots

enum class SnapshotFormat { Text, Binary };

inline std::string snapshot_header(const Grid1D& grid, SnapshotFormat fmt) {
    return std::string("DWALLSIM v1") + (fmt == SnapshotFormat::Binary ? " binary" : "") +
           " n=" + std::to_string(grid.n) + " x_min=" + format_double(grid.x_min) + " dx=" + format_double(grid.dx);
}

/// Header line, then n rows "x m1 m2 m3" (text) or 3n little-endian float64 values (binary).
inline void write_snapshot(std::span<const Vec3> values, const Grid1D& grid, const std::string& path,
                           SnapshotFormat fmt = SnapshotFormat::Text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << snapshot_header(grid, fmt) << "\n";
    if (fmt == SnapshotFormat::Text) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            out << format_double(grid.x(i)) << ' ' << format_double(values[i].x) << ' ' << format_double(values[i].y)
                << ' ' << format_double(values[i].z) << '\n';
        }
    } else {
        static_assert(std::endian::native == std::endian::little, "binary snapshots assume a little-endian host");
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double row[3] = {values[i].x, values[i].y, values[i].z};
            out.write(reinterpret_cast<const char*>(row), sizeof row);
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline void write_snapshot(const SpinField& m, const std::string& path, SnapshotFormat fmt = SnapshotFormat::Text) {
    write_snapshot(m.values(), m.grid(), path, fmt);
}

/// Reads either snapshot variant and re-validates | |m| - 1 | <= 1e-10 on every row.
inline SpinField read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorCode::FormatError, "empty snapshot " + path);
    std::istringstream hs(header);
    std::string magic, version, tok;
    hs >> magic >> version;
    if (magic != "DWALLSIM" || version != "v1") throw Error(ErrorCode::FormatError, "bad snapshot header: " + header);
    SnapshotFormat fmt = SnapshotFormat::Text;
    std::optional<double> n, x_min, dx;
    while (hs >> tok) {
        if (tok == "binary") {
            fmt = SnapshotFormat::Binary;
            continue;
        }
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::FormatError, "bad header field '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const auto v = parse_double(tok.substr(eq + 1));
        if (!v) throw Error(ErrorCode::FormatError, "bad header value '" + tok + "'");
        if (key == "n") n = v;
        else if (key == "x_min") x_min = v;
        else if (key == "dx") dx = v;
        else throw Error(ErrorCode::FormatError, "unknown header field '" + key + "'");
    }
    if (!n || !x_min || !dx || *n < 3 || *n != std::floor(*n) || !(*dx > 0.0)) {
        throw Error(ErrorCode::FormatError, "incomplete snapshot header: " + header);
    }
    const Grid1D grid{*x_min, *dx, static_cast<std::size_t>(*n)};
    Field3 values(grid.n);
    if (fmt == SnapshotFormat::Text) {
        std::string line;
        for (std::size_t i = 0; i < grid.n; ++i) {
            if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "missing row " + std::to_string(i + 1));
            std::istringstream ls(line);
            std::string f[4], extra;
            if (!(ls >> f[0] >> f[1] >> f[2] >> f[3]) || (ls >> extra)) {
                throw Error(ErrorCode::FormatError, "row " + std::to_string(i + 1) + " needs 4 columns");
            }
            std::optional<double> v[4];
            for (int c = 0; c < 4; ++c) {
                v[c] = parse_double(f[c]);
                if (!v[c]) throw Error(ErrorCode::FormatError, "row " + std::to_string(i + 1) + " has a bad number");
            }
            values[i] = Vec3{*v[1], *v[2], *v[3]};
        }
        std::string rest;
        while (std::getline(in, rest)) {
            if (rest.find_first_not_of(" \t\r") != std::string::npos) {
                throw Error(ErrorCode::FormatError, "trailing data after " + std::to_string(grid.n) + " rows");
            }
        }
    } else {
        for (std::size_t i = 0; i < grid.n; ++i) {
            double row[3];
            if (!in.read(reinterpret_cast<char*>(row), sizeof row)) {
                throw Error(ErrorCode::FormatError, "binary snapshot truncated at row " + std::to_string(i + 1));
            }
            values[i] = Vec3{row[0], row[1], row[2]};
        }
        if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::FormatError, "trailing binary data");
    }
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double dev = std::abs(norm(values[i]) - 1.0);
        if (!(dev <= 1e-10)) {
            throw Error(ErrorCode::NormViolation,
                        "row " + std::to_string(i + 1) + " has |m| = " + format_double(norm(values[i])));
        }
    }
    return SpinField::validated(grid, std::move(values), 1e-10);
}

// ---------------------------------------------------------------------------------------------
// Series

using SeriesColumns = std::map<std::string, std::vector<double>>;

/// CSV with a header row; "t" first (when present), the remaining columns in lexicographic order.
inline std::string format_series(const SeriesColumns& columns) {
    if (columns.empty()) throw Error(ErrorCode::ValidationError, "series: no columns");
    const std::size_t rows = columns.begin()->second.size();
    for (const auto& [name, col] : columns) {
        if (col.size() != rows) throw Error(ErrorCode::ValidationError, "series: column " + name + " has a different length");
        if (name.find_first_of(",\n\"") != std::string::npos) {
            throw Error(ErrorCode::ValidationError, "series: column name '" + name + "' needs quoting");
        }
    }
    std::vector<std::string> order;
    if (columns.count("t")) order.push_back("t");
    for (const auto& [name, col] : columns)
        if (name != "t") order.push_back(name);
    std::string out;
    for (std::size_t c = 0; c < order.size(); ++c) out += (c ? "," : "") + order[c];
    out += "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < order.size(); ++c) out += (c ? "," : "") + format_double(columns.at(order[c])[r]);
        out += "\n";
    }
    return out;
}

inline void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline void write_series(const SeriesColumns& columns, const std::string& path) {
    write_text(format_series(columns), path);
}

}  // namespace dwallsim

#endif  // DWALLSIM_IO_HPP
