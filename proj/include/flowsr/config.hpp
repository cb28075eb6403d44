#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flowsr/forward_model.hpp"
#include "flowsr/fsr_solver.hpp"
#include "flowsr/interp.hpp"
#include "flowsr/metrics.hpp"
#include "flowsr/volume.hpp"

namespace flowsr {

enum class PhantomKind { poiseuille, helix };

inline PhantomKind parse_phantom(const std::string& s) {
    if (s == "poiseuille")
        return PhantomKind::poiseuille;
    if (s == "helix")
        return PhantomKind::helix;
    throw ParameterError("unknown phantom '" + s + "' (expected poiseuille|helix)");
}

inline const char* phantom_name(PhantomKind k) { return k == PhantomKind::poiseuille ? "poiseuille" : "helix"; }

// ---------------------------------------------------------------------------
// Parsing helpers shared by the config file and the CLI

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError(key + ": not a number: '" + s + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParameterError(key + ": not a non-negative integer: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(item);
    return out;
}

/// "a,b,c" -> three positive integers.
inline std::array<std::size_t, 3> parse_triple(const std::string& key, const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3)
        throw ParameterError(key + ": expected three comma-separated values, got '" + s + "'");
    std::array<std::size_t, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = std::size_t(parse_u64(key, parts[i]));
        if (out[i] == 0)
            throw ParameterError(key + ": values must be >= 1");
    }
    return out;
}

inline std::array<double, 3> parse_real_triple(const std::string& key, const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3)
        throw ParameterError(key + ": expected three comma-separated values, got '" + s + "'");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string join(const std::array<std::size_t, 3>& v) {
    return std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]);
}

inline std::string join(const std::array<double, 3>& v) {
    return format_exact(v[0]) + "," + format_exact(v[1]) + "," + format_exact(v[2]);
}

// ---------------------------------------------------------------------------

/// Everything an end-to-end experiment needs. Serialized as flat key=value lines.
struct RunConfig {
    PhantomKind phantom = PhantomKind::poiseuille;
    std::array<std::size_t, 3> dims{64, 64, 64};
    std::size_t frames = 5;
    double venc = 150.0;                // cm/s
    double vmax = 100.0;                // peak centerline speed, cm/s
    double radius_fraction = 0.3;       // tube radius / smallest transverse dimension
    double magnitude_in = 1.0;
    double magnitude_out = 0.0;
    Decimation factor{4, 4, 4};
    KernelChoice kernel;
    std::optional<double> noise_psnr_db = 15.0;
    std::uint64_t seed = 1;
    double tau = kDefaultTau;
    PriorMode prior = PriorMode::trilinear;
    InterpMethod baseline = InterpMethod::trilinear;
    double mask_threshold = 0.1;
    std::string out_dir = "flowsr_run";

    [[nodiscard]] Grid3 hr_grid() const { return Grid3(dims[0], dims[1], dims[2]); }
    [[nodiscard]] DegradationConfig degradation() const { return {factor, kernel, noise_psnr_db, seed}; }
};

/// Checks every field before any compute starts.
inline void validate(const RunConfig& c) {
    const Grid3 g = c.hr_grid();
    decimate(g, c.factor);
    if (c.frames < 1)
        throw ParameterError("frames must be >= 1");
    require_venc(c.venc);
    if (!(c.vmax > 0.0) || c.vmax >= c.venc)
        throw ParameterError("vmax must be in (0, venc)");
    if (!(c.radius_fraction > 0.0 && c.radius_fraction <= 0.5))
        throw ParameterError("radius_fraction must be in (0, 0.5]");
    if (!(c.tau > 0.0))
        throw ParameterError("tau must be > 0");
    if (!(c.mask_threshold > 0.0 && c.mask_threshold < 1.0))
        throw ParameterError("mask_threshold must be in (0, 1)");
    for (double f : c.kernel.fwhm)
        if (!(f > 0.0))
            throw ParameterError("fwhm must be > 0");
    if (c.noise_psnr_db && !std::isfinite(*c.noise_psnr_db))
        throw ParameterError("noise_psnr must be finite or 'none'");
    if (c.out_dir.empty())
        throw ParameterError("out_dir must not be empty");
}

inline std::string to_text(const RunConfig& c) {
    std::ostringstream os;
    os << "phantom=" << phantom_name(c.phantom) << '\n'
       << "dims=" << join(c.dims) << '\n'
       << "frames=" << c.frames << '\n'
       << "venc=" << format_exact(c.venc) << '\n'
       << "vmax=" << format_exact(c.vmax) << '\n'
       << "radius_fraction=" << format_exact(c.radius_fraction) << '\n'
       << "magnitude_in=" << format_exact(c.magnitude_in) << '\n'
       << "magnitude_out=" << format_exact(c.magnitude_out) << '\n'
       << "factor=" << join(c.factor.rates()) << '\n'
       << "kernel=" << kernel_name(c.kernel.type) << '\n'
       << "fwhm=" << join(c.kernel.fwhm) << '\n'
       << "noise_psnr=" << (c.noise_psnr_db ? format_exact(*c.noise_psnr_db) : std::string("none")) << '\n'
       << "seed=" << c.seed << '\n'
       << "tau=" << format_exact(c.tau) << '\n'
       << "prior=" << prior_name(c.prior) << '\n'
       << "baseline=" << method_name(c.baseline) << '\n'
       << "mask_threshold=" << format_exact(c.mask_threshold) << '\n'
       << "out_dir=" << c.out_dir << '\n';
    return os.str();
}

/// Applies one key=value assignment.
inline void set_field(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "phantom") c.phantom = parse_phantom(value);
    else if (key == "dims") c.dims = parse_triple(key, value);
    else if (key == "frames") c.frames = std::size_t(parse_u64(key, value));
    else if (key == "venc") c.venc = parse_double(key, value);
    else if (key == "vmax") c.vmax = parse_double(key, value);
    else if (key == "radius_fraction") c.radius_fraction = parse_double(key, value);
    else if (key == "magnitude_in") c.magnitude_in = parse_double(key, value);
    else if (key == "magnitude_out") c.magnitude_out = parse_double(key, value);
    else if (key == "factor") {
        const auto f = parse_triple(key, value);
        c.factor = Decimation{f[0], f[1], f[2]};
    } else if (key == "kernel") c.kernel.type = parse_kernel(value);
    else if (key == "fwhm") c.kernel.fwhm = parse_real_triple(key, value);
    else if (key == "noise_psnr") {
        if (value == "none") c.noise_psnr_db.reset();
        else c.noise_psnr_db = parse_double(key, value);
    } else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "tau") c.tau = parse_double(key, value);
    else if (key == "prior") c.prior = parse_prior(value);
    else if (key == "baseline") c.baseline = parse_interp(value);
    else if (key == "mask_threshold") c.mask_threshold = parse_double(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else throw ParameterError("unknown config key '" + key + "'");
}

/// Parses key=value lines; blank lines and lines starting with '#' are ignored. Keys not present
/// keep their defaults.
inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        try {
            set_field(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw ParameterError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace flowsr
