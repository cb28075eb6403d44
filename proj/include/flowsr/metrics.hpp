#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flowsr/volume.hpp"

namespace flowsr {

/// Voxels where flow metrics are evaluated.
struct FlowMask {
    Grid3 grid;
    std::vector<std::uint8_t> voxels;

    [[nodiscard]] std::size_t count() const {
        std::size_t c = 0;
        for (auto v : voxels)
            c += v ? 1 : 0;
        return c;
    }
    [[nodiscard]] bool operator[](std::size_t i) const { return voxels[i] != 0; }
};

inline void require_nonempty(const FlowMask& mask) {
    if (mask.count() == 0)
        throw EmptyMaskError("flow mask selects no voxels");
}

/// true where magnitude >= threshold_fraction * max(magnitude).
inline FlowMask make_mask(const ScalarVolume& magnitude, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw ParameterError("mask threshold fraction must be in (0, 1)");
    double peak = 0.0;
    for (double a : magnitude.data())
        peak = std::max(peak, a);
    if (!(peak > 0.0))
        throw EmptyMaskError("magnitude image is zero everywhere");
    FlowMask mask{magnitude.grid(), std::vector<std::uint8_t>(magnitude.size())};
    const double cut = threshold_fraction * peak;
    for (std::size_t i = 0; i < magnitude.size(); ++i)
        mask.voxels[i] = magnitude[i] >= cut ? 1 : 0;
    require_nonempty(mask);
    return mask;
}

/// 10 log10(peak^2 / MSE) over masked voxels; +inf when est equals ref on the mask.
/// peak defaults to max |ref| over the mask.
inline double psnr(const ScalarVolume& est, const ScalarVolume& ref, const FlowMask& mask,
                   std::optional<double> peak = std::nullopt) {
    require_same_shape(est, ref.grid(), "psnr");
    if (!mask.grid.same_shape(ref.grid()))
        throw DimensionError("psnr: mask grid does not match");
    require_nonempty(mask);
    double p = 0.0;
    if (peak) {
        p = *peak;
    } else {
        for (std::size_t i = 0; i < ref.size(); ++i)
            if (mask[i])
                p = std::max(p, std::abs(ref[i]));
    }
    if (!(p > 0.0))
        throw ParameterError("psnr: peak must be > 0");
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (mask[i]) {
            const double e = est[i] - ref[i];
            sse += e * e;
            ++n;
        }
    if (sse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p * p / (sse / double(n)));
}

enum class MreNormalization {
    peak_speed,  // divide by max reference speed over the mask
    per_voxel,   // divide each error by its own reference speed (voxels at rest are skipped)
};

/// Largest reference speed |(u, v, w)| over the mask.
inline double peak_speed(const VelocityFrame& ref, const FlowMask& mask) {
    double peak = 0.0;
    for (std::size_t i = 0; i < ref.u.size(); ++i)
        if (mask[i])
            peak = std::max(peak, std::hypot(ref.u[i], ref.v[i], ref.w[i]));
    return peak;
}

/// 100 * mean over the mask of |v_est - v_ref| / V_peak, using 3-vector norms.
inline double mean_relative_error(const VelocityFrame& est, const VelocityFrame& ref, const FlowMask& mask,
                                  MreNormalization norm = MreNormalization::peak_speed) {
    for (Channel c : kChannels)
        require_same_shape(est.velocity(c), ref.grid(), "mean_relative_error");
    if (!mask.grid.same_shape(ref.grid()))
        throw DimensionError("mean_relative_error: mask grid does not match");
    require_nonempty(mask);
    const double vpeak = peak_speed(ref, mask);
    if (!(vpeak > 0.0))
        throw ParameterError("mean_relative_error: reference speed is zero over the mask");
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.u.size(); ++i) {
        if (!mask[i])
            continue;
        const double err = std::hypot(est.u[i] - ref.u[i], est.v[i] - ref.v[i], est.w[i] - ref.w[i]);
        if (norm == MreNormalization::peak_speed) {
            acc += err / vpeak;
            ++n;
        } else {
            const double speed = std::hypot(ref.u[i], ref.v[i], ref.w[i]);
            if (speed > 0.0) {
                acc += err / speed;
                ++n;
            }
        }
    }
    return n ? 100.0 * acc / double(n) : 0.0;
}

// ---------------------------------------------------------------------------
// Report

struct EvalRecord {
    std::size_t frame = 0;
    std::string channel;  // u, v, w, or uvw for the vector error
    std::string method;
    std::string metric;   // psnr_db or mre_percent
    double value = 0.0;
};

struct EvalReport {
    std::vector<EvalRecord> records;

    /// Mean of `metric` over frames for one method and channel.
    [[nodiscard]] double mean(const std::string& method, const std::string& channel, const std::string& metric) const {
        double acc = 0.0;
        std::size_t n = 0;
        for (const auto& r : records)
            if (r.method == method && r.channel == channel && r.metric == metric) {
                acc += r.value;
                ++n;
            }
        return n ? acc / double(n) : std::numeric_limits<double>::quiet_NaN();
    }

    [[nodiscard]] std::optional<double> value(std::size_t frame, const std::string& method, const std::string& channel,
                                              const std::string& metric) const {
        for (const auto& r : records)
            if (r.frame == frame && r.method == method && r.channel == channel && r.metric == metric)
                return r.value;
        return std::nullopt;
    }
};

inline std::string format_value(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// CSV with header frame,channel,method,metric,value; LF line endings.
inline void write_csv(std::ostream& os, const EvalReport& report) {
    os << "frame,channel,method,metric,value\n";
    for (const auto& r : report.records)
        os << r.frame << ',' << r.channel << ',' << r.method << ',' << r.metric << ',' << format_value(r.value) << '\n';
}

struct MaskConfig {
    double threshold_fraction = 0.1;
    std::optional<FlowMask> external;  // replaces the magnitude threshold when present
    MreNormalization mre = MreNormalization::peak_speed;
};

/// Per-frame, per-channel PSNR and per-frame MRE of each method against the reference. The mask
/// comes from the reference magnitude of each frame (or the external mask). The PSNR peak is the
/// peak reference speed over the mask, shared by u, v and w, since a single component may be zero
/// everywhere.
inline EvalReport evaluate(const std::vector<std::pair<std::string, const VelocityDataset*>>& methods,
                           const VelocityDataset& ref, const MaskConfig& mask_cfg = {}) {
    validate(ref);
    for (const auto& [name, ds] : methods) {
        validate(*ds);
        if (ds->frames.size() != ref.frames.size())
            throw DimensionError("method '" + name + "' has " + std::to_string(ds->frames.size()) +
                                 " frames, reference has " + std::to_string(ref.frames.size()));
        if (!ds->grid().same_shape(ref.grid()))
            throw DimensionError("method '" + name + "' grid " + to_string(ds->grid()) + " does not match reference " +
                                 to_string(ref.grid()));
    }
    EvalReport report;
    for (std::size_t f = 0; f < ref.frames.size(); ++f) {
        const VelocityFrame& rf = ref.frames[f];
        const FlowMask mask = mask_cfg.external ? *mask_cfg.external : make_mask(rf.magnitude, mask_cfg.threshold_fraction);
        if (!mask.grid.same_shape(rf.grid()))
            throw DimensionError("external mask grid does not match reference");
        const double vpeak = peak_speed(rf, mask);
        for (const auto& [name, ds] : methods) {
            const VelocityFrame& ef = ds->frames[f];
            for (Channel c : kChannels)
                report.records.push_back(
                    {f, channel_name(c), name, "psnr_db", psnr(ef.velocity(c), rf.velocity(c), mask, vpeak)});
        }
        for (const auto& [name, ds] : methods)
            report.records.push_back({f, "uvw", name, "mre_percent", mean_relative_error(ds->frames[f], rf, mask, mask_cfg.mre)});
    }
    return report;
}

/// The two-method form: super-resolved result and interpolation baseline.
inline EvalReport evaluate(const VelocityDataset& sr, const VelocityDataset& ref, const VelocityDataset& baseline,
                           const MaskConfig& mask_cfg = {}, const std::string& sr_name = "fsr",
                           const std::string& baseline_name = "trilinear") {
    return evaluate({{sr_name, &sr}, {baseline_name, &baseline}}, ref, mask_cfg);
}

}  // namespace flowsr
