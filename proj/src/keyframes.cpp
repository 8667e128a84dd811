#include "star/keyframes.hpp"

#include <algorithm>

namespace star {

void KeyframeConfig::validate() const {
    if (closeness_len < 0 || period_len < 0 || trend_len < 0 || sub_len < 0) {
        throw ConfigError("keyframes: fragment lengths must be non-negative");
    }
    if (period_span < 1 || trend_span < 1) {
        throw ConfigError("keyframes: period and trend spans must be positive");
    }
    if (period_len > 0 && trend_len > 0 && !(period_span < trend_span)) {
        throw ConfigError("keyframes: period span (" + std::to_string(period_span) +
                          ") must be shorter than trend span (" + std::to_string(trend_span) +
                          ")");
    }
    if (frame_count() < 1) {
        throw ConfigError("keyframes: configuration selects no frames");
    }
}

std::int64_t KeyframeConfig::max_offset() const {
    std::int64_t m = closeness_len;
    if (period_len > 0) m = std::max(m, period_len * period_span + sub_len);
    if (trend_len > 0) m = std::max(m, trend_len * trend_span + sub_len);
    return m;
}

std::vector<std::int64_t> keyframe_offsets(const KeyframeConfig& cfg) {
    cfg.validate();
    std::vector<std::int64_t> offsets;
    offsets.reserve(static_cast<std::size_t>(cfg.frame_count()));
    for (std::int64_t i = 1; i <= cfg.closeness_len; ++i) offsets.push_back(i);
    for (std::int64_t i = 1; i <= cfg.period_len; ++i) {
        for (std::int64_t r = 0; r <= cfg.sub_len; ++r) {
            offsets.push_back(i * cfg.period_span + r);
        }
    }
    for (std::int64_t i = 1; i <= cfg.trend_len; ++i) {
        for (std::int64_t r = 0; r <= cfg.sub_len; ++r) {
            offsets.push_back(i * cfg.trend_span + r);
        }
    }
    return offsets;
}

std::vector<std::int64_t> select_keyframes(std::int64_t t, const KeyframeConfig& cfg) {
    cfg.validate();
    const std::int64_t needed = cfg.max_offset();
    if (t < needed) {
        throw OutOfHistoryError("select_keyframes: target interval " + std::to_string(t) +
                                " has insufficient history; requires t >= " +
                                std::to_string(needed));
    }
    return keyframe_offsets(cfg);
}

TensorPtr<float> build_input_tensor(const FrameSeries& series, std::int64_t t,
                                    std::span<const std::int64_t> offsets) {
    const auto& grid = series.grid;
    const std::int64_t plane = grid.rows * grid.cols;
    const auto frame_span = static_cast<std::size_t>(2 * plane);
    std::vector<float> data(offsets.size() * frame_span);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        const std::int64_t idx = t - offsets[k];
        if (idx < 0 || idx >= series.length()) {
            throw OutOfHistoryError("build_input_tensor: frame " + std::to_string(idx) +
                                    " (t=" + std::to_string(t) + ", offset " +
                                    std::to_string(offsets[k]) + ") is outside the series");
        }
        const auto& frame = series.frames[static_cast<std::size_t>(idx)];
        std::copy(frame.data.begin(), frame.data.end(), data.begin() + k * frame_span);
    }
    return make_tensor<float>({static_cast<std::int64_t>(2 * offsets.size()), grid.rows,
                               grid.cols},
                              std::move(data));
}

MinMaxScaler fit_scaler(std::span<const FlowFrame> train_frames) {
    if (train_frames.empty()) {
        throw ContractError("fit_scaler: empty training partition");
    }
    MinMaxScaler s;
    s.min_val = train_frames[0].data.empty() ? 0.0f : train_frames[0].data[0];
    s.max_val = s.min_val;
    for (const auto& frame : train_frames) {
        for (const float v : frame.data) {
            s.min_val = std::min(s.min_val, v);
            s.max_val = std::max(s.max_val, v);
        }
    }
    return s;
}

void ExternalFeatureSpec::validate() const {
    if (intervals_per_day < 1) {
        throw ConfigError("external: intervals_per_day must be positive");
    }
    for (const auto& slot : extra) {
        if (slot.cardinality < 1) {
            throw ConfigError("external: slot '" + slot.name + "' has cardinality < 1");
        }
        if (slot.value < 0 || slot.value >= slot.cardinality) {
            throw ConfigError("external: slot '" + slot.name + "' value out of range");
        }
    }
}

std::int64_t ExternalFeatureSpec::feature_dim() const {
    std::int64_t dim = 0;
    if (time_of_day) dim += intervals_per_day;
    if (day_of_week) dim += 7;
    if (weekend_flag) dim += 1;
    for (const auto& slot : extra) dim += slot.cardinality;
    return dim;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

} // namespace

std::vector<float> external_features(std::int64_t t, const GridSpec& grid,
                                     const ExternalFeatureSpec& spec) {
    spec.validate();
    std::vector<float> out(static_cast<std::size_t>(spec.feature_dim()), 0.0f);
    const std::int64_t ts = grid.interval_start(t);
    std::size_t base = 0;
    if (spec.time_of_day) {
        const std::int64_t sec_of_day = ts - floor_div(ts, 86400) * 86400;
        const std::int64_t idx =
            (sec_of_day / grid.interval_seconds) % spec.intervals_per_day;
        out[base + static_cast<std::size_t>(idx)] = 1.0f;
        base += static_cast<std::size_t>(spec.intervals_per_day);
    }
    // 1970-01-01 was a Thursday; index days so Monday = 0.
    const std::int64_t day_index = (floor_div(ts, 86400) % 7 + 7 + 3) % 7;
    if (spec.day_of_week) {
        out[base + static_cast<std::size_t>(day_index)] = 1.0f;
        base += 7;
    }
    if (spec.weekend_flag) {
        out[base] = day_index >= 5 ? 1.0f : 0.0f;
        base += 1;
    }
    for (const auto& slot : spec.extra) {
        out[base + static_cast<std::size_t>(slot.value)] = 1.0f;
        base += static_cast<std::size_t>(slot.cardinality);
    }
    return out;
}

std::vector<TrainingInstance> make_instances(const FrameSeries& series,
                                             const KeyframeConfig& cfg,
                                             const MinMaxScaler& scaler,
                                             const ExternalFeatureSpec& spec) {
    cfg.validate();
    const auto offsets = keyframe_offsets(cfg);
    const std::int64_t first_t = cfg.max_offset();
    if (series.length() <= first_t) {
        throw OutOfHistoryError("make_instances: series has " +
                                std::to_string(series.length()) +
                                " frames but the first valid target needs " +
                                std::to_string(first_t + 1));
    }

    std::vector<TrainingInstance> instances;
    instances.reserve(static_cast<std::size_t>(series.length() - first_t));
    for (std::int64_t t = first_t; t < series.length(); ++t) {
        TrainingInstance inst;
        inst.t = t;
        inst.input = build_input_tensor(series, t, offsets);
        for (auto& v : inst.input->data) v = scaler.scale(v);
        const auto& frame = series.frames[static_cast<std::size_t>(t)];
        std::vector<float> target(frame.data.size());
        for (std::size_t i = 0; i < target.size(); ++i) target[i] = scaler.scale(frame.data[i]);
        inst.target = make_tensor<float>({2, series.grid.rows, series.grid.cols},
                                         std::move(target));
        inst.external = external_features(t, series.grid, spec);
        instances.push_back(std::move(inst));
    }
    return instances;
}

} // namespace star
