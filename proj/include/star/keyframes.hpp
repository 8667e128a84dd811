#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "star/grid.hpp"
#include "star/tensor.hpp"

namespace star {

/// Fragment lengths and spans controlling keyframe selection. Offsets are
/// taken at 1..closeness_len, then i*period_span + r and i*trend_span + r
/// for r = 0..sub_len inclusive.
struct KeyframeConfig {
    std::int64_t closeness_len = 3;  // recent frames
    std::int64_t period_len = 1;     // daily-period fragments
    std::int64_t trend_len = 1;      // weekly-trend fragments
    std::int64_t sub_len = 2;        // extra consecutive frames per fragment
    std::int64_t period_span = 48;   // intervals per period (one day)
    std::int64_t trend_span = 336;   // intervals per trend (one week)

    void validate() const;
    std::int64_t frame_count() const {
        return closeness_len + (period_len + trend_len) * (sub_len + 1);
    }
    std::int64_t max_offset() const;
};

/// The selection queue as relative offsets, FIFO order (closeness, period,
/// trend). Frame index = t - offset.
std::vector<std::int64_t> keyframe_offsets(const KeyframeConfig& cfg);

/// Offsets for a concrete target interval; rejects targets with insufficient
/// history.
std::vector<std::int64_t> select_keyframes(std::int64_t t, const KeyframeConfig& cfg);

/// Stack the frames at t-offset (queue order) into a (2L) x I x J tensor;
/// channel 2k is frame k's inflow, channel 2k+1 its outflow. Values are
/// copied raw (unscaled).
TensorPtr<float> build_input_tensor(const FrameSeries& series, std::int64_t t,
                                    std::span<const std::int64_t> offsets);

/// Min-max map onto [-1, 1], fit on the training partition only.
struct MinMaxScaler {
    float min_val = 0.0f;
    float max_val = 0.0f;

    float scale(float x) const {
        if (max_val <= min_val) return 0.0f;
        return 2.0f * (x - min_val) / (max_val - min_val) - 1.0f;
    }
    float unscale(float y) const {
        if (max_val <= min_val) return min_val;
        return (y + 1.0f) * 0.5f * (max_val - min_val) + min_val;
    }
};

MinMaxScaler fit_scaler(std::span<const FlowFrame> train_frames);

/// One inert categorical extension block: a one-hot of width `cardinality`
/// hot at a fixed `value` (no external data client is wired in).
struct CategoricalSlot {
    std::string name;
    std::int64_t cardinality = 1;
    std::int64_t value = 0;
};

/// Which calendar blocks the external feature vector carries.
struct ExternalFeatureSpec {
    std::int64_t intervals_per_day = 48;
    bool time_of_day = true;
    bool day_of_week = true;
    bool weekend_flag = true;
    std::vector<CategoricalSlot> extra;

    void validate() const;
    std::int64_t feature_dim() const;
};

/// Calendar one-hots describing the target interval t: time-of-day block,
/// day-of-week block (Monday = 0), weekend flag, then the extra slots.
std::vector<float> external_features(std::int64_t t, const GridSpec& grid,
                                     const ExternalFeatureSpec& spec);

/// One supervised example on the normalized scale.
struct TrainingInstance {
    TensorPtr<float> input;      // (2L) x I x J
    std::vector<float> external; // metadata of the target interval
    TensorPtr<float> target;     // 2 x I x J
    std::int64_t t = 0;
};

/// Instances for every target t in [max_offset, T), inputs and targets
/// mapped through the scaler.
std::vector<TrainingInstance> make_instances(const FrameSeries& series,
                                             const KeyframeConfig& cfg,
                                             const MinMaxScaler& scaler,
                                             const ExternalFeatureSpec& spec);

} // namespace star
