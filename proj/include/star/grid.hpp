#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "star/errors.hpp"

namespace star {

/// Uniform lat/lon grid over a city bounding box plus the time axis anchor.
/// Row 0 starts at lat_min, column 0 at lon_min; interval 0 starts at
/// epoch_start (epoch seconds).
struct GridSpec {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
    std::int64_t interval_seconds = 0;
    std::int64_t epoch_start = 0;

    void validate() const;
    std::int64_t cell_count() const { return rows * cols; }
    /// Interval index containing an absolute timestamp (floor division).
    std::int64_t interval_of(std::int64_t timestamp) const;
    /// Timestamp at which interval t begins.
    std::int64_t interval_start(std::int64_t t) const {
        return epoch_start + t * interval_seconds;
    }
};

struct TrajectoryPoint {
    std::int64_t timestamp = 0;
    double lat = 0.0;
    double lon = 0.0;
};

struct Trajectory {
    std::string id;
    std::vector<TrajectoryPoint> points; // non-decreasing timestamps
};

struct Cell {
    std::int64_t row = 0;
    std::int64_t col = 0;
    bool operator==(const Cell&) const = default;
};

/// One 2 x I x J snapshot: channel 0 inflow, channel 1 outflow, row-major.
struct FlowFrame {
    std::int64_t t = 0;
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<float> data; // 2 * rows * cols

    static FlowFrame zero(std::int64_t t, std::int64_t rows, std::int64_t cols);
    float& at(int channel, std::int64_t i, std::int64_t j);
    float at(int channel, std::int64_t i, std::int64_t j) const;
    float& inflow(std::int64_t i, std::int64_t j) { return at(0, i, j); }
    float& outflow(std::int64_t i, std::int64_t j) { return at(1, i, j); }
};

/// Time-ordered flow snapshots for one grid; frame indices run 0..T-1.
struct FrameSeries {
    GridSpec grid;
    std::vector<FlowFrame> frames;

    std::int64_t length() const { return static_cast<std::int64_t>(frames.size()); }
    void validate() const;
};

struct ParsedTrajectories {
    std::vector<Trajectory> trajectories; // first-appearance order
    std::int64_t skipped_lines = 0;       // malformed lines in lenient mode
};

/// Parse the trajectory CSV contract: header `traj_id,timestamp,lat,lon`,
/// `#` comment lines skipped, points grouped by id and time-sorted.
/// In strict mode a malformed line raises ParseError with its line number;
/// otherwise such lines are counted and skipped.
ParsedTrajectories parse_trajectories(std::istream& in, bool strict = false);

/// Uniform binning of a point into the grid; the max lat/lon boundary closes
/// onto the last row/column. Out-of-bounds points map to nullopt.
std::optional<Cell> assign_cell(const TrajectoryPoint& point, const GridSpec& grid);

/// Count inflow/outflow per Definitions 1-2: each consecutive cell-changing
/// pair within a trajectory increments outflow at the earlier point's cell
/// and inflow at the later point's cell, bucketed into the interval of the
/// earlier timestamp. Pairs touching an out-of-grid side count one-sided.
FrameSeries count_flows(const std::vector<Trajectory>& trajectories,
                        const GridSpec& grid, std::int64_t interval_count);

} // namespace star
