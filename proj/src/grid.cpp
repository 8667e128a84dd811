#include "star/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <unordered_map>

namespace star {

void GridSpec::validate() const {
    if (rows < 1 || cols < 1) {
        throw ConfigError("grid: rows and cols must be >= 1, got " + std::to_string(rows) +
                          "x" + std::to_string(cols));
    }
    if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
        throw ConfigError("grid: bounding box must have lat_min < lat_max and lon_min < lon_max");
    }
    if (interval_seconds < 1) {
        throw ConfigError("grid: interval_seconds must be positive");
    }
}

std::int64_t GridSpec::interval_of(std::int64_t timestamp) const {
    const std::int64_t d = timestamp - epoch_start;
    // floor division for timestamps before the epoch
    return d >= 0 ? d / interval_seconds : -((-d + interval_seconds - 1) / interval_seconds);
}

FlowFrame FlowFrame::zero(std::int64_t t, std::int64_t rows, std::int64_t cols) {
    FlowFrame f;
    f.t = t;
    f.rows = rows;
    f.cols = cols;
    f.data.assign(static_cast<std::size_t>(2 * rows * cols), 0.0f);
    return f;
}

float& FlowFrame::at(int channel, std::int64_t i, std::int64_t j) {
    return data[static_cast<std::size_t>((channel * rows + i) * cols + j)];
}

float FlowFrame::at(int channel, std::int64_t i, std::int64_t j) const {
    return data[static_cast<std::size_t>((channel * rows + i) * cols + j)];
}

void FrameSeries::validate() const {
    grid.validate();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = frames[t];
        if (f.t != static_cast<std::int64_t>(t)) {
            throw ContractError("frame series: frame " + std::to_string(t) +
                                " carries index " + std::to_string(f.t));
        }
        if (f.rows != grid.rows || f.cols != grid.cols ||
            f.data.size() != static_cast<std::size_t>(2 * grid.rows * grid.cols)) {
            throw ShapeError("frame series: frame " + std::to_string(t) +
                             " does not match grid " + std::to_string(grid.rows) + "x" +
                             std::to_string(grid.cols));
        }
    }
}

namespace {

bool parse_field(std::string_view s, double& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

bool parse_field(std::string_view s, std::int64_t& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

ParsedTrajectories parse_trajectories(std::istream& in, bool strict) {
    if (!in) throw IoError("parse_trajectories: unreadable input stream");

    ParsedTrajectories result;
    std::unordered_map<std::string, std::size_t> index_of;
    std::string line;
    std::int64_t line_no = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        if (!header_seen) {
            if (sv != "traj_id,timestamp,lat,lon") {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected header 'traj_id,timestamp,lat,lon'");
            }
            header_seen = true;
            continue;
        }

        std::string_view fields[4];
        std::string_view rest = sv;
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
            const auto comma = rest.find(',');
            if (k < 3) {
                if (comma == std::string_view::npos) {
                    ok = false;
                    break;
                }
                fields[k] = trim(rest.substr(0, comma));
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos) ok = false;
                fields[k] = trim(rest);
            }
        }

        TrajectoryPoint p;
        ok = ok && !fields[0].empty() && parse_field(fields[1], p.timestamp) &&
             parse_field(fields[2], p.lat) && parse_field(fields[3], p.lon);
        if (!ok) {
            if (strict) {
                throw ParseError("line " + std::to_string(line_no) + ": malformed record '" +
                                 std::string(sv) + "'");
            }
            ++result.skipped_lines;
            continue;
        }

        const std::string id(fields[0]);
        auto it = index_of.find(id);
        if (it == index_of.end()) {
            it = index_of.emplace(id, result.trajectories.size()).first;
            result.trajectories.push_back(Trajectory{id, {}});
        }
        result.trajectories[it->second].points.push_back(p);
    }
    if (in.bad()) throw IoError("parse_trajectories: stream read failure");

    for (auto& tr : result.trajectories) {
        std::stable_sort(tr.points.begin(), tr.points.end(),
                         [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
    return result;
}

std::optional<Cell> assign_cell(const TrajectoryPoint& point, const GridSpec& grid) {
    if (point.lat < grid.lat_min || point.lat > grid.lat_max || point.lon < grid.lon_min ||
        point.lon > grid.lon_max) {
        return std::nullopt;
    }
    const double ri = (point.lat - grid.lat_min) / (grid.lat_max - grid.lat_min) *
                      static_cast<double>(grid.rows);
    const double ci = (point.lon - grid.lon_min) / (grid.lon_max - grid.lon_min) *
                      static_cast<double>(grid.cols);
    Cell cell;
    cell.row = std::min(static_cast<std::int64_t>(ri), grid.rows - 1);
    cell.col = std::min(static_cast<std::int64_t>(ci), grid.cols - 1);
    return cell;
}

FrameSeries count_flows(const std::vector<Trajectory>& trajectories, const GridSpec& grid,
                        std::int64_t interval_count) {
    grid.validate();
    if (interval_count < 1) {
        throw ContractError("count_flows: interval_count must be >= 1, got " +
                            std::to_string(interval_count));
    }

    FrameSeries series;
    series.grid = grid;
    series.frames.reserve(static_cast<std::size_t>(interval_count));
    for (std::int64_t t = 0; t < interval_count; ++t) {
        series.frames.push_back(FlowFrame::zero(t, grid.rows, grid.cols));
    }

    for (const auto& tr : trajectories) {
        if (tr.points.size() < 2) continue;
        auto prev_cell = assign_cell(tr.points[0], grid);
        for (std::size_t k = 1; k < tr.points.size(); ++k) {
            const auto cell = assign_cell(tr.points[k], grid);
            if (cell != prev_cell) {
                // bucketed by the earlier point's timestamp
                const std::int64_t t = grid.interval_of(tr.points[k - 1].timestamp);
                if (t >= 0 && t < interval_count) {
                    auto& frame = series.frames[static_cast<std::size_t>(t)];
                    if (prev_cell) frame.outflow(prev_cell->row, prev_cell->col) += 1.0f;
                    if (cell) frame.inflow(cell->row, cell->col) += 1.0f;
                }
            }
            prev_cell = cell;
        }
    }
    return series;
}

} // namespace star
