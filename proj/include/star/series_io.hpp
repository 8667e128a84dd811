#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "star/grid.hpp"

namespace star {

inline constexpr std::uint32_t kSeriesFormatVersion = 1;

/// Write a frame series in the .stf container. Returns bytes written.
std::int64_t write_series(const FrameSeries& series, std::ostream& out);
std::int64_t write_series_file(const FrameSeries& series, const std::string& path);

/// Read a .stf container; floats round-trip bit-identically.
FrameSeries read_series(std::istream& in);
FrameSeries read_series_file(const std::string& path);

} // namespace star
