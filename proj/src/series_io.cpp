#include "star/series_io.hpp"

#include <fstream>
#include <limits>

#include "star/binio.hpp"

namespace star {

namespace {
constexpr char kMagic[4] = {'S', 'T', 'F', 'R'};
}

std::int64_t write_series(const FrameSeries& series, std::ostream& out) {
    series.validate();
    if (!out) throw IoError("write_series: bad output stream");

    binio::write_magic(out, kMagic);
    binio::write_le<std::uint32_t>(out, kSeriesFormatVersion);
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.grid.rows));
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.grid.cols));
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.length()));
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.grid.interval_seconds));
    binio::write_le<std::int64_t>(out, series.grid.epoch_start);
    binio::write_le<double>(out, series.grid.lat_min);
    binio::write_le<double>(out, series.grid.lat_max);
    binio::write_le<double>(out, series.grid.lon_min);
    binio::write_le<double>(out, series.grid.lon_max);

    std::int64_t payload = 0;
    for (const auto& frame : series.frames) {
        binio::write_f32_block(out, frame.data.data(), frame.data.size());
        payload += static_cast<std::int64_t>(frame.data.size() * 4);
    }
    if (!out) throw IoError("write_series: stream write failure");
    return 60 + payload;
}

std::int64_t write_series_file(const FrameSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_series: cannot open '" + path + "' for writing");
    return write_series(series, out);
}

FrameSeries read_series(std::istream& in) {
    if (!in) throw IoError("read_series: bad input stream");

    binio::expect_magic(in, kMagic, "frame-series (.stf)");
    const auto version = binio::read_le<std::uint32_t>(in, ".stf version");
    if (version != kSeriesFormatVersion) {
        throw VersionError(".stf version " + std::to_string(version) +
                           " not supported (expected " +
                           std::to_string(kSeriesFormatVersion) + ")");
    }

    FrameSeries series;
    series.grid.rows = binio::read_le<std::uint32_t>(in, ".stf rows");
    series.grid.cols = binio::read_le<std::uint32_t>(in, ".stf cols");
    const auto frame_count = binio::read_le<std::uint32_t>(in, ".stf frame count");
    series.grid.interval_seconds = binio::read_le<std::uint32_t>(in, ".stf interval");
    series.grid.epoch_start = binio::read_le<std::int64_t>(in, ".stf epoch");
    series.grid.lat_min = binio::read_le<double>(in, ".stf lat_min");
    series.grid.lat_max = binio::read_le<double>(in, ".stf lat_max");
    series.grid.lon_min = binio::read_le<double>(in, ".stf lon_min");
    series.grid.lon_max = binio::read_le<double>(in, ".stf lon_max");
    series.grid.validate();

    series.frames.reserve(frame_count);
    for (std::uint32_t t = 0; t < frame_count; ++t) {
        auto frame = FlowFrame::zero(t, series.grid.rows, series.grid.cols);
        binio::read_f32_block(in, frame.data.data(), frame.data.size(), ".stf frame payload");
        series.frames.push_back(std::move(frame));
    }
    return series;
}

FrameSeries read_series_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_series: cannot open '" + path + "'");
    return read_series(in);
}

} // namespace star
