#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "star/errors.hpp"

namespace star::binio {

// Little-endian primitives shared by the .stf and .stck containers.

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(T)) {
        throw TruncationError(std::string("truncated while reading ") + what);
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_f32_block(std::ostream& out, const float* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 4));
    } else {
        for (std::size_t i = 0; i < count; ++i) write_le(out, data[i]);
    }
}

inline void read_f32_block(std::istream& in, float* data, std::size_t count, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 4));
        if (static_cast<std::size_t>(in.gcount()) != count * 4) {
            throw TruncationError(std::string("truncated while reading ") + what);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) data[i] = read_le<float>(in, what);
    }
}

inline void write_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char magic[4], const char* format_name) {
    char buf[4];
    in.read(buf, 4);
    if (in.gcount() != 4) {
        throw TruncationError(std::string("truncated while reading ") + format_name + " magic");
    }
    if (std::memcmp(buf, magic, 4) != 0) {
        throw BadMagicError(std::string("not a ") + format_name + " file: bad magic '" +
                            std::string(buf, 4) + "'");
    }
}

} // namespace star::binio
