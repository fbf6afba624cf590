#pragma once

// Little-endian encode/decode helpers shared by the binary file formats.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace emtree::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    }
    out.write(bytes.data(), bytes.size());
}

// Returns false on short read.
template <typename T>
bool get_le(std::istream& in, T& value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        return false;
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    value = static_cast<T>(v);
    return true;
}

inline bool get_bytes(std::istream& in, char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    return in.gcount() == static_cast<std::streamsize>(n);
}

// True when the stream has no bytes left.
inline bool at_eof(std::istream& in) {
    return in.peek() == std::char_traits<char>::eof();
}

}  // namespace emtree::detail
