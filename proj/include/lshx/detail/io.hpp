#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lshx::detail {

// Little-endian binary primitives for the LSHX1 and SKB1 containers.

inline void write_u8(std::ostream& out, uint8_t v) {
    out.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 4);
}

inline void write_u64(std::ostream& out, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

inline void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<uint64_t>(v));
}

inline uint8_t read_u8(std::istream& in) {
    int c = in.get();
    if (c == EOF) throw std::runtime_error("unexpected end of stream");
    return static_cast<uint8_t>(c);
}

inline uint32_t read_u32(std::istream& in) {
    char buf[4];
    if (!in.read(buf, 4)) throw std::runtime_error("unexpected end of stream");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(static_cast<uint8_t>(buf[i])) << (8 * i);
    return v;
}

inline uint64_t read_u64(std::istream& in) {
    char buf[8];
    if (!in.read(buf, 8)) throw std::runtime_error("unexpected end of stream");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(static_cast<uint8_t>(buf[i])) << (8 * i);
    return v;
}

inline double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

inline void write_magic(std::ostream& out, const char* magic, size_t len) {
    out.write(magic, static_cast<std::streamsize>(len));
}

inline void expect_magic(std::istream& in, const char* magic, size_t len, const char* what) {
    std::string buf(len, '\0');
    if (!in.read(buf.data(), static_cast<std::streamsize>(len)) ||
        std::memcmp(buf.data(), magic, len) != 0) {
        throw std::runtime_error(std::string("bad magic: not a ") + what + " stream");
    }
}

}  // namespace lshx::detail
