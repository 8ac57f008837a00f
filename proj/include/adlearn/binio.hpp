#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "adlearn/error.hpp"

// Little-endian binary IO for the versioned file formats.
namespace adl::binio {

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = (unsigned char)((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

inline void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

inline void write_f64_array(std::ostream& os, std::span<const double> values) {
    for (double v : values) write_f64(os, v);
}

inline uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4))
        throw Error(ErrorCode::Format, std::string("unexpected end of file reading ") + what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(buf[i]) << (8 * i);
    return v;
}

inline uint64_t read_u64(std::istream& is, const char* what) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8))
        throw Error(ErrorCode::Format, std::string("unexpected end of file reading ") + what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(buf[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is, const char* what) {
    uint64_t bits = read_u64(is, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void read_f64_array(std::istream& is, std::span<double> out, const char* what) {
    for (double& v : out) v = read_f64(is, what);
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const char* what) {
    char buf[4];
    if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
        throw Error(ErrorCode::Format, std::string(what) + ": bad magic, not a recognized file");
}

} // namespace adl::binio
