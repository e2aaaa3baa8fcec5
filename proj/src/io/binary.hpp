#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace ddnet::io {

// Little-endian encoder, independent of host byte order.
class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void floats(std::span<const float> values) {
        for (float v : values) f32(v);
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

// Bounds-checked decoder. Running off the end raises `truncation_code`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, ErrorCode truncation_code, std::string what)
        : data_(data), code_(truncation_code), what_(std::move(what)) {}

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(std::size_t max_len = 1u << 20) {
        const std::uint32_t n = u32();
        require(n <= max_len, code_, what_ + ": string length " + std::to_string(n) + " is implausible");
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }
    std::vector<float> floats(std::size_t count) {
        require(count <= remaining() / 4, code_, what_ + ": truncated float block");
        std::vector<float> out(count);
        for (auto& v : out) v = f32();
        return out;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        require(n <= remaining(), code_, what_ + ": unexpected end of data at byte " + std::to_string(pos_));
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    ErrorCode code_;
    std::string what_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace ddnet::io
