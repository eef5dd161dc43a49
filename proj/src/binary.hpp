#pragma once
#include <htree/core.hpp>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htree::detail {

// Little-endian writer/reader independent of host byte order.
class ByteWriter {
public:
    void magic(std::string_view tag) {
        for (char ch : tag) buf_.push_back(static_cast<std::uint8_t>(ch));
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
    void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }

    void reserve(std::size_t n) { buf_.reserve(n); }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void put(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    void expect_magic(std::string_view tag) {
        need(tag.size());
        if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
            throw FormatError(what_ + ": bad magic, expected \"" + std::string(tag) + "\"");
        }
        pos_ += tag.size();
    }
    std::uint8_t u8() { need(1); return bytes_[pos_++]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
    std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }

    /// Checks that `count * width` bytes remain before a bulk read.
    void need_elements(std::uint64_t count, std::uint64_t width) {
        if (width != 0 && count > (bytes_.size() - pos_) / width) truncated();
    }
    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw FormatError(what_ + ": " + std::to_string(bytes_.size() - pos_) +
                              " trailing bytes");
        }
    }

private:
    void need(std::size_t n) {
        if (bytes_.size() - pos_ < n) truncated();
    }
    [[noreturn]] void truncated() const { throw FormatError(what_ + ": truncated stream"); }
    std::uint64_t get(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

} // namespace htree::detail
