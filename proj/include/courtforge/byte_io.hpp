#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courtforge {

using Bytes = std::vector<std::uint8_t>;

std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                      std::uint64_t seed = 0xcbf29ce484222325ull) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

// Little-endian writer.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void raw(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void text(std::string_view s);   // u64 length + bytes
    void blob(std::span<const std::uint8_t> b);  // u64 length + bytes
    void magic(std::string_view m) { raw({reinterpret_cast<const std::uint8_t*>(m.data()), m.size()}); }

    // Appends an FNV-1a checksum of everything written so far.
    void seal() { u64(fnv1a64(buf_)); }

    const Bytes& bytes() const noexcept { return buf_; }
    Bytes take() noexcept { return std::move(buf_); }

private:
    Bytes buf_;
};

// Little-endian reader; every read past the end throws CheckpointError.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, std::string context = "checkpoint")
        : data_(data), context_(std::move(context)) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string text();
    std::span<const std::uint8_t> blob();
    void expect_magic(std::string_view m);

    // Verifies the trailing checksum and drops it from the readable range.
    void verify_seal();

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    void expect_end() const;
    [[noreturn]] void fail(const std::string& what) const;

private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string context_;
};

Bytes read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> data);

}  // namespace courtforge
