#include "courtforge/byte_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "courtforge/errors.hpp"

namespace courtforge {

std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
    return fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::text(std::string_view s) {
    u64(s.size());
    magic(s);
}

void ByteWriter::blob(std::span<const std::uint8_t> b) {
    u64(b.size());
    raw(b);
}

void ByteReader::fail(const std::string& what) const {
    throw CheckpointError(context_ + ": " + what + " (at byte " + std::to_string(pos_) + ")");
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
    if (n > remaining()) fail("unexpected end of data");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
}

std::uint64_t ByteReader::u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::text() {
    const std::uint64_t n = u64();
    if (n > remaining()) fail("string length exceeds data");
    auto s = take(static_cast<std::size_t>(n));
    return std::string(reinterpret_cast<const char*>(s.data()), s.size());
}

std::span<const std::uint8_t> ByteReader::blob() {
    const std::uint64_t n = u64();
    if (n > remaining()) fail("blob length exceeds data");
    return take(static_cast<std::size_t>(n));
}

void ByteReader::expect_magic(std::string_view m) {
    if (remaining() < m.size()) fail("too short for header");
    auto s = take(m.size());
    if (std::memcmp(s.data(), m.data(), m.size()) != 0) fail("bad magic, expected '" + std::string(m) + "'");
}

void ByteReader::verify_seal() {
    if (data_.size() < pos_ + 8) fail("too short for checksum");
    const auto body = data_.first(data_.size() - 8);
    ByteReader tail(data_.last(8), context_);
    const std::uint64_t stored = tail.u64();
    if (stored != fnv1a64(body)) fail("checksum mismatch (file corrupt or truncated)");
    data_ = body;
}

void ByteReader::expect_end() const {
    if (remaining() != 0) fail(std::to_string(remaining()) + " trailing bytes");
}

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path, "read failed");
    return data;
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(tmp, "cannot open for writing");
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) throw IoError(tmp, "write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(path, "rename failed: " + ec.message());
}

}  // namespace courtforge
