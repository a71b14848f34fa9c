#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vvb {

/// Append-only little-endian encoder backed by a byte vector.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void bytes(const void* data, std::size_t n);
    void str(std::string_view s); // raw bytes, no length prefix

    const std::vector<std::uint8_t>& data() const { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian decoder; any read past the end throws
/// TruncatedFileError.
class ByteReader {
  public:
    explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void bytes(void* out, std::size_t n);
    std::string str(std::size_t n);

    std::size_t remaining() const { return buf_.size() - pos_; }
    bool done() const { return pos_ == buf_.size(); }

  private:
    void need(std::size_t n) const;
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

/// Read a whole file; throws IoError if it cannot be opened.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Write via a temp file in the same directory plus rename, so a crash never
/// leaves a half-written file at the destination.
void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& data);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

} // namespace vvb
