#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace eids {

std::uint32_t crc32_bytes(const void* p, std::size_t n);

/// Little-endian binary writer used by the frame-cache and checkpoint
/// formats. The layout is explicit byte-by-byte so files are identical
/// across platforms.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void bytes(const void* p, std::size_t n);
  void str(const std::string& s);  // u32 length + UTF-8 bytes

  /// Appends CRC-32 of everything written so far.
  void finish_crc();

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  void write_file(const std::string& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> data) : buf_(std::move(data)) {}
  static ByteReader from_file(const std::string& path);

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  void bytes(void* out, std::size_t n);
  std::string str();

  /// Validates the trailing CRC-32 against all preceding bytes. Call before
  /// parsing; truncation and corruption both surface as a checksum error.
  void check_crc_trailer(const char* what);

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::size_t size() const { return buf_.size(); }

 private:
  void need(std::size_t n, const char* what = "record");
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace eids
