#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sar {

// Little-endian byte stream used by the binary checkpoint formats.
class ByteWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v);
  void f64(double v);
  void str(std::string_view s);
  void f64s(const double* data, std::size_t n);

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : data_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  std::string str();
  void f64s(double* out, std::size_t n);

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

// Wraps a payload as magic | payload | sha256(magic | payload); unwrap
// verifies the trailer and strips it.
std::string seal(std::string_view magic, std::string_view payload);
std::string_view unseal(std::string_view magic, std::string_view sealed);

}  // namespace sar
