#include "sar/serialize.h"

#include <cstring>

#include "sar/checksum.h"
#include "sar/error.h"

namespace sar {

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

void ByteWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  u64(bits);
}

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  buf_.append(s);
}

void ByteWriter::f64s(const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) f64(data[i]);
}

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw Error(Errc::kCorruptCheckpoint, "truncated stream");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
  return v;
}

std::int64_t ByteReader::i64() { return static_cast<std::int64_t>(u64()); }

double ByteReader::f64() {
  std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string ByteReader::str() {
  std::uint64_t n = u64();
  need(n);
  std::string s(data_.substr(pos_, n));
  pos_ += n;
  return s;
}

void ByteReader::f64s(double* out, std::size_t n) {
  need(n * 8);
  for (std::size_t i = 0; i < n; ++i) out[i] = f64();
}

std::string seal(std::string_view magic, std::string_view payload) {
  std::string out;
  out.reserve(magic.size() + payload.size() + 32);
  out.append(magic);
  out.append(payload);
  out.append(sha256_raw(out));
  return out;
}

std::string_view unseal(std::string_view magic, std::string_view sealed) {
  if (sealed.size() < magic.size() + 32 || sealed.substr(0, magic.size()) != magic) {
    throw Error(Errc::kCorruptCheckpoint, "bad magic");
  }
  std::string_view body = sealed.substr(0, sealed.size() - 32);
  if (sha256_raw(body) != sealed.substr(sealed.size() - 32)) {
    throw Error(Errc::kCorruptCheckpoint, "checksum mismatch");
  }
  return body.substr(magic.size());
}

}  // namespace sar
