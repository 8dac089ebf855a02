#pragma once

#include <string>
#include <string_view>

namespace sar {

// SHA-256 of the bytes, as raw 32 bytes or lowercase hex.
std::string sha256_raw(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace sar
