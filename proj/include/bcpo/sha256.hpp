#pragma once

#include <cstdint>
#include <string>

namespace bcpo {

// Content hash for run manifests.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

}  // namespace bcpo
