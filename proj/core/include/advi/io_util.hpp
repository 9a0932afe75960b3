#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace advi {

// Write-to-temp then rename; creates parent directories.
void atomic_write_file(const std::string& path, const void* data, size_t size);
void atomic_write_file(const std::string& path, const std::string& text);

uint64_t fnv1a64(const void* data, size_t size, uint64_t h = 14695981039346656037ull);
std::string fnv1a64_hex(const void* data, size_t size);

std::string read_file(const std::string& path);  // throws IoError

}  // namespace advi
