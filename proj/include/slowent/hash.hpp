#pragma once

#include <string>
#include <string_view>

namespace slowent {

std::string sha256_hex(std::string_view data);
// Throws when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace slowent
