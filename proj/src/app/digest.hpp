#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cvilab::app {

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace cvilab::app
