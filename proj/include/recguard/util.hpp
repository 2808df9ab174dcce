#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace recguard::util {

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

/// Current time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string iso8601_now();

/// Process-unique request id: 12 random hex chars plus a counter.
std::string new_request_id();

std::string read_file(const std::filesystem::path& path);

}  // namespace recguard::util
