#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace callctx {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never observe
// a half-written artifact.
void write_file(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

std::string path_to_uri(const std::filesystem::path& path);
std::filesystem::path uri_to_path(std::string_view uri);

// `path` expressed relative to `base` when it lies underneath it.
std::optional<std::filesystem::path> relative_under(const std::filesystem::path& path,
                                                    const std::filesystem::path& base);

}  // namespace callctx
