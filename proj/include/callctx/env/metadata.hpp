#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace callctx::env {

// Core-metadata fields read from a METADATA / PKG-INFO file.
struct PackageMetadata {
  std::string name;
  std::string version;
  std::string license;
  std::vector<std::string> classifiers;
  std::vector<std::string> requires_dist;

  // Normalized names of unconditional requirements (extras dropped), deduplicated.
  std::vector<std::string> dependencies() const;
};

PackageMetadata parse_metadata(std::string_view text);

// PEP 503 normalization: lowercase, runs of "-_." become "-".
std::string normalize_name(std::string_view name);

// A distribution installed into a site-packages directory.
struct InstalledDistribution {
  PackageMetadata metadata;
  std::filesystem::path dist_info;               // absolute
  std::vector<std::filesystem::path> files;      // relative to site-packages, from RECORD
  std::vector<std::string> top_level;            // importable top-level names
};

// Every *.dist-info under `site_packages`, sorted by normalized name.
// Unreadable records are returned in `broken` as directory names.
struct SiteScan {
  std::vector<InstalledDistribution> distributions;
  std::vector<std::string> broken;
};
SiteScan scan_site_packages(const std::filesystem::path& site_packages);

}  // namespace callctx::env
