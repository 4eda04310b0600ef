#include "callctx/env/metadata.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "callctx/util/io.hpp"

namespace callctx::env {

namespace fs = std::filesystem;

std::string normalize_name(std::string_view name) {
  std::string out;
  bool sep = false;
  for (char c : name) {
    if (c == '-' || c == '_' || c == '.') {
      sep = true;
      continue;
    }
    if (sep && !out.empty()) out.push_back('-');
    sep = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

PackageMetadata parse_metadata(std::string_view text) {
  PackageMetadata meta;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string* last_multiline = nullptr;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;  // the body (long description) follows
    if ((line[0] == ' ' || line[0] == '\t') && last_multiline) {
      auto b = line.find_first_not_of(" \t|");
      *last_multiline += "\n" + (b == std::string::npos ? std::string() : line.substr(b));
      continue;
    }
    last_multiline = nullptr;
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    auto b = value.find_first_not_of(' ');
    value = b == std::string::npos ? std::string() : value.substr(b);
    if (key == "Name") {
      meta.name = value;
    } else if (key == "Version") {
      meta.version = value;
    } else if (key == "License" || key == "License-Expression") {
      if (meta.license.empty() || key == "License-Expression") meta.license = value;
      last_multiline = &meta.license;
    } else if (key == "Classifier") {
      meta.classifiers.push_back(value);
    } else if (key == "Requires-Dist") {
      meta.requires_dist.push_back(value);
    }
  }
  return meta;
}

std::vector<std::string> PackageMetadata::dependencies() const {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& req : requires_dist) {
    auto semi = req.find(';');
    if (semi != std::string::npos && req.find("extra", semi) != std::string::npos) continue;
    std::size_t end = 0;
    while (end < req.size() && (std::isalnum(static_cast<unsigned char>(req[end])) || req[end] == '-' ||
                                req[end] == '_' || req[end] == '.')) {
      ++end;
    }
    if (end == 0) continue;
    auto name = normalize_name(req.substr(0, end));
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

namespace {

std::vector<fs::path> read_record(const fs::path& record) {
  std::vector<fs::path> files;
  std::istringstream in(read_file(record));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string path;
    if (line.front() == '"') {
      auto close = line.find('"', 1);
      path = line.substr(1, close == std::string::npos ? std::string::npos : close - 1);
    } else {
      path = line.substr(0, line.find(','));
    }
    files.push_back(fs::path(path).lexically_normal());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

SiteScan scan_site_packages(const fs::path& site_packages) {
  SiteScan scan;
  if (!fs::is_directory(site_packages)) return scan;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(site_packages)) {
    if (entry.is_directory() && entry.path().extension() == ".dist-info") dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    try {
      InstalledDistribution dist;
      dist.dist_info = dir;
      dist.metadata = parse_metadata(read_file(dir / "METADATA"));
      if (dist.metadata.name.empty()) throw IoError("METADATA without Name");
      dist.files = read_record(dir / "RECORD");
      if (fs::exists(dir / "top_level.txt")) {
        std::istringstream in(read_file(dir / "top_level.txt"));
        std::string name;
        while (std::getline(in, name)) {
          if (!name.empty()) dist.top_level.push_back(name);
        }
      } else {
        std::set<std::string> tops;
        for (const auto& f : dist.files) {
          auto first = f.begin()->string();
          if (first.find(".dist-info") != std::string::npos || first == ".." || first.empty()) continue;
          if (f.extension() == ".py" && std::distance(f.begin(), f.end()) == 1) {
            tops.insert(f.stem().string());
          } else if (std::distance(f.begin(), f.end()) > 1) {
            tops.insert(first);
          }
        }
        dist.top_level.assign(tops.begin(), tops.end());
      }
      scan.distributions.push_back(std::move(dist));
    } catch (const std::exception&) {
      scan.broken.push_back(dir.filename().string());
    }
  }
  std::sort(scan.distributions.begin(), scan.distributions.end(), [](const auto& a, const auto& b) {
    return normalize_name(a.metadata.name) < normalize_name(b.metadata.name);
  });
  return scan;
}

}  // namespace callctx::env
