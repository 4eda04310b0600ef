#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/env/metadata.hpp"

namespace callctx::env {

struct LicenseVerdict {
  bool accepted = false;
  std::string normalized;  // family name, e.g. "BSD"
  std::string reason;      // set when rejected: "unknown-license" or "not-permissive:<family>"
};

// Families a redistributable environment may contain.
const std::vector<std::string>& permissive_families();

// Maps a free-form declaration (SPDX id, classifier tail, or full license
// text) to a license family; std::nullopt when nothing is recognized.
std::optional<std::string> license_family(std::string_view declared);

LicenseVerdict screen_license_string(std::string_view declared);

// Uses the License / License-Expression field, falling back to the trove
// classifiers when the field is empty or says UNKNOWN.
LicenseVerdict screen_license(const PackageMetadata& meta);

}  // namespace callctx::env
