#include "callctx/env/license.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace callctx::env {

const std::vector<std::string>& permissive_families() {
  static const std::vector<std::string> kFamilies = {"MIT", "Apache", "BSD", "CC0", "ZPL 2.1",
                                                     "ISCL", "PSF",    "HPND", "Unlicense"};
  return kFamilies;
}

namespace {

// Lowercase, punctuation folded to single spaces, padded so " word " matches whole words.
std::string fold(std::string_view s) {
  std::string out = " ";
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (out.back() != ' ') {
      out.push_back(' ');
    }
  }
  if (out.back() != ' ') out.push_back(' ');
  return out;
}

bool has(const std::string& folded, std::string_view needle) { return folded.find(needle) != std::string::npos; }

struct Rule {
  std::string_view needle;  // matched against the folded text
  std::string_view family;
};

// Checked in order; the first hit wins.
constexpr Rule kRules[] = {
    {" permission is hereby granted free of charge ", "MIT"},
    {" licensed under the apache license ", "Apache"},
    {" redistribution and use in source and binary forms ", "BSD"},
    {" this is free and unencumbered software ", "Unlicense"},
    {" unlicense ", "Unlicense"},
    {" the unlicense ", "Unlicense"},
    {" agpl", "AGPL"},
    {" affero ", "AGPL"},
    {" lgpl", "LGPL"},
    {" lesser general public ", "LGPL"},
    {" library general public ", "LGPL"},
    {" gpl", "GPL"},
    {" general public license ", "GPL"},
    {" mpl ", "MPL"},
    {" mozilla ", "MPL"},
    {" eupl ", "EUPL"},
    {" cddl ", "CDDL"},
    {" epl ", "EPL"},
    {" eclipse public ", "EPL"},
    {" proprietary ", "Proprietary"},
    {" commercial ", "Proprietary"},
    {" apache", "Apache"},
    {" asl ", "Apache"},
    {" mit ", "MIT"},
    {" expat ", "MIT"},
    {"bsd ", "BSD"},
    {" cc0", "CC0"},
    {" creative commons zero ", "CC0"},
    {" zpl 2 1 ", "ZPL 2.1"},
    {" zope public license 2 1 ", "ZPL 2.1"},
    {" zope public license version 2 1 ", "ZPL 2.1"},
    {" zpl ", "ZPL"},
    {" zope public ", "ZPL"},
    {" iscl ", "ISCL"},
    {" isc ", "ISCL"},
    {" psf", "PSF"},
    {" python software foundation ", "PSF"},
    {" hpnd ", "HPND"},
    {" historical permission notice ", "HPND"},
};

bool permissive(std::string_view family) {
  const auto& fams = permissive_families();
  return std::find(fams.begin(), fams.end(), family) != fams.end();
}

bool unknown_marker(const std::string& folded) {
  return folded == " " || folded == " unknown " || folded == " none " || folded == " unlicensed " ||
         folded == " other " || folded == " other proprietary license ";
}

// Splits an SPDX-style expression on a case-insensitive operator word.
std::vector<std::string> split_operator(std::string_view expr, std::string_view op) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in{std::string(expr)};
  std::string word;
  while (in >> word) {
    std::string lw = word;
    std::transform(lw.begin(), lw.end(), lw.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lw == op) {
      parts.push_back(cur);
      cur.clear();
    } else {
      if (!cur.empty()) cur.push_back(' ');
      cur += word;
    }
  }
  parts.push_back(cur);
  return parts;
}

LicenseVerdict screen_single(std::string_view term) {
  std::string folded = fold(term);
  if (unknown_marker(folded)) return {false, "", "unknown-license"};
  auto family = license_family(term);
  if (!family) return {false, "", "unknown-license"};
  if (permissive(*family)) return {true, *family, ""};
  return {false, *family, "not-permissive:" + *family};
}

}  // namespace

std::optional<std::string> license_family(std::string_view declared) {
  std::string folded = fold(declared);
  for (const auto& rule : kRules) {
    if (has(folded, rule.needle)) return std::string(rule.family);
  }
  return std::nullopt;
}

LicenseVerdict screen_license_string(std::string_view declared) {
  // Long texts are license bodies, not expressions.
  if (declared.size() > 200 || declared.find('\n') != std::string_view::npos) return screen_single(declared);
  LicenseVerdict best{false, "", "unknown-license"};
  for (const auto& alternative : split_operator(declared, "or")) {
    LicenseVerdict all{true, "", ""};
    for (const auto& conj : split_operator(alternative, "and")) {
      std::string term = conj;
      term.erase(std::remove(term.begin(), term.end(), '('), term.end());
      term.erase(std::remove(term.begin(), term.end(), ')'), term.end());
      auto v = screen_single(term);
      if (!v.accepted) {
        all = v;
        break;
      }
      if (all.normalized.empty()) all.normalized = v.normalized;
    }
    if (all.accepted) return all;
    if (best.reason == "unknown-license") best = all;
  }
  return best;
}

LicenseVerdict screen_license(const PackageMetadata& meta) {
  std::string folded = fold(meta.license);
  if (!unknown_marker(folded)) {
    auto v = screen_license_string(meta.license);
    if (v.accepted || v.reason != "unknown-license") return v;
  }
  // Several license classifiers mean the user may pick any of them.
  LicenseVerdict best{false, "", "unknown-license"};
  for (const auto& c : meta.classifiers) {
    if (c.rfind("License ::", 0) != 0) continue;
    auto tail = c.substr(c.rfind("::") + 2);
    auto v = screen_single(tail);
    if (v.accepted) return v;
    if (best.reason == "unknown-license") best = v;
  }
  return best;
}

}  // namespace callctx::env
