// Copyright 2026 The MTME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtme/text.h"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace mtme {
namespace {

struct ScriptName {
  const char* code;
  const char* name;
};

struct ScriptRange {
  char32_t start;
  unsigned short script;
};

#include "unicode_scripts_table.inc"

bool is_word_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const std::int8_t cat = u_charType(c);
  return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK ||
         cat == U_ENCLOSING_MARK;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto n = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c >= 0 && is_word_char(c)) {
      const UChar32 lower = u_tolower(c);
      char buf[U8_MAX_LENGTH];
      std::int32_t len = 0;
      U8_APPEND_UNSAFE(buf, len, lower);
      current.append(buf, static_cast<std::size_t>(len));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string_view script_of(char32_t codepoint) {
  if (codepoint > 0x10FFFF) return "Unknown";
  const auto* end = kRanges + kRangeCount;
  const auto* it = std::upper_bound(kRanges, end, codepoint,
                                    [](char32_t cp, const ScriptRange& r) { return cp < r.start; });
  return kScriptNames[(it - 1)->script].name;
}

std::string_view unicode_scripts_version() { return kUnicodeScriptsVersion; }

std::vector<std::string> scripts_in(std::string_view text) {
  std::set<std::string_view> seen;
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto n = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) continue;
    const std::string_view script = script_of(static_cast<char32_t>(c));
    if (script != "Common" && script != "Unknown") seen.insert(script);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace mtme
