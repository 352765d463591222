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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mtme {

// Lowercases (simple Unicode case mapping) and splits on every run of
// characters that are neither letters, digits nor combining marks. Invalid
// UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// Long Unicode script name of a codepoint ("Latin", "Cyrillic", "Common",
// "Inherited", "Unknown", ...), from compiled-in Scripts.txt data.
std::string_view script_of(char32_t codepoint);

// Unicode version of the compiled-in script data.
std::string_view unicode_scripts_version();

// Distinct scripts in a UTF-8 string, excluding Common and Unknown.
// Inherited (combining marks) is kept as its own entry.
std::vector<std::string> scripts_in(std::string_view text);

}  // namespace mtme
