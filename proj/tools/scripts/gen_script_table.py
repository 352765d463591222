# Copyright 2026 The MTME Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Generates core/src/unicode_scripts_table.inc from the Unicode Scripts.txt
data bundled with fontTools.

Usage: python3 gen_script_table.py > ../../core/src/unicode_scripts_table.inc
"""

import re

from fontTools.unicodedata import Scripts


def main():
    with open(Scripts.__file__, encoding="utf-8") as f:
        source = f.read()
    match = re.search(r"Scripts-(\d+\.\d+\.\d+)\.txt", source)
    version = match.group(1) if match else "unknown"

    codes = sorted(set(Scripts.VALUES))
    index = {code: i for i, code in enumerate(codes)}
    print("// Generated by tools/scripts/gen_script_table.py. Do not edit.")
    print(f'inline constexpr const char* kUnicodeScriptsVersion = "{version}";')
    print(f"inline constexpr std::size_t kScriptCount = {len(codes)};")
    print("inline constexpr ScriptName kScriptNames[kScriptCount] = {")
    for code in codes:
        print(f'    {{"{code}", "{Scripts.NAMES[code]}"}},')
    print("};")
    print(f"inline constexpr std::size_t kRangeCount = {len(Scripts.RANGES)};")
    print("// Start codepoint of each range and the index of its script.")
    print("inline constexpr ScriptRange kRanges[kRangeCount] = {")
    for start, code in zip(Scripts.RANGES, Scripts.VALUES):
        print(f"    {{0x{start:06X}, {index[code]}}},")
    print("};")


if __name__ == "__main__":
    main()
