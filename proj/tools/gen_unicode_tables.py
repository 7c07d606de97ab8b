#!/usr/bin/env python3
# Copyright 2026 The htd Authors
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
"""Regenerates src/unicode_tables.cpp from the Python unicodedata module.

Run from the repository root:  python3 tools/gen_unicode_tables.py
"""

import sys
import unicodedata

MAX_CP = 0x110000


def ranges_for(predicate):
    out = []
    start = None
    for cp in range(MAX_CP):
        ok = predicate(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def is_nd(cp):
    return unicodedata.category(chr(cp)) == "Nd"


def is_punct(cp):
    return unicodedata.category(chr(cp)).startswith("P")


def is_space(cp):
    return chr(cp).isspace()


def emit(f, name, ranges):
    f.write(f"const CodepointRange {name}[] = {{\n")
    for i in range(0, len(ranges), 4):
        chunk = ", ".join(
            "{0x%04X, 0x%04X}" % (lo, hi) for lo, hi in ranges[i : i + 4]
        )
        f.write(f"    {chunk},\n")
    f.write("};\n")
    f.write(f"const std::size_t {name}_count = {len(ranges)};\n\n")


def main():
    nd = ranges_for(is_nd)
    punct = ranges_for(is_punct)
    space = ranges_for(is_space)

    with open("src/unicode_tables.cpp", "w", encoding="utf-8") as f:
        f.write(
            """/* Copyright 2026 The htd Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Generated by tools/gen_unicode_tables.py from Unicode %s data.
// Do not edit by hand; rerun the generator instead.

#include "htd/unicode.hpp"

namespace htd::uni {

"""
            % unicodedata.unidata_version
        )
        emit(f, "kDecimalDigitRanges", nd)
        emit(f, "kPunctuationRanges", punct)
        emit(f, "kWhitespaceRanges", space)
        f.write("}  // namespace htd::uni\n")

    sys.stderr.write(
        f"wrote src/unicode_tables.cpp (Nd: {len(nd)} ranges, "
        f"P: {len(punct)} ranges, space: {len(space)} ranges)\n"
    )


if __name__ == "__main__":
    main()
