// Copyright 2026 The xscript Authors. All Rights Reserved.
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

namespace xscript {

// Throws DataError on malformed input.
std::u32string utf8_decode(std::string_view bytes);
std::string utf8_encode(std::u32string_view text);
std::string utf8_encode(char32_t c);

// "U+0628" style label.
std::string code_point_label(char32_t c);

// Each character followed by its code point label, space separated.
std::string describe_chars(std::u32string_view chars);

// Splits on a single delimiter byte; empty fields are kept.
std::vector<std::string> split_fields(std::string_view line, char delim);

}  // namespace xscript
