// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wlab::utf8 {

/// Decodes UTF-8 into codepoints. Malformed sequences throw ParseError.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view codepoints);
std::string encode(char32_t codepoint);

/// Number of codepoints; same validation as decode.
std::size_t length(std::string_view text);

bool is_cjk(char32_t cp);

}  // namespace wlab::utf8
