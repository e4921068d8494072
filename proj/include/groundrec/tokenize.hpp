#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundrec {

using Tokens = std::vector<std::string>;

/// Standard tokenizer shared by embedding, generation and BM25: ASCII
/// lowercase, split on anything that is not an ASCII letter or digit, drop
/// empty pieces. Bytes >= 0x80 are kept inside tokens so UTF-8 words survive.
Tokens tokenize(std::string_view text);

std::string join_tokens(const Tokens& tokens, std::string_view sep = " ");

}  // namespace groundrec
