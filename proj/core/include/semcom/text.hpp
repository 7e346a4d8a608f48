#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semcom {

// ASCII case fold; non-ASCII bytes pass through untouched.
std::string fold_case(std::string_view s);

// Maximal runs of alphanumeric bytes, case-folded. "Alice's Google-Account."
// -> {"alice", "s", "google", "account"}.
std::vector<std::string> split_words(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

} // namespace semcom
