#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gretel {

// FNV-1a 64-bit digest, hex-encoded. Stable across platforms and runs;
// used for scripted-prompt lookup keys and artifact config digests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase, split on non-alphanumeric runs. The single tokenization used
// for both indexing and queries.
std::vector<std::string> tokenize(std::string_view text);

bool starts_with(std::string_view s, std::string_view prefix);

// Percent-encode for URL path segments and query values.
std::string url_encode(std::string_view s);

// Current UTC time as ISO-8601 ("2026-01-02T03:04:05Z").
std::string now_iso8601();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace gretel
