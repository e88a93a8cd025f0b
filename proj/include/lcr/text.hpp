#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcr::text {

/// Byte offsets of every code point start in a UTF-8 string, plus a final
/// entry equal to s.size(). Invalid lead bytes count as one unit each.
std::vector<std::size_t> char_offsets(std::string_view s);

/// Number of code points. Length limits throughout the library are in
/// these units, never bytes.
std::size_t char_count(std::string_view s);

/// Substring by code point range [first, first + count).
std::string char_substr(std::string_view s, std::size_t first, std::size_t count);

/// Splits into code point strings.
std::vector<std::string> chars(std::string_view s);

std::string trim(std::string_view s);

/// Trims and collapses internal runs of whitespace (ASCII and U+3000) to a
/// single ASCII space.
std::string normalize_space(std::string_view s);

/// Sentence split on 。！？； and ASCII ". ", "! ", "? ". Delimiters stay with
/// their sentence, so joining the pieces reproduces the input.
std::vector<std::string> split_sentences(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer; used to derive independent per-item seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for one item of a seeded batch job, independent of processing order.
inline std::uint64_t derive_seed(std::uint64_t global, std::string_view key)
{
    return mix64(global ^ fnv1a(key));
}

}  // namespace lcr::text
