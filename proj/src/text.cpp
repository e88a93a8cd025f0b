#include "lcr/text.hpp"

#include "lcr/error.hpp"

#include <array>

namespace lcr {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::missing_field: return "MissingField";
    case ErrorKind::malformed_record: return "MalformedRecord";
    case ErrorKind::extraction_failed: return "ExtractionFailed";
    case ErrorKind::unknown_article: return "UnknownArticle";
    case ErrorKind::empty_pool: return "EmptyPool";
    case ErrorKind::generation_failed: return "GenerationFailed";
    case ErrorKind::query_too_long: return "QueryTooLong";
    case ErrorKind::main_article_mismatch: return "MainArticleMismatch";
    case ErrorKind::no_match: return "NoMatch";
    case ErrorKind::zero_vector: return "ZeroVector";
    case ErrorKind::degenerate_row: return "DegenerateRow";
    case ErrorKind::non_finite_loss: return "NonFiniteLoss";
    case ErrorKind::no_positives: return "NoPositives";
    case ErrorKind::unknown_doc: return "UnknownDoc";
    case ErrorKind::empty_corpus: return "EmptyCorpus";
    case ErrorKind::query_mismatch: return "QueryMismatch";
    case ErrorKind::usage: return "UsageError";
    case ErrorKind::io: return "IoError";
    }
    return "Error";
}

}  // namespace lcr

namespace lcr::text {

namespace {

std::size_t sequence_length(unsigned char lead)
{
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xe) return 3;
    if ((lead >> 3) == 0x1e) return 4;
    return 1;
}

bool is_space_at(std::string_view s, std::size_t i, std::size_t& width)
{
    auto c = static_cast<unsigned char>(s[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        width = 1;
        return true;
    }
    // U+3000 ideographic space
    if (s.substr(i, 3) == "\xe3\x80\x80") {
        width = 3;
        return true;
    }
    return false;
}

}  // namespace

std::vector<std::size_t> char_offsets(std::string_view s)
{
    std::vector<std::size_t> out;
    out.reserve(s.size() + 1);
    std::size_t i = 0;
    while (i < s.size()) {
        out.push_back(i);
        auto len = sequence_length(static_cast<unsigned char>(s[i]));
        std::size_t j = 1;
        while (j < len && i + j < s.size()
               && (static_cast<unsigned char>(s[i + j]) & 0xc0) == 0x80) {
            ++j;
        }
        i += j;
    }
    out.push_back(s.size());
    return out;
}

std::size_t char_count(std::string_view s) { return char_offsets(s).size() - 1; }

std::string char_substr(std::string_view s, std::size_t first, std::size_t count)
{
    auto offsets = char_offsets(s);
    std::size_t n = offsets.size() - 1;
    if (first >= n) return {};
    std::size_t last = first + count < n ? first + count : n;
    return std::string(s.substr(offsets[first], offsets[last] - offsets[first]));
}

std::vector<std::string> chars(std::string_view s)
{
    auto offsets = char_offsets(s);
    std::vector<std::string> out;
    out.reserve(offsets.size() - 1);
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        out.emplace_back(s.substr(offsets[i], offsets[i + 1] - offsets[i]));
    }
    return out;
}

std::string trim(std::string_view s)
{
    std::size_t begin = 0;
    std::size_t width = 0;
    while (begin < s.size() && is_space_at(s, begin, width)) begin += width;
    std::size_t end = s.size();
    while (end > begin) {
        if (end >= 1 && is_space_at(s, end - 1, width) && width == 1) {
            end -= 1;
        } else if (end >= begin + 3 && s.substr(end - 3, 3) == "\xe3\x80\x80") {
            end -= 3;
        } else {
            break;
        }
    }
    return std::string(s.substr(begin, end - begin));
}

std::string normalize_space(std::string_view s)
{
    std::string t = trim(s);
    std::string out;
    out.reserve(t.size());
    std::size_t i = 0;
    bool pending = false;
    while (i < t.size()) {
        std::size_t width = 0;
        if (is_space_at(t, i, width)) {
            pending = true;
            i += width;
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(t[i]);
        ++i;
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s)
{
    static constexpr std::array<std::string_view, 4> cjk_stops = {
        "\xe3\x80\x82",  // 。
        "\xef\xbc\x81",  // ！
        "\xef\xbc\x9f",  // ？
        "\xef\xbc\x9b",  // ；
    };
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t stop = 0;
        for (auto mark : cjk_stops) {
            if (s.substr(i, mark.size()) == mark) {
                stop = mark.size();
                break;
            }
        }
        if (stop == 0 && (s[i] == '.' || s[i] == '!' || s[i] == '?')
            && (i + 1 == s.size() || s[i + 1] == ' ')) {
            stop = i + 1 < s.size() ? 2 : 1;
        }
        if (stop > 0) {
            out.emplace_back(s.substr(start, i + stop - start));
            i += stop;
            start = i;
        } else {
            ++i;
        }
    }
    if (start < s.size()) out.emplace_back(s.substr(start));
    return out;
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace lcr::text
