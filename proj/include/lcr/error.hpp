#pragma once

#include <stdexcept>
#include <string>

namespace lcr {

enum class ErrorKind {
    missing_field,
    malformed_record,
    extraction_failed,
    unknown_article,
    empty_pool,
    generation_failed,
    query_too_long,
    main_article_mismatch,
    no_match,
    zero_vector,
    degenerate_row,
    non_finite_loss,
    no_positives,
    unknown_doc,
    empty_corpus,
    query_mismatch,
    usage,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. The kind is what callers
/// branch on; the message is for humans.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), m_kind(kind)
    {}

    ErrorKind kind() const noexcept { return m_kind; }

  private:
    ErrorKind m_kind;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace lcr
