#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lcr {

enum class DocKind { judgment, ruling };

const char* to_string(DocKind kind) noexcept;
DocKind parse_doc_kind(std::string_view s);

/// Statute article number with an optional sub-article (第一百三十三条之一
/// is {133, 1}, written "133-1").
struct ArticleId {
    int number = 0;
    int sub = 0;

    auto operator<=>(const ArticleId&) const = default;

    std::string to_string() const;
    static ArticleId parse(std::string_view s);
};

using ArticleSet = std::set<ArticleId>;

enum class TermKind { death, life, fixed_term, detention, control, fine_only, exempt };

const char* to_string(TermKind kind) noexcept;
TermKind parse_term_kind(std::string_view s);

/// Outcome of the final judgment. months only carries meaning for
/// fixed_term, detention and control.
struct PrisonTerm {
    TermKind kind = TermKind::exempt;
    int months = 0;

    bool operator==(const PrisonTerm&) const = default;

    static PrisonTerm death() { return {TermKind::death, 0}; }
    static PrisonTerm life() { return {TermKind::life, 0}; }
    static PrisonTerm fixed(int months) { return {TermKind::fixed_term, months}; }
    static PrisonTerm detention(int months) { return {TermKind::detention, months}; }
    static PrisonTerm control(int months) { return {TermKind::control, months}; }
    static PrisonTerm fine_only() { return {TermKind::fine_only, 0}; }
    static PrisonTerm exempt() { return {TermKind::exempt, 0}; }

    bool has_months() const noexcept
    {
        return kind == TermKind::fixed_term || kind == TermKind::detention
               || kind == TermKind::control;
    }
    bool valid() const noexcept
    {
        if (kind == TermKind::fixed_term) return months >= 1;
        return has_months() ? months >= 0 : months == 0;
    }
    std::string to_string() const;
};

struct LegalElements {
    std::set<std::string> charges;
    ArticleSet main_articles;
    ArticleSet ancillary_articles;
    PrisonTerm prison_term;

    bool operator==(const LegalElements&) const = default;
};

struct CaseDocument {
    std::string case_id;
    DocKind doc_kind = DocKind::judgment;
    std::string fact;
    std::string reason;
    std::string judgment;
    std::vector<std::string> charge_labels;
    // Optional structured fields carried by some corpora. Used only when the
    // corresponding section yields nothing.
    std::vector<ArticleId> structured_articles;
    std::optional<PrisonTerm> structured_term;

    bool operator==(const CaseDocument&) const = default;

    /// Full text used as a retrieval candidate.
    std::string full_text() const;
};

// ---------------------------------------------------------------------------
// Record I/O. One JSON object per line:
//   {"case_id", "doc_kind", "fact", "reason", "judgment",
//    "charges": [...], "articles": ["133", "133-1"],
//    "term": {"kind": "fixed_term", "months": 36}}
// "id" and "kind" are accepted as aliases of "case_id" and "doc_kind".

CaseDocument parse_case(std::string_view json_line);
std::string serialize_case(const CaseDocument& doc);

std::string serialize_elements(const LegalElements& e);
LegalElements parse_elements(std::string_view json);

// ---------------------------------------------------------------------------
// Element extraction.

enum class ArticleRole { main, ancillary };

const char* to_string(ArticleRole role) noexcept;

/// Decides whether a cited article defines a charge (main) or modifies
/// sentencing (ancillary). By default articles up to the end of the General
/// Provisions of the Criminal Law are ancillary and later ones main; an
/// explicit table replaces the threshold entirely.
class ArticleSplitRule {
  public:
    static constexpr int kGeneralProvisionsLast = 101;

    ArticleSplitRule() = default;
    static ArticleSplitRule threshold(int last_ancillary);
    static ArticleSplitRule table(std::map<ArticleId, ArticleRole> roles);
    /// TSV lines: article id, "main" | "ancillary".
    static ArticleSplitRule load_table(const std::filesystem::path& path);

    ArticleRole classify(const ArticleId& article) const;
    bool is_table() const noexcept { return m_table.has_value(); }

  private:
    int m_last_ancillary = kGeneralProvisionsLast;
    std::optional<std::map<ArticleId, ArticleRole>> m_table;
};

inline ArticleRole classify_article(const ArticleId& article, const ArticleSplitRule& rule)
{
    return rule.classify(article);
}

/// Chinese or Arabic numeral string to integer (一百三十三 → 133,
/// 二〇一六 → 2016, 15 → 15). Throws MalformedRecord on anything else.
int parse_numeral(std::string_view s);

std::set<std::string> extract_charges(std::string_view judgment);
std::vector<ArticleId> extract_articles(std::string_view reason);
std::optional<PrisonTerm> extract_prison_term(std::string_view judgment);

/// Throws ExtractionFailed when no charge, no main article or no term can be
/// recovered.
LegalElements extract_elements(const CaseDocument& doc, const ArticleSplitRule& rule = {});

// ---------------------------------------------------------------------------
// Filtering.

struct CorpusFilterConfig {
    std::size_t min_fact_chars = 100;
    bool require_extractable_elements = true;
};

enum class ExclusionReason { ruling, short_fact, extraction_failed, duplicate_id, missing_field, malformed };

const char* to_string(ExclusionReason reason) noexcept;

struct Exclusion {
    std::string case_id;
    ExclusionReason reason;
    bool operator==(const Exclusion&) const = default;
};

struct AdmittedCase {
    CaseDocument doc;
    LegalElements elements;
};

struct FilterResult {
    std::vector<AdmittedCase> admitted;  // sorted by case_id
    std::vector<Exclusion> excluded;     // input order
};

FilterResult filter_corpus(const std::vector<CaseDocument>& docs, const CorpusFilterConfig& cfg = {},
                           const ArticleSplitRule& rule = {});

// ---------------------------------------------------------------------------
// Files.

struct IngestResult {
    std::vector<CaseDocument> docs;
    std::vector<Exclusion> rejected;  // MISSING_FIELD / MALFORMED, keyed by id or line number
};

IngestResult read_raw_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<CaseDocument>& docs);
std::vector<CaseDocument> read_corpus(const std::filesystem::path& path);

/// Admitted corpus: case record with an extra "elements" object per line.
void write_admitted(const std::filesystem::path& path, const std::vector<AdmittedCase>& cases);
std::vector<AdmittedCase> read_admitted(const std::filesystem::path& path);

void write_exclusions(const std::filesystem::path& path, const std::vector<Exclusion>& log);

}  // namespace lcr
