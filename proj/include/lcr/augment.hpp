#pragma once

#include "lcr/corpus.hpp"
#include "lcr/querygen.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lcr {

struct ElementEntry {
    std::string case_id;
    ArticleSet ancillary_articles;
    PrisonTerm prison_term;
    std::set<std::string> charges;
};

/// Admitted cases bucketed by their exact main-article set. Buckets are sorted
/// by case_id.
class ElementIndex {
  public:
    static ElementIndex build(const std::vector<AdmittedCase>& corpus);

    /// Canonical, order-independent key of a main-article set ("133|264").
    static std::string key_of(const ArticleSet& main_articles);

    const std::vector<ElementEntry>* bucket(const ArticleSet& main_articles) const;
    /// Every case sharing at least one charge, sorted by case_id.
    std::vector<const ElementEntry*> sharing_charge(const std::set<std::string>& charges) const;
    const LegalElements* elements(const std::string& case_id) const;

    const std::map<std::string, std::vector<ElementEntry>>& buckets() const { return m_buckets; }
    std::size_t case_count() const { return m_elements.size(); }

  private:
    std::map<std::string, std::vector<ElementEntry>> m_buckets;
    std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> m_by_charge;  // charge -> (bucket, slot)
    std::map<std::string, LegalElements> m_elements;
};

enum class MatchMode { exact_main_articles, shared_charge };
enum class TieBreak { smallest_case_id, seeded };

struct AugmentConfig {
    double proportion_augmented = 0.7;
    double weight_ancillary = 0.5;
    double weight_term = 0.5;
    std::uint64_t seed = 0;
    MatchMode match = MatchMode::exact_main_articles;
    TieBreak tie_break = TieBreak::smallest_case_id;

    /// Throws UsageError on out-of-range values.
    void validate() const;

    /// Augmentation does not apply to civil cases.
    static AugmentConfig civil()
    {
        AugmentConfig c;
        c.proportion_augmented = 0.0;
        return c;
    }
};

/// |a ∩ b| / |a ∪ b|, with two empty sets counting as identical.
double jaccard(const ArticleSet& a, const ArticleSet& b);

/// 1 for equal kinds (decaying as exp(-|Δmonths|/24) for month-bearing
/// kinds), 0.25 between life and death, 0 otherwise.
double term_similarity(const PrisonTerm& a, const PrisonTerm& b);

/// Weighted mean of ancillary-article Jaccard and term similarity. In exact
/// mode the main-article sets must be equal (MainArticleMismatch).
double element_similarity(const LegalElements& a, const LegalElements& b, const AugmentConfig& cfg = {});

std::optional<std::string> try_find_augmented_positive(const std::string& source_case_id, const ElementIndex& index,
                                                       const AugmentConfig& cfg = {});

/// Most similar distinct case for the source; throws NoMatch.
std::string find_augmented_positive(const std::string& source_case_id, const ElementIndex& index,
                                    const AugmentConfig& cfg = {});

enum class PairKind { original, augmented };

const char* to_string(PairKind kind) noexcept;

struct TrainingPair {
    std::string query_id;
    std::string positive_case_id;
    PairKind kind = PairKind::original;
    std::set<std::string> positive_charges;
    /// Selected for augmentation but no distinct match existed.
    bool fallback = false;

    bool operator==(const TrainingPair&) const = default;
};

/// One pair per query, in query order. Exactly floor(p·N) pairs are
/// augmented when enough queries have a match: queries are visited in a
/// seeded order and skipped (flagged fallback) when nothing matches.
std::vector<TrainingPair> mix_pairs(const std::vector<QueryRecord>& queries, const ElementIndex& index,
                                    const AugmentConfig& cfg = {});

std::size_t augmented_target(double proportion, std::size_t n);

/// TSV: query_id, positive_case_id, kind, fallback (0|1), charges joined by '|'.
void write_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> read_pairs(const std::filesystem::path& path);

}  // namespace lcr
