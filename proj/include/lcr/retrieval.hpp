#pragma once

#include "lcr/eval.hpp"
#include "lcr/training.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lcr {

enum class TokenizerKind { char_bigram, whitespace };

const char* to_string(TokenizerKind kind) noexcept;
TokenizerKind parse_tokenizer_kind(std::string_view s);

/// Overlapping code point bigrams; whitespace is skipped and breaks runs.
/// A single-character run yields that character.
std::vector<std::string> char_bigrams(std::string_view text);
std::vector<std::string> whitespace_tokens(std::string_view text);
std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    void validate() const;
};

/// Okapi BM25 over an in-memory inverted index.
///   score(q, d) = Σ_{t ∈ q} idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·|d|/avgdl))
///   idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
/// Query terms are counted once each.
class Bm25Index {
  public:
    struct Document {
        std::string id;
        std::string text;
    };

    static Bm25Index build(const std::vector<Document>& docs, TokenizerKind tokenizer = TokenizerKind::char_bigram);

    double score(const std::vector<std::string>& query_tokens, const std::string& doc_id,
                 const Bm25Params& params = {}) const;
    double score_text(std::string_view query, const std::string& doc_id, const Bm25Params& params = {}) const;

    std::size_t size() const noexcept { return m_ids.size(); }
    double average_length() const noexcept { return m_avgdl; }
    std::size_t document_frequency(const std::string& term) const;
    std::size_t term_frequency(const std::string& term, const std::string& doc_id) const;
    TokenizerKind tokenizer() const noexcept { return m_tokenizer; }
    const std::vector<std::string>& ids() const noexcept { return m_ids; }

    void save(const std::filesystem::path& path) const;
    static Bm25Index load(const std::filesystem::path& path);

  private:
    std::size_t doc_index(const std::string& doc_id) const;

    TokenizerKind m_tokenizer = TokenizerKind::char_bigram;
    std::vector<std::string> m_ids;
    std::unordered_map<std::string, std::size_t> m_by_id;
    std::vector<std::uint32_t> m_lengths;
    double m_avgdl = 0.0;
    // term -> (doc index, tf), sorted by doc index
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> m_postings;
};

struct SegmentConfig {
    std::size_t max_len = 2048;
    std::size_t stride = 2048;
    void validate() const;
};

/// Windows of at most max_len characters starting every stride characters;
/// the last window ends at the end of the text.
std::vector<std::string> segment(std::string_view text, const SegmentConfig& cfg = {});

/// Closed form of segment(text).size() for a text of `length` characters.
std::size_t segment_count(std::size_t length, const SegmentConfig& cfg = {});

/// Maximum cosine between the query vector and each segment's embedding.
double dense_score(const Eigen::VectorXd& query_vec, std::string_view case_text, const Embedder& embedder,
                   const SegmentConfig& cfg = {});

/// Segment embeddings for a fixed candidate set, unit-normalized once.
class DenseIndex {
  public:
    static DenseIndex build(const std::vector<Bm25Index::Document>& docs, const Embedder& embedder,
                            const SegmentConfig& cfg = {});

    double score(const Eigen::VectorXd& query_vec, const std::string& doc_id) const;
    bool contains(const std::string& doc_id) const { return m_by_id.count(doc_id) > 0; }

  private:
    std::unordered_map<std::string, std::size_t> m_by_id;
    std::vector<Eigen::MatrixXd> m_segments;  // one unit row per segment
};

enum class ScorerKind { bm25, dense };

const char* to_string(ScorerKind kind) noexcept;
ScorerKind parse_scorer_kind(std::string_view s);

/// Exhaustive scorer over a candidate collection.
class Retriever {
  public:
    explicit Retriever(std::vector<Bm25Index::Document> docs);

    void enable_bm25(const Bm25Params& params = {}, TokenizerKind tokenizer = TokenizerKind::char_bigram);
    void enable_bm25(Bm25Index index, const Bm25Params& params = {});
    void enable_dense(const Embedder& embedder, const SegmentConfig& cfg = {});

    /// Top-k of the pool (the whole collection when the pool is empty),
    /// ordered by descending score then ascending case_id. Throws
    /// EmptyCorpus when there is nothing to rank.
    Ranking search(std::string_view query, ScorerKind scorer, std::size_t k,
                   std::span<const std::string> pool = {}) const;

  private:
    std::vector<Bm25Index::Document> m_docs;
    std::optional<Bm25Index> m_bm25;
    Bm25Params m_params;
    const Embedder* m_embedder = nullptr;
    std::optional<DenseIndex> m_dense;
};

/// TSV candidate pools: query_id, case_id (one line per candidate).
std::map<std::string, std::vector<std::string>> read_pools(const std::filesystem::path& path);
void write_pools(const std::filesystem::path& path, const std::map<std::string, std::vector<std::string>>& pools);

}  // namespace lcr
