#pragma once

#include "lcr/corpus.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lcr {

// ---------------------------------------------------------------------------
// Prompt assembly

enum class Role { system, user, assistant };

const char* to_string(Role role) noexcept;

struct Message {
    Role role;
    std::string content;
    bool operator==(const Message&) const = default;
};

struct Exemplar {
    std::string id;
    std::string fact;
    std::string query;
};

/// Chat prompt used to compress a case fact into a short query. The message
/// sequence is: system, instruction (user), optional acknowledgement
/// (assistant), one user/assistant pair per exemplar, then the fact.
struct PromptTemplate {
    std::string system_text;
    std::string instruction_text;
    std::string acknowledgement_text;
    /// Appended as an extra user turn when the first answer is too long.
    std::string brevity_text;
    std::vector<Exemplar> exemplars;
    std::size_t exemplars_per_prompt = 2;

    /// The key-event extraction prompt with its two built-in exemplars.
    static PromptTemplate standard();
};

/// Exemplars are drawn without replacement from the pool by a generator
/// seeded with `seed`. Throws EmptyPool when the pool is too small.
std::vector<Message> assemble_prompt(std::string_view fact, const PromptTemplate& tpl, std::uint64_t seed,
                                     std::vector<std::string>* exemplar_ids = nullptr);

// ---------------------------------------------------------------------------
// Generation clients

enum class GeneratorKind { remote_model, offline_template };

const char* to_string(GeneratorKind kind) noexcept;
GeneratorKind parse_generator_kind(std::string_view s);

class GenerationClient {
  public:
    virtual ~GenerationClient() = default;
    /// Returns the assistant reply to the conversation. Implementations must
    /// be safe to call concurrently.
    virtual std::string complete(const std::vector<Message>& messages) = 0;
    virtual GeneratorKind kind() const noexcept = 0;
};

/// Deterministic stand-in for a hosted model: keeps the sentences of the last
/// user turn that contain a key-event marker (amounts, injuries, appraisals,
/// surrender...), in order. Falls back to the first sentence when none match.
class OfflineTemplateClient final : public GenerationClient {
  public:
    OfflineTemplateClient();
    explicit OfflineTemplateClient(std::vector<std::string> markers);

    static const std::vector<std::string>& default_markers();

    std::string complete(const std::vector<Message>& messages) override;
    GeneratorKind kind() const noexcept override { return GeneratorKind::offline_template; }

    /// The compression rule applied to a single fact.
    std::string compress(std::string_view fact) const;

  private:
    std::vector<std::string> m_markers;
};

struct ChatClientConfig {
    /// e.g. http://127.0.0.1:8000/v1/chat/completions
    std::string endpoint;
    std::string model;
    std::string api_key;
    std::chrono::milliseconds timeout{60000};
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double temperature = 0.0;
};

/// OpenAI-style chat completion over HTTP(S) with JSON bodies. Transport
/// errors, 429 and 5xx responses are retried with exponential backoff; other
/// failures raise GenerationFailed immediately.
class ChatHttpClient final : public GenerationClient {
  public:
    explicit ChatHttpClient(ChatClientConfig cfg);

    std::string complete(const std::vector<Message>& messages) override;
    GeneratorKind kind() const noexcept override { return GeneratorKind::remote_model; }

    /// Request body for a conversation.
    std::string request_body(const std::vector<Message>& messages) const;
    /// Extracts choices[0].message.content; throws GenerationFailed.
    static std::string parse_response(std::string_view body);

  private:
    ChatClientConfig m_cfg;
    std::string m_origin;
    std::string m_path;
};

// ---------------------------------------------------------------------------
// Anonymization

enum class EntityCategory { person, company, location, time, other };

const char* to_string(EntityCategory c) noexcept;
EntityCategory parse_entity_category(std::string_view s);

struct EntitySpan {
    std::size_t begin = 0;  // byte offsets into the tagged text
    std::size_t end = 0;
    EntityCategory category = EntityCategory::other;
    bool operator==(const EntitySpan&) const = default;
};

class EntityTagger {
  public:
    virtual ~EntityTagger() = default;
    /// Non-overlapping spans sorted by begin, on code point boundaries.
    virtual std::vector<EntitySpan> tag(std::string_view text) const = 0;
};

struct Lexicon {
    std::map<EntityCategory, std::vector<std::string>> entries;

    /// Names, companies and places the default tagger recognizes. The
    /// synthetic corpus plants entities from this list.
    static const Lexicon& gazetteer();
    /// Surrogates substituted for tagged entities.
    static const Lexicon& surrogates();
};

using ReplacementDictionary = Lexicon;

/// Gazetteer lookup plus date/time patterns. Longest match wins at each
/// position; scanning is left to right.
class DictionaryTagger final : public EntityTagger {
  public:
    DictionaryTagger();
    explicit DictionaryTagger(Lexicon gazetteer, bool date_patterns = true);

    std::vector<EntitySpan> tag(std::string_view text) const override;

  private:
    Lexicon m_gazetteer;
    bool m_date_patterns;
};

struct Replacement {
    std::string original;
    EntityCategory category;
    std::string replacement;
    std::size_t input_begin = 0;
    std::size_t output_begin = 0;
    bool operator==(const Replacement&) const = default;
};

struct AnonymizedText {
    std::string text;
    std::vector<Replacement> log;
};

/// Replaces every person/company/location/time span with a surrogate of the
/// same category. A surface form maps to one surrogate throughout the text,
/// and no surrogate equals any tagged surface form of the input.
AnonymizedText anonymize(std::string_view text, const EntityTagger& tagger, const ReplacementDictionary& replacements,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Query synthesis

struct QueryRecord {
    std::string query_id;
    std::string source_case_id;
    std::string text;
    GeneratorKind generator = GeneratorKind::offline_template;
    std::vector<std::string> exemplar_ids;
    std::vector<Replacement> anonymization_log;
    bool truncated = false;

    bool operator==(const QueryRecord&) const = default;
};

struct GenerationConfig {
    std::size_t max_query_chars = 400;
    /// Attempts when the client returns empty text.
    int max_attempts = 3;
    /// Raise QueryTooLong instead of truncating after the re-ask.
    bool strict_length = false;
};

/// Anonymization stage applied after generation; a null tagger skips it.
struct Anonymizer {
    const EntityTagger* tagger = nullptr;
    const ReplacementDictionary* replacements = nullptr;
};

std::string query_id_for(std::string_view case_id);

/// Truncates to whole sentences fitting in max_chars; cuts mid-sentence only
/// when the first sentence alone is too long.
std::string truncate_at_sentence(std::string_view text, std::size_t max_chars);

QueryRecord generate_query(const CaseDocument& doc, GenerationClient& client, const PromptTemplate& tpl,
                           std::uint64_t seed, const GenerationConfig& cfg = {}, Anonymizer anonymizer = {});

/// Runs generate_query over every case with at most max_in_flight requests
/// outstanding. Per-case seeds derive from (global_seed, case_id); output
/// order follows the input order.
std::vector<QueryRecord> generate_queries(const std::vector<CaseDocument>& docs, GenerationClient& client,
                                          const PromptTemplate& tpl, std::uint64_t global_seed,
                                          const GenerationConfig& cfg, Anonymizer anonymizer,
                                          std::size_t max_in_flight = 1);

std::string serialize_query(const QueryRecord& q);
QueryRecord parse_query(std::string_view json_line);
void write_queries(const std::filesystem::path& path, const std::vector<QueryRecord>& queries);
std::vector<QueryRecord> read_queries(const std::filesystem::path& path);

/// JSON lines of {"id", "fact", "query"}.
std::vector<Exemplar> read_exemplars(const std::filesystem::path& path);

}  // namespace lcr
