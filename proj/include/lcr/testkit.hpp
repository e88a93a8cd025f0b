#pragma once

#include "lcr/corpus.hpp"
#include "lcr/eval.hpp"
#include "lcr/querygen.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lcr::testkit {

/// Shape of a synthetic criminal-judgment corpus.
struct SyntheticSpec {
    std::size_t n_cases = 1000;
    std::size_t charge_count = 10;
    /// Main articles cited per case (1 or 2).
    std::size_t articles_per_charge = 1;
    /// Distinct sentencing levels per charge; each maps to one prison term.
    std::size_t severity_levels = 3;
    /// Probability that a case carries at least one sentencing circumstance.
    double circumstance_rate = 0.6;
    std::size_t filler_min = 3;
    std::size_t filler_max = 6;
    /// Extra records that the corpus filter must reject.
    std::size_t n_rulings = 0;
    std::size_t n_short_facts = 0;
    std::uint64_t seed = 0;

    static std::size_t max_charges();
};

struct CaseTruth {
    LegalElements elements;
    std::size_t charge_index = 0;
    std::size_t severity = 0;
    /// What the offline template generator must produce for this fact.
    std::string key_events;
    /// Entity surface forms planted in key_events.
    std::vector<std::pair<EntityCategory, std::string>> planted;
};

struct SyntheticCorpus {
    std::vector<CaseDocument> docs;             // valid cases, then rulings, then short facts
    std::map<std::string, CaseTruth> truth;     // valid cases only
    std::map<std::string, ExclusionReason> expected_exclusions;
};

SyntheticCorpus generate_corpus(const SyntheticSpec& spec);

/// Chinese numeral spelling used by the templates (133 → 一百三十三).
std::string chinese_numeral(int n);
/// 42 months → 三年六个月.
std::string chinese_duration(int months);

struct QrelsSpec {
    std::size_t n_queries = 50;
    std::size_t pool_size = 100;
    std::size_t annotated = 30;
    /// Annotated slots reserved per label (besides the source case); the
    /// remainder is filled with label-0 candidates.
    std::size_t label3 = 8;
    std::size_t label2 = 8;
    std::size_t label1 = 6;
};

struct Fixture {
    std::vector<QueryRecord> queries;
    RelevanceJudgments qrels;
    std::map<std::string, std::vector<std::string>> pools;  // query_id -> candidates
};

/// Label of a candidate for a query whose source has elements `source`:
/// 3 when main articles and prison term both agree, 2 for main articles only,
/// 1 for prison term only, 0 otherwise.
int agreement_label(const LegalElements& source, const LegalElements& candidate);

/// Benchmark-shaped fixture over the valid cases of `corpus`. Queries come
/// from the offline generator followed by anonymization.
Fixture generate_qrels(const SyntheticCorpus& corpus, std::uint64_t seed, const QrelsSpec& spec = {});

}  // namespace lcr::testkit
