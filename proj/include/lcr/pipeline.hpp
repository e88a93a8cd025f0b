#pragma once

#include "lcr/augment.hpp"
#include "lcr/config.hpp"
#include "lcr/corpus.hpp"
#include "lcr/eval.hpp"
#include "lcr/querygen.hpp"
#include "lcr/retrieval.hpp"
#include "lcr/testkit.hpp"
#include "lcr/training.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace lcr {

struct PipelineConfig {
    struct Paths {
        std::filesystem::path raw = "raw.jsonl";            // fixtures output, ingest input
        std::filesystem::path corpus = "corpus.jsonl";      // ingest output
        std::filesystem::path admitted = "admitted.jsonl";  // extract output
        std::filesystem::path exclusions = "exclusions.tsv";
        std::filesystem::path queries = "queries.jsonl";    // synthesized training queries
        std::filesystem::path eval_queries = "eval_queries.jsonl";
        std::filesystem::path pairs = "pairs.tsv";
        std::filesystem::path triplets = "triplets.tsv";
        std::filesystem::path model = "model.bin";
        std::filesystem::path loss_curve = "loss.tsv";
        std::filesystem::path index = "bm25.json";
        std::filesystem::path run = "run.tsv";
        std::filesystem::path qrels = "qrels.tsv";
        std::filesystem::path pools = "pools.tsv";
        std::filesystem::path metrics = "metrics.json";
        std::filesystem::path report = "report.txt";
        std::filesystem::path exemplars;     // optional prompt exemplars
        std::filesystem::path article_table; // optional article role table
    };

    Paths paths;
    std::uint64_t seed = 0;

    CorpusFilterConfig filter;
    GeneratorKind generator = GeneratorKind::offline_template;
    ChatClientConfig client;
    GenerationConfig generation;
    std::size_t max_in_flight = 4;
    bool anonymize = true;

    AugmentConfig augment;
    TrainSchedule schedule;
    ToyEmbedder::Options embedder;
    bool use_triplets = false;

    SegmentConfig segments;
    Bm25Params bm25;
    TokenizerKind tokenizer = TokenizerKind::char_bigram;
    ScorerKind scorer = ScorerKind::bm25;
    std::size_t top_k = 100;
    std::string run_tag;

    EvalConfig eval;
    std::vector<std::filesystem::path> report_runs;

    testkit::SyntheticSpec synthetic;
    testkit::QrelsSpec fixture;

    /// Relative paths are resolved against work_dir. Per-stage seeds are
    /// derived from `seed` unless set explicitly.
    static PipelineConfig from(const KeyedConfig& cfg, const std::filesystem::path& work_dir = ".");
};

const std::vector<std::string>& stage_names();

/// Runs one stage. Messages go to `log`; errors propagate as lcr::Error.
void run_stage(const std::string& name, const PipelineConfig& cfg, std::ostream& log);

// Building blocks shared by the stages and by experiment harnesses.

std::map<std::string, const AdmittedCase*> index_by_id(const std::vector<AdmittedCase>& corpus);

/// Joins pairs with query text and positive case text.
std::vector<TrainingExample> examples_from_pairs(const std::vector<TrainingPair>& pairs,
                                                 const std::vector<QueryRecord>& queries,
                                                 const std::map<std::string, const AdmittedCase*>& corpus);

std::vector<TrainingExample> examples_from_triplets(const std::vector<Triplet>& triplets,
                                                    const std::vector<QueryRecord>& queries,
                                                    const std::map<std::string, const AdmittedCase*>& corpus);

std::vector<Bm25Index::Document> retrieval_documents(const std::vector<AdmittedCase>& corpus);

/// Ranks each query's pool (or the whole collection when it has none).
RankedRun search_all(const Retriever& retriever, const std::vector<QueryRecord>& queries,
                     const std::map<std::string, std::vector<std::string>>& pools, ScorerKind scorer,
                     std::size_t top_k, const std::string& tag);

/// Proportion sweep over runs labelled "p=<value>"; empty when fewer than
/// two such runs exist.
std::string format_sweep_table(const std::vector<std::pair<std::string, MetricsReport>>& runs);

}  // namespace lcr
