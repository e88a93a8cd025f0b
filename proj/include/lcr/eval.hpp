#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lcr {

/// Graded labels 0..3 per query over its annotated pool. A case absent from
/// a query's map is unannotated.
class RelevanceJudgments {
  public:
    using Pool = std::map<std::string, int>;

    void add(const std::string& query_id, const std::string& case_id, int label);
    const Pool* pool(const std::string& query_id) const;
    const std::map<std::string, Pool>& queries() const { return m_queries; }

    static constexpr int kRelevantLabel = 3;

  private:
    std::map<std::string, Pool> m_queries;
};

struct RankedEntry {
    std::string case_id;
    double score = 0.0;
    bool operator==(const RankedEntry&) const = default;
};

using Ranking = std::vector<RankedEntry>;

/// Descending score, ascending case_id among equal scores.
void sort_ranking(Ranking& ranking);

struct RankedRun {
    std::string tag;
    std::map<std::string, Ranking> queries;
};

/// Drops unannotated candidates, preserving order.
Ranking restrict_to_annotated(const Ranking& ranking, const RelevanceJudgments::Pool& pool);

std::vector<int> ranking_labels(const Ranking& ranking, const RelevanceJudgments::Pool& pool);

/// Label-3 count among the first min(k, n) ranks, over k.
double precision_at_k(std::span<const int> labels, int k);

/// Mean over relevant ranks of precision at that rank, divided by the number
/// of relevant cases in the pool; 0 when the pool has none.
double average_precision(std::span<const int> labels, std::size_t pool_relevant);

enum class Gain { linear, exponential };

/// DCG@k over IDCG@k with the pool's labels sorted descending as the ideal;
/// 0 when IDCG is 0.
double ndcg_at_k(std::span<const int> labels, std::span<const int> pool_labels, int k, Gain gain = Gain::linear);

struct EvalConfig {
    std::vector<int> precision_ks{5, 10};
    std::vector<int> ndcg_ks{10, 20, 30};
    Gain gain = Gain::linear;
    /// Throw QueryMismatch instead of reporting mismatched query ids.
    bool strict = false;

    std::vector<std::string> metric_names() const;
};

struct QueryMetrics {
    std::string query_id;
    std::vector<double> values;  // aligned with EvalConfig::metric_names()
};

struct MetricsReport {
    std::vector<std::string> metric_names;
    std::vector<QueryMetrics> per_query;  // sorted by query_id
    std::vector<double> macro;
    std::vector<std::string> missing;   // judged queries absent from the run
    std::vector<std::string> unjudged;  // run queries without judgments
    std::vector<std::string> warnings;

    double metric(const std::string& name) const;
};

MetricsReport evaluate_run(const RankedRun& run, const RelevanceJudgments& qrels, const EvalConfig& cfg = {});

/// Side-by-side table, one row per run, with deltas against the first row.
std::string format_report_table(const std::vector<std::pair<std::string, MetricsReport>>& runs);
std::string report_to_json(const std::vector<std::pair<std::string, MetricsReport>>& runs);

/// TSV: query_id, case_id, label.
RelevanceJudgments read_qrels(const std::filesystem::path& path);
void write_qrels(const std::filesystem::path& path, const RelevanceJudgments& qrels);

/// TSV: query_id, case_id, rank (1-based), score, scorer_tag.
void write_run(const std::filesystem::path& path, const RankedRun& run);
RankedRun read_run(const std::filesystem::path& path);

}  // namespace lcr
