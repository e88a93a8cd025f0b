#include "lcr/eval.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace lcr {

void RelevanceJudgments::add(const std::string& query_id, const std::string& case_id, int label)
{
    if (label < 0 || label > 3) {
        fail(ErrorKind::malformed_record, "label " + std::to_string(label) + " out of range for " + query_id);
    }
    m_queries[query_id][case_id] = label;
}

const RelevanceJudgments::Pool* RelevanceJudgments::pool(const std::string& query_id) const
{
    auto it = m_queries.find(query_id);
    return it == m_queries.end() ? nullptr : &it->second;
}

void sort_ranking(Ranking& ranking)
{
    std::sort(ranking.begin(), ranking.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.case_id < b.case_id;
    });
}

Ranking restrict_to_annotated(const Ranking& ranking, const RelevanceJudgments::Pool& pool)
{
    Ranking out;
    for (const auto& e : ranking) {
        if (pool.count(e.case_id)) out.push_back(e);
    }
    return out;
}

std::vector<int> ranking_labels(const Ranking& ranking, const RelevanceJudgments::Pool& pool)
{
    std::vector<int> labels;
    for (const auto& e : ranking) {
        if (auto it = pool.find(e.case_id); it != pool.end()) labels.push_back(it->second);
    }
    return labels;
}

double precision_at_k(std::span<const int> labels, int k)
{
    if (k < 1) fail(ErrorKind::usage, "k must be >= 1");
    auto n = std::min<std::size_t>(labels.size(), static_cast<std::size_t>(k));
    auto hits = std::count(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n),
                           RelevanceJudgments::kRelevantLabel);
    return static_cast<double>(hits) / k;
}

double average_precision(std::span<const int> labels, std::size_t pool_relevant)
{
    if (pool_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == RelevanceJudgments::kRelevantLabel) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(pool_relevant);
}

namespace {

double gain_of(int label, Gain gain)
{
    return gain == Gain::linear ? static_cast<double>(label) : std::exp2(label) - 1.0;
}

double dcg(std::span<const int> labels, int k, Gain gain)
{
    double sum = 0.0;
    auto n = std::min<std::size_t>(labels.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) sum += gain_of(labels[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    return sum;
}

}  // namespace

double ndcg_at_k(std::span<const int> labels, std::span<const int> pool_labels, int k, Gain gain)
{
    if (k < 1) fail(ErrorKind::usage, "k must be >= 1");
    std::vector<int> ideal(pool_labels.begin(), pool_labels.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = dcg(ideal, k, gain);
    if (idcg <= 0.0) return 0.0;
    return dcg(labels, k, gain) / idcg;
}

std::vector<std::string> EvalConfig::metric_names() const
{
    std::vector<std::string> names;
    for (int k : precision_ks) names.push_back("P@" + std::to_string(k));
    names.push_back("MAP");
    for (int k : ndcg_ks) names.push_back("NDCG@" + std::to_string(k));
    return names;
}

double MetricsReport::metric(const std::string& name) const
{
    for (std::size_t i = 0; i < metric_names.size(); ++i) {
        if (metric_names[i] == name) return macro.at(i);
    }
    fail(ErrorKind::usage, "no metric " + name);
}

MetricsReport evaluate_run(const RankedRun& run, const RelevanceJudgments& qrels, const EvalConfig& cfg)
{
    MetricsReport report;
    report.metric_names = cfg.metric_names();
    report.macro.assign(report.metric_names.size(), 0.0);

    for (const auto& [qid, pool] : qrels.queries()) {
        if (!run.queries.count(qid)) report.missing.push_back(qid);
    }
    for (const auto& [qid, ranking] : run.queries) {
        if (!qrels.pool(qid)) report.unjudged.push_back(qid);
    }
    if (cfg.strict && (!report.missing.empty() || !report.unjudged.empty())) {
        std::string ids;
        for (const auto& q : report.missing) ids += " " + q;
        for (const auto& q : report.unjudged) ids += " " + q;
        fail(ErrorKind::query_mismatch, "queries present in only one input:" + ids);
    }

    for (const auto& [qid, pool] : qrels.queries()) {
        auto it = run.queries.find(qid);
        if (it == run.queries.end()) continue;
        auto labels = ranking_labels(it->second, pool);
        if (labels.empty()) report.warnings.push_back(qid + ": no annotated candidate retrieved; metrics are 0");
        std::vector<int> pool_labels;
        std::size_t pool_relevant = 0;
        for (const auto& [cid, label] : pool) {
            pool_labels.push_back(label);
            pool_relevant += label == RelevanceJudgments::kRelevantLabel;
        }
        QueryMetrics qm{qid, {}};
        for (int k : cfg.precision_ks) qm.values.push_back(precision_at_k(labels, k));
        qm.values.push_back(average_precision(labels, pool_relevant));
        for (int k : cfg.ndcg_ks) qm.values.push_back(ndcg_at_k(labels, pool_labels, k, cfg.gain));
        report.per_query.push_back(std::move(qm));
    }
    if (!report.per_query.empty()) {
        for (const auto& qm : report.per_query) {
            for (std::size_t i = 0; i < qm.values.size(); ++i) report.macro[i] += qm.values[i];
        }
        for (auto& v : report.macro) v /= static_cast<double>(report.per_query.size());
    }
    return report;
}

namespace {

std::string fixed(double v, int precision)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string signed_fixed(double v, int precision)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.*f", precision, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width)
{
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_report_table(const std::vector<std::pair<std::string, MetricsReport>>& runs)
{
    if (runs.empty()) return {};
    const auto& names = runs.front().second.metric_names;
    std::size_t label_width = 6;
    for (const auto& [label, r] : runs) label_width = std::max(label_width, label.size() + 2);

    std::ostringstream out;
    out << pad("run", label_width);
    for (const auto& n : names) out << pad(n, 10);
    out << "queries\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& [label, report] = runs[r];
        out << pad(label, label_width);
        for (double v : report.macro) out << pad(fixed(100.0 * v, 1), 10);
        out << report.per_query.size() << "\n";
    }
    if (runs.size() > 1) {
        out << "\ndelta vs " << runs.front().first << "\n";
        for (std::size_t r = 1; r < runs.size(); ++r) {
            const auto& [label, report] = runs[r];
            out << pad(label, label_width);
            for (std::size_t i = 0; i < report.macro.size(); ++i) {
                out << pad(signed_fixed(100.0 * (report.macro[i] - runs.front().second.macro[i]), 1), 10);
            }
            out << "\n";
        }
    }
    for (const auto& [label, report] : runs) {
        if (!report.missing.empty()) {
            out << label << ": missing queries:";
            for (const auto& q : report.missing) out << " " << q;
            out << "\n";
        }
        for (const auto& w : report.warnings) out << label << ": warning: " << w << "\n";
    }
    return out.str();
}

std::string report_to_json(const std::vector<std::pair<std::string, MetricsReport>>& runs)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [label, report] : runs) {
        nlohmann::json r;
        r["run"] = label;
        for (std::size_t i = 0; i < report.metric_names.size(); ++i) r["macro"][report.metric_names[i]] = report.macro[i];
        for (const auto& qm : report.per_query) {
            auto& q = r["per_query"][qm.query_id];
            for (std::size_t i = 0; i < report.metric_names.size(); ++i) q[report.metric_names[i]] = qm.values[i];
        }
        r["missing"] = report.missing;
        r["unjudged"] = report.unjudged;
        r["warnings"] = report.warnings;
        j.push_back(std::move(r));
    }
    return j.dump(2);
}

RelevanceJudgments read_qrels(const std::filesystem::path& path)
{
    RelevanceJudgments qrels;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        if (f.size() != 3) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": expected 3 fields");
        }
        int label = -1;
        try {
            label = std::stoi(f[2]);
        } catch (const std::logic_error&) {
        }
        qrels.add(f[0], f[1], label);
    });
    return qrels;
}

void write_qrels(const std::filesystem::path& path, const RelevanceJudgments& qrels)
{
    std::string out;
    for (const auto& [qid, pool] : qrels.queries()) {
        for (const auto& [cid, label] : pool) {
            out += io::join_tsv({qid, cid, std::to_string(label)});
            out += '\n';
        }
    }
    io::write_atomic(path, out);
}

void write_run(const std::filesystem::path& path, const RankedRun& run)
{
    std::string out;
    char score[40];
    for (const auto& [qid, ranking] : run.queries) {
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            std::snprintf(score, sizeof score, "%.17g", ranking[i].score);
            out += io::join_tsv({qid, ranking[i].case_id, std::to_string(i + 1), score, run.tag});
            out += '\n';
        }
    }
    io::write_atomic(path, out);
}

RankedRun read_run(const std::filesystem::path& path)
{
    RankedRun run;
    std::map<std::string, std::vector<std::pair<long, RankedEntry>>> rows;
    std::map<std::string, std::set<std::string>> seen;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        auto where = path.string() + ":" + std::to_string(number);
        if (f.size() != 5) fail(ErrorKind::malformed_record, where + ": expected 5 fields");
        long rank = 0;
        double score = 0.0;
        try {
            rank = std::stol(f[2]);
            score = std::stod(f[3]);
        } catch (const std::logic_error&) {
            fail(ErrorKind::malformed_record, where + ": bad rank or score");
        }
        if (!seen[f[0]].insert(f[1]).second) fail(ErrorKind::malformed_record, where + ": duplicate case " + f[1]);
        if (run.tag.empty()) run.tag = f[4];
        rows[f[0]].push_back({rank, {f[1], score}});
    });
    for (auto& [qid, list] : rows) {
        std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& ranking = run.queries[qid];
        for (auto& [rank, entry] : list) ranking.push_back(std::move(entry));
    }
    return run;
}

}  // namespace lcr
