#include "lcr/retrieval.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lcr {

const char* to_string(TokenizerKind kind) noexcept
{
    return kind == TokenizerKind::char_bigram ? "char_bigram" : "whitespace";
}

TokenizerKind parse_tokenizer_kind(std::string_view s)
{
    if (s == "char_bigram") return TokenizerKind::char_bigram;
    if (s == "whitespace") return TokenizerKind::whitespace;
    fail(ErrorKind::usage, "unknown tokenizer '" + std::string(s) + "'");
}

namespace {

bool is_space(const std::string& c)
{
    return c == " " || c == "\t" || c == "\n" || c == "\r" || c == "\xe3\x80\x80";
}

}  // namespace

std::vector<std::string> char_bigrams(std::string_view s)
{
    std::vector<std::string> out;
    std::vector<std::string> run;
    auto flush = [&] {
        if (run.size() == 1) out.push_back(run[0]);
        for (std::size_t i = 0; i + 1 < run.size(); ++i) out.push_back(run[i] + run[i + 1]);
        run.clear();
    };
    for (auto& c : text::chars(s)) {
        if (is_space(c)) {
            flush();
        } else {
            run.push_back(std::move(c));
        }
    }
    flush();
    return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s)
{
    std::vector<std::string> out;
    for (auto& t : text::split(text::normalize_space(s), ' ')) {
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view s, TokenizerKind kind)
{
    return kind == TokenizerKind::char_bigram ? char_bigrams(s) : whitespace_tokens(s);
}

void Bm25Params::validate() const
{
    if (!(k1 >= 0.0)) fail(ErrorKind::usage, "bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) fail(ErrorKind::usage, "bm25 b must lie in [0, 1]");
}

Bm25Index Bm25Index::build(const std::vector<Document>& docs, TokenizerKind tokenizer)
{
    Bm25Index index;
    index.m_tokenizer = tokenizer;
    double total = 0.0;
    for (const auto& d : docs) {
        auto idx = static_cast<std::uint32_t>(index.m_ids.size());
        if (!index.m_by_id.emplace(d.id, idx).second) fail(ErrorKind::malformed_record, "duplicate doc id " + d.id);
        index.m_ids.push_back(d.id);
        auto tokens = tokenize(d.text, tokenizer);
        index.m_lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
        total += static_cast<double>(tokens.size());
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokens) ++tf[t];
        for (auto& [t, f] : tf) index.m_postings[t].emplace_back(idx, f);
    }
    index.m_avgdl = docs.empty() ? 0.0 : total / static_cast<double>(docs.size());
    return index;
}

std::size_t Bm25Index::doc_index(const std::string& doc_id) const
{
    auto it = m_by_id.find(doc_id);
    if (it == m_by_id.end()) fail(ErrorKind::unknown_doc, doc_id);
    return it->second;
}

std::size_t Bm25Index::document_frequency(const std::string& term) const
{
    auto it = m_postings.find(term);
    return it == m_postings.end() ? 0 : it->second.size();
}

std::size_t Bm25Index::term_frequency(const std::string& term, const std::string& doc_id) const
{
    auto idx = static_cast<std::uint32_t>(doc_index(doc_id));
    auto it = m_postings.find(term);
    if (it == m_postings.end()) return 0;
    auto pos = std::lower_bound(it->second.begin(), it->second.end(), std::pair<std::uint32_t, std::uint32_t>{idx, 0});
    return pos != it->second.end() && pos->first == idx ? pos->second : 0;
}

double Bm25Index::score(const std::vector<std::string>& query_tokens, const std::string& doc_id,
                        const Bm25Params& params) const
{
    const auto idx = static_cast<std::uint32_t>(doc_index(doc_id));
    const double n = static_cast<double>(m_ids.size());
    const double norm_len = m_avgdl > 0.0 ? m_lengths[idx] / m_avgdl : 0.0;
    std::set<std::string> unique(query_tokens.begin(), query_tokens.end());
    double total = 0.0;
    for (const auto& t : unique) {
        auto it = m_postings.find(t);
        if (it == m_postings.end()) continue;
        auto pos =
            std::lower_bound(it->second.begin(), it->second.end(), std::pair<std::uint32_t, std::uint32_t>{idx, 0});
        if (pos == it->second.end() || pos->first != idx) continue;
        const double tf = pos->second;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        total += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm_len));
    }
    return total;
}

double Bm25Index::score_text(std::string_view query, const std::string& doc_id, const Bm25Params& params) const
{
    return score(tokenize(query, m_tokenizer), doc_id, params);
}

void Bm25Index::save(const std::filesystem::path& path) const
{
    nlohmann::json j;
    j["tokenizer"] = to_string(m_tokenizer);
    j["ids"] = m_ids;
    j["lengths"] = m_lengths;
    auto& postings = j["postings"] = nlohmann::json::object();
    std::map<std::string, const std::vector<std::pair<std::uint32_t, std::uint32_t>>*> sorted;
    for (const auto& [t, list] : m_postings) sorted[t] = &list;
    for (const auto& [t, list] : sorted) {
        auto& arr = postings[t] = nlohmann::json::array();
        for (const auto& [d, f] : *list) arr.push_back({d, f});
    }
    io::write_atomic(path, j.dump());
}

Bm25Index Bm25Index::load(const std::filesystem::path& path)
{
    Bm25Index index;
    try {
        auto j = nlohmann::json::parse(io::read_file(path));
        index.m_tokenizer = parse_tokenizer_kind(j.at("tokenizer").get<std::string>());
        index.m_ids = j.at("ids").get<std::vector<std::string>>();
        index.m_lengths = j.at("lengths").get<std::vector<std::uint32_t>>();
        if (index.m_lengths.size() != index.m_ids.size()) fail(ErrorKind::malformed_record, "length table size");
        double total = 0.0;
        for (std::size_t i = 0; i < index.m_ids.size(); ++i) {
            index.m_by_id[index.m_ids[i]] = i;
            total += index.m_lengths[i];
        }
        index.m_avgdl = index.m_ids.empty() ? 0.0 : total / static_cast<double>(index.m_ids.size());
        for (const auto& [t, arr] : j.at("postings").items()) {
            auto& list = index.m_postings[t];
            for (const auto& p : arr) list.emplace_back(p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>());
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::malformed_record, path.string() + ": " + e.what());
    }
    return index;
}

// ---------------------------------------------------------------------------

void SegmentConfig::validate() const
{
    if (max_len == 0 || stride == 0) fail(ErrorKind::usage, "segment max_len and stride must be positive");
    if (stride > max_len) fail(ErrorKind::usage, "segment stride must not exceed max_len");
}

std::size_t segment_count(std::size_t length, const SegmentConfig& cfg)
{
    cfg.validate();
    if (length <= cfg.max_len) return 1;
    return (length - cfg.max_len + cfg.stride - 1) / cfg.stride + 1;
}

std::vector<std::string> segment(std::string_view s, const SegmentConfig& cfg)
{
    cfg.validate();
    auto offsets = text::char_offsets(s);
    const std::size_t n = offsets.size() - 1;
    std::vector<std::string> out;
    for (std::size_t start = 0;; start += cfg.stride) {
        std::size_t end = std::min(n, start + cfg.max_len);
        out.emplace_back(s.substr(offsets[start], offsets[end] - offsets[start]));
        if (end == n) break;
    }
    return out;
}

double dense_score(const Eigen::VectorXd& query_vec, std::string_view case_text, const Embedder& embedder,
                   const SegmentConfig& cfg)
{
    if (query_vec.size() != embedder.dim()) fail(ErrorKind::usage, "query vector dimension mismatch");
    Eigen::MatrixXd seg = embedder.embed(segment(case_text, cfg));
    Eigen::MatrixXd sim = cosine_matrix(Eigen::MatrixXd(query_vec.transpose()), seg);
    return sim.maxCoeff();
}

DenseIndex DenseIndex::build(const std::vector<Bm25Index::Document>& docs, const Embedder& embedder,
                             const SegmentConfig& cfg)
{
    DenseIndex index;
    for (const auto& d : docs) {
        Eigen::MatrixXd seg = embedder.embed(segment(d.text, cfg));
        for (Eigen::Index i = 0; i < seg.rows(); ++i) {
            double n = seg.row(i).norm();
            if (n == 0.0) fail(ErrorKind::zero_vector, d.id + " segment " + std::to_string(i));
            seg.row(i) /= n;
        }
        index.m_by_id[d.id] = index.m_segments.size();
        index.m_segments.push_back(std::move(seg));
    }
    return index;
}

double DenseIndex::score(const Eigen::VectorXd& query_vec, const std::string& doc_id) const
{
    auto it = m_by_id.find(doc_id);
    if (it == m_by_id.end()) fail(ErrorKind::unknown_doc, doc_id);
    double n = query_vec.norm();
    if (n == 0.0) fail(ErrorKind::zero_vector, "query");
    Eigen::VectorXd sims = m_segments[it->second] * (query_vec / n);
    return std::clamp(sims.maxCoeff(), -1.0, 1.0);
}

const char* to_string(ScorerKind kind) noexcept { return kind == ScorerKind::bm25 ? "bm25" : "dense"; }

ScorerKind parse_scorer_kind(std::string_view s)
{
    if (s == "bm25") return ScorerKind::bm25;
    if (s == "dense") return ScorerKind::dense;
    fail(ErrorKind::usage, "unknown scorer '" + std::string(s) + "'");
}

Retriever::Retriever(std::vector<Bm25Index::Document> docs) : m_docs(std::move(docs)) {}

void Retriever::enable_bm25(const Bm25Params& params, TokenizerKind tokenizer)
{
    params.validate();
    m_bm25 = Bm25Index::build(m_docs, tokenizer);
    m_params = params;
}

void Retriever::enable_bm25(Bm25Index index, const Bm25Params& params)
{
    params.validate();
    m_bm25 = std::move(index);
    m_params = params;
}

void Retriever::enable_dense(const Embedder& embedder, const SegmentConfig& cfg)
{
    m_embedder = &embedder;
    m_dense = DenseIndex::build(m_docs, embedder, cfg);
}

Ranking Retriever::search(std::string_view query, ScorerKind scorer, std::size_t k,
                          std::span<const std::string> pool) const
{
    if (k < 1) fail(ErrorKind::usage, "k must be >= 1");
    std::vector<std::string> candidates;
    if (pool.empty()) {
        for (const auto& d : m_docs) candidates.push_back(d.id);
    } else {
        std::set<std::string> seen;
        for (const auto& id : pool) {
            if (seen.insert(id).second) candidates.push_back(id);
        }
    }
    if (candidates.empty()) fail(ErrorKind::empty_corpus, "no candidates to rank");

    Ranking ranking;
    ranking.reserve(candidates.size());
    if (scorer == ScorerKind::bm25) {
        if (!m_bm25) fail(ErrorKind::usage, "bm25 scorer not enabled");
        auto tokens = tokenize(query, m_bm25->tokenizer());
        for (const auto& id : candidates) ranking.push_back({id, m_bm25->score(tokens, id, m_params)});
    } else {
        if (!m_dense) fail(ErrorKind::usage, "dense scorer not enabled");
        Eigen::VectorXd q = m_embedder->embed({std::string(query)}).row(0).transpose();
        for (const auto& id : candidates) ranking.push_back({id, m_dense->score(q, id)});
    }
    sort_ranking(ranking);
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

std::map<std::string, std::vector<std::string>> read_pools(const std::filesystem::path& path)
{
    std::map<std::string, std::vector<std::string>> pools;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        if (f.size() != 2) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": expected 2 fields");
        }
        pools[f[0]].push_back(f[1]);
    });
    return pools;
}

void write_pools(const std::filesystem::path& path, const std::map<std::string, std::vector<std::string>>& pools)
{
    std::string out;
    for (const auto& [qid, ids] : pools) {
        for (const auto& id : ids) {
            out += io::join_tsv({qid, id});
            out += '\n';
        }
    }
    io::write_atomic(path, out);
}

}  // namespace lcr
