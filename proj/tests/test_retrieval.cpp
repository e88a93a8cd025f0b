#include "lcr/error.hpp"
#include "lcr/retrieval.hpp"
#include "lcr/text.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace lcr;

namespace {

// The scoring formula evaluated term by term from raw counts.
double bm25_oracle(const std::vector<std::vector<std::string>>& docs, std::size_t d,
                   const std::vector<std::string>& query, double k1, double b)
{
    double avgdl = 0;
    for (const auto& doc : docs) avgdl += double(doc.size());
    avgdl /= double(docs.size());
    std::set<std::string> terms(query.begin(), query.end());
    double score = 0;
    for (const auto& t : terms) {
        double df = 0;
        for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), t) > 0;
        double tf = double(std::count(docs[d].begin(), docs[d].end(), t));
        if (tf == 0) continue;
        double idf = std::log(1 + (double(docs.size()) - df + 0.5) / (df + 0.5));
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * double(docs[d].size()) / avgdl));
    }
    return score;
}

// Every window start enumerated directly.
std::vector<std::pair<std::size_t, std::size_t>> windows_oracle(std::size_t len, std::size_t max_len,
                                                                std::size_t stride)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0;; start += stride) {
        std::size_t end = std::min(len, start + max_len);
        out.emplace_back(start, end - start);
        if (end == len) break;
    }
    return out;
}

std::string random_text(std::size_t chars, std::mt19937_64& rng)
{
    static const std::vector<std::string> alphabet = {"被", "告", "人", "驾", "驶", "车", "辆", "盗", "窃", "财",
                                                      "物", "伤", "害", "经", "查", "某", "日", "在", "于", "后"};
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    for (std::size_t i = 0; i < chars; ++i) s += alphabet[pick(rng)];
    return s;
}

}  // namespace

TEST_CASE("tokenizers")
{
    CHECK(char_bigrams("被告人") == std::vector<std::string>{"被告", "告人"});
    CHECK(char_bigrams("甲 乙丙") == std::vector<std::string>{"甲", "乙丙"});
    CHECK(char_bigrams("").empty());
    CHECK(whitespace_tokens("  a bb\tc ") == std::vector<std::string>{"a", "bb", "c"});
    CHECK(parse_tokenizer_kind("whitespace") == TokenizerKind::whitespace);
    CHECK_THROWS_AS(parse_tokenizer_kind("jieba"), Error);
}

TEST_CASE("BM25 closed forms")
{
    auto single = Bm25Index::build({{"d1", "alpha beta gamma"}}, TokenizerKind::whitespace);
    CHECK(single.score({"alpha"}, "d1") == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-15));
    CHECK(std::abs(single.score({"alpha"}, "d1") - 0.28768207245178) < 1e-12);
    CHECK(single.score({"omega"}, "d1") == 0.0);
    CHECK(single.score({"alpha", "omega"}, "d1") == single.score({"alpha"}, "d1"));
    CHECK(single.score({"omega"}, "d1", {2.4, 0.75}) == 0.0);
    try {
        single.score({"alpha"}, "d2");
        FAIL("expected UnknownDoc");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unknown_doc);
    }
    CHECK_THROWS_AS((Bm25Params{-1.0, 0.5}).validate(), Error);
    CHECK_THROWS_AS((Bm25Params{1.0, 1.5}).validate(), Error);
}

TEST_CASE("BM25 matches a scalar oracle and its monotonicity properties")
{
    std::vector<std::vector<std::string>> toks = {
        {"a", "b", "c"}, {"a", "a", "d", "e", "f"}, {"b", "c"}, {"c", "c", "c", "g"}, {"h"}};
    std::vector<Bm25Index::Document> docs;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        std::string t;
        for (const auto& w : toks[i]) t += w + " ";
        docs.push_back({"d" + std::to_string(i), t});
    }
    auto index = Bm25Index::build(docs, TokenizerKind::whitespace);
    CHECK(index.size() == 5);
    CHECK(index.average_length() == doctest::Approx(3.0));
    CHECK(index.document_frequency("c") == 3);
    CHECK(index.term_frequency("a", "d1") == 2);
    std::vector<std::vector<std::string>> queries = {{"a"}, {"c", "g"}, {"a", "b", "c"}, {"z"}, {"c", "c"}};
    for (double k1 : {0.0, 1.2, 2.0}) {
        for (double b : {0.0, 0.75, 1.0}) {
            for (const auto& q : queries) {
                for (std::size_t d = 0; d < docs.size(); ++d) {
                    REQUIRE(std::abs(index.score(q, docs[d].id, {k1, b}) - bm25_oracle(toks, d, q, k1, b)) < 1e-9);
                }
            }
        }
    }

    // More occurrences at fixed length score higher; rarer terms score higher.
    auto tf = Bm25Index::build({{"x", "t u v w"}, {"y", "t t v w"}, {"z", "q"}}, TokenizerKind::whitespace);
    CHECK(tf.score({"t"}, "y") >= tf.score({"t"}, "x"));
    CHECK(tf.score({"u"}, "x") > tf.score({"v"}, "x"));

    auto path = std::filesystem::temp_directory_path() / "lcr_bm25_test.json";
    index.save(path);
    auto back = Bm25Index::load(path);
    CHECK(back.tokenizer() == TokenizerKind::whitespace);
    for (const auto& q : queries)
        for (const auto& d : docs) CHECK(back.score(q, d.id) == index.score(q, d.id));
}

TEST_CASE("segmentation")
{
    std::string text;
    for (int i = 0; i < 5000; ++i) text += "字";
    auto segs = segment(text);
    REQUIRE(segs.size() == 3);
    CHECK(text::char_count(segs[0]) == 2048);
    CHECK(text::char_count(segs[1]) == 2048);
    CHECK(text::char_count(segs[2]) == 904);
    CHECK(segs[0] + segs[1] + segs[2] == text);

    CHECK(segment("短文本") == std::vector<std::string>{"短文本"});
    CHECK(segment_count(4096, {2048, 1024}) == 3);
    CHECK(segment(std::string(4096, 'a'), {2048, 1024}).size() == 3);
    CHECK_THROWS_AS((SegmentConfig{100, 200}).validate(), Error);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t max_len = 1 + rng() % 40;
        std::size_t stride = 1 + rng() % max_len;
        std::size_t len = 1 + rng() % 200;
        auto expected = windows_oracle(len, max_len, stride);
        REQUIRE(segment_count(len, {max_len, stride}) == expected.size());
        std::string s = random_text(len, rng);
        auto got = segment(s, {max_len, stride});
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            REQUIRE(got[i] == text::char_substr(s, expected[i].first, expected[i].second));
    }
}

TEST_CASE("dense scoring takes the best segment")
{
    ToyEmbedder::Options opts;
    opts.dim = 24;
    opts.buckets = 1024;
    opts.seed = 12;
    ToyEmbedder emb(opts);
    std::mt19937_64 rng(8);
    SegmentConfig cfg{60, 40};
    for (int trial = 0; trial < 20; ++trial) {
        std::string query = random_text(20, rng);
        std::string doc = random_text(50 + rng() % 300, rng);
        Eigen::VectorXd qv = emb.embed({query}).row(0).transpose();
        double best = -2;
        for (const auto& s : segment(doc, cfg)) {
            Eigen::VectorXd sv = emb.embed({s}).row(0).transpose();
            best = std::max(best, qv.dot(sv) / (qv.norm() * sv.norm()));
        }
        REQUIRE(std::abs(dense_score(qv, doc, emb, cfg) - best) < 1e-12);

        auto index = DenseIndex::build({{"d", doc}}, emb, cfg);
        REQUIRE(std::abs(index.score(qv, "d") - best) < 1e-12);
    }

    std::string shortdoc = random_text(30, rng);
    Eigen::VectorXd qv = emb.embed({"被告人驾驶车辆"}).row(0).transpose();
    Eigen::VectorXd dv = emb.embed({shortdoc}).row(0).transpose();
    CHECK(dense_score(qv, shortdoc, emb) == doctest::Approx(qv.dot(dv) / (qv.norm() * dv.norm())).epsilon(1e-12));
}

TEST_CASE("search ranks pools deterministically")
{
    std::mt19937_64 rng(2);
    std::vector<Bm25Index::Document> docs;
    std::vector<std::string> pool;
    for (int i = 0; i < 150; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "c%03d", i);
        docs.push_back({id, random_text(80, rng)});
        if (i % 3 != 2 && pool.size() < 100) pool.push_back(id);
    }
    Retriever r(docs);
    r.enable_bm25();
    std::string query = random_text(15, rng);
    auto top = r.search(query, ScorerKind::bm25, 30, pool);
    REQUIRE(top.size() == 30);
    for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
    std::set<std::string> in_pool(pool.begin(), pool.end());
    for (const auto& e : top) CHECK(in_pool.count(e.case_id) == 1);
    CHECK(r.search(query, ScorerKind::bm25, 30, pool) == top);

    CHECK(r.search(query, ScorerKind::bm25, 500, pool).size() == 100);
    CHECK(r.search(query, ScorerKind::bm25, 500).size() == 150);

    Retriever ties({{"b", "同样的文本"}, {"a", "同样的文本"}, {"c", "不同"}});
    ties.enable_bm25();
    auto t = ties.search("同样", ScorerKind::bm25, 3);
    REQUIRE(t.size() == 3);
    CHECK(t[0].case_id == "a");
    CHECK(t[1].case_id == "b");
    CHECK(t[0].score == t[1].score);

    ToyEmbedder emb;
    ties.enable_dense(emb);
    auto d = ties.search("同样", ScorerKind::dense, 2);
    CHECK(d[0].case_id == "a");
    CHECK(d[1].case_id == "b");

    Retriever empty({});
    empty.enable_bm25();
    try {
        empty.search("x", ScorerKind::bm25, 5);
        FAIL("expected EmptyCorpus");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_corpus);
    }
    Retriever unready(docs);
    CHECK_THROWS_AS(unready.search(query, ScorerKind::dense, 5), Error);
}

TEST_CASE("pool files round-trip")
{
    std::map<std::string, std::vector<std::string>> pools = {{"q1", {"c2", "c1"}}, {"q2", {"c9"}}};
    auto path = std::filesystem::temp_directory_path() / "lcr_pools_test.tsv";
    write_pools(path, pools);
    CHECK(read_pools(path) == pools);
}
