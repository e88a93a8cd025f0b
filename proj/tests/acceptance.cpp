// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Pass criterion names as arguments to run a subset.

#include "lcr/augment.hpp"
#include "lcr/corpus.hpp"
#include "lcr/error.hpp"
#include "lcr/eval.hpp"
#include "lcr/pipeline.hpp"
#include "lcr/querygen.hpp"
#include "lcr/retrieval.hpp"
#include "lcr/testkit.hpp"
#include "lcr/text.hpp"
#include "lcr/training.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace lcr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle()
{
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        RelevanceJudgments qrels;
        std::map<std::string, int> pool;
        int pool_size = 1 + int(rng() % 30);
        std::vector<std::string> ids;
        for (int i = 0; i < pool_size + int(rng() % 70); ++i) {
            ids.push_back(fmt("c%03d", i));
            if (i < pool_size) {
                int label = int(rng() % 4);
                qrels.add("q", ids.back(), label);
                pool[ids.back()] = label;
            }
        }
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(1 + rng() % ids.size());
        Ranking r;
        for (std::size_t i = 0; i < ids.size(); ++i) r.push_back({ids[i], double(ids.size() - i)});
        auto report = evaluate_run({"t", {{"q", r}}}, qrels);
        auto o = oracle::evaluate(r, pool);
        double expected[] = {o.p5, o.p10, o.map, o.ndcg10, o.ndcg20, o.ndcg30};
        const char* names[] = {"P@5", "P@10", "MAP", "NDCG@10", "NDCG@20", "NDCG@30"};
        for (int m = 0; m < 6; ++m) worst = std::max(worst, std::abs(report.metric(names[m]) - expected[m]));
    }
    double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 10.0, fmt("1000 instances, max |diff| %.3g (tol 1e-9), %.2f s (limit 10 s)", worst, secs)};
}

// Loss and gradient with masked negatives physically removed from each row.
std::pair<double, Eigen::MatrixXd> filtered_reference(const Eigen::MatrixXd& sim, const BoolMatrix& mask, double tau)
{
    const auto n = sim.rows();
    double loss = 0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, sim.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<Eigen::Index> kept;
        for (Eigen::Index j = 0; j < sim.cols(); ++j)
            if (j == i || !mask(i, j)) kept.push_back(j);
        double top = -1e300;
        for (auto j : kept) top = std::max(top, sim(i, j) / tau);
        double z = 0;
        for (auto j : kept) z += std::exp(sim(i, j) / tau - top);
        loss += top + std::log(z) - sim(i, i) / tau;
        for (auto j : kept) grad(i, j) = std::exp(sim(i, j) / tau - top) / z / (tau * double(n));
        grad(i, i) -= 1.0 / (tau * double(n));
    }
    return {loss / double(n), grad};
}

Outcome masking_equivalence()
{
    std::mt19937_64 rng(77);
    const std::vector<std::string> charge_pool = {"盗窃罪", "诈骗罪", "抢劫罪", "故意伤害罪", "交通肇事罪"};
    double worst = 0;
    std::size_t masked_entries = 0, nonzero_masked_grads = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::Index n = 2 + Eigen::Index(rng() % 15);
        std::vector<ChargeSet> charges(static_cast<std::size_t>(n));
        for (auto& c : charges) {
            c.insert(charge_pool[rng() % charge_pool.size()]);
            if (rng() % 4 == 0) c.insert(charge_pool[rng() % charge_pool.size()]);
        }
        auto mask = false_negative_mask(charges);
        Eigen::MatrixXd sim = uniform_matrix(n, n, rng);
        LossConfig cfg;
        cfg.temperature = trial % 2 ? 1.0 : 0.2;
        auto surrogate = in_batch_loss(sim, mask, cfg);
        auto library = in_batch_loss_filtered(sim, mask, cfg);
        auto [ref_loss, ref_grad] = filtered_reference(sim, mask, cfg.temperature);
        worst = std::max({worst, std::abs(surrogate.loss - ref_loss), std::abs(library.loss - ref_loss),
                          (surrogate.grad - ref_grad).cwiseAbs().maxCoeff(),
                          (library.grad - ref_grad).cwiseAbs().maxCoeff()});
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!mask(i, j)) continue;
                ++masked_entries;
                nonzero_masked_grads += surrogate.grad(i, j) != 0.0;
            }
        }
    }
    return {worst <= 1e-9 && nonzero_masked_grads == 0 && masked_entries > 0,
            fmt("100 batches, max |diff| %.3g (tol 1e-9), %zu masked entries, %zu with non-zero gradient", worst,
                masked_entries, nonzero_masked_grads)};
}

Outcome gradient_check()
{
    std::mt19937_64 rng(4242);
    const double eps = 1e-5;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd sim = uniform_matrix(8, 8, rng);
        BoolMatrix mask = BoolMatrix::Constant(8, 8, false);
        if (trial % 2) {
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) mask(i, j) = i != j && rng() % 5 == 0;
        }
        for (double tau : {0.2, 1.0}) {
            LossConfig cfg;
            cfg.temperature = tau;
            auto analytic = in_batch_loss(sim, mask, cfg).grad;
            // Differences are taken in extended precision so that cancellation
            // does not swamp the smallest softmax weights.
            const Matrix<long double> wide = sim.cast<long double>();
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 8; ++j) {
                    Matrix<long double> up = wide, down = wide;
                    up(i, j) += eps;
                    down(i, j) -= eps;
                    auto fd = static_cast<double>((in_batch_loss(up, mask, cfg).loss - in_batch_loss(down, mask, cfg).loss)
                                                  / (2 * static_cast<long double>(eps)));
                    double a = analytic(i, j);
                    double scale = std::max(std::abs(a), std::abs(fd));
                    if (scale == 0.0) continue;
                    worst = std::max(worst, std::abs(a - fd) / scale);
                }
            }
        }
    }
    return {worst < 1e-6, fmt("100 matrices x tau {0.2, 1.0}, max relative error %.3g (limit 1e-6)", worst)};
}

double similarity_oracle(const LegalElements& a, const LegalElements& b)
{
    ArticleSet inter, uni;
    std::set_intersection(a.ancillary_articles.begin(), a.ancillary_articles.end(), b.ancillary_articles.begin(),
                          b.ancillary_articles.end(), std::inserter(inter, inter.end()));
    std::set_union(a.ancillary_articles.begin(), a.ancillary_articles.end(), b.ancillary_articles.begin(),
                   b.ancillary_articles.end(), std::inserter(uni, uni.end()));
    double anc = uni.empty() ? 1.0 : double(inter.size()) / double(uni.size());
    const auto& s = a.prison_term;
    const auto& t = b.prison_term;
    double term = 0;
    if (s.kind == t.kind) {
        bool months = s.kind == TermKind::fixed_term || s.kind == TermKind::detention || s.kind == TermKind::control;
        term = months ? std::exp(-std::abs(double(s.months) - double(t.months)) / 24.0) : 1.0;
    } else if ((s.kind == TermKind::life && t.kind == TermKind::death) ||
               (s.kind == TermKind::death && t.kind == TermKind::life)) {
        term = 0.25;
    }
    return 0.5 * anc + 0.5 * term;
}

Outcome augmentation_exactness()
{
    testkit::SyntheticSpec spec;
    spec.n_cases = 1000;
    spec.articles_per_charge = 2;
    spec.seed = 31;
    auto corpus = testkit::generate_corpus(spec);
    auto admitted = filter_corpus(corpus.docs).admitted;
    auto index = ElementIndex::build(admitted);

    std::size_t violations = 0, checked = 0;
    for (const auto& src : admitted) {
        auto pick = try_find_augmented_positive(src.doc.case_id, index);
        double best = -1;
        for (const auto& other : admitted) {
            if (other.doc.case_id == src.doc.case_id) continue;
            if (other.elements.main_articles != src.elements.main_articles) continue;
            best = std::max(best, similarity_oracle(src.elements, other.elements));
        }
        if (!pick) {
            violations += best >= 0;
            continue;
        }
        ++checked;
        const auto* e = index.elements(*pick);
        if (!e || *pick == src.doc.case_id || e->main_articles != src.elements.main_articles ||
            std::abs(similarity_oracle(src.elements, *e) - best) > 1e-12)
            ++violations;
    }

    std::vector<QueryRecord> queries;
    for (const auto& c : admitted) queries.push_back({query_id_for(c.doc.case_id), c.doc.case_id, "q"});
    std::string counts;
    bool mixing_ok = true;
    for (double p : {0.0, 0.35, 0.7, 1.0}) {
        AugmentConfig cfg;
        cfg.proportion_augmented = p;
        cfg.seed = 5;
        auto pairs = mix_pairs(queries, index, cfg);
        auto n = std::size_t(std::count_if(pairs.begin(), pairs.end(), [](auto& x) { return x.kind == PairKind::augmented; }));
        auto expected = static_cast<std::size_t>(std::floor(p * double(queries.size()) + 1e-9));
        mixing_ok = mixing_ok && n == expected;
        counts += fmt(" p=%.2f:%zu/%zu", p, n, expected);
    }
    return {violations == 0 && mixing_ok && checked > 0,
            fmt("%zu positives checked, %zu violations; augmented counts%s", checked, violations, counts.c_str())};
}

Outcome extraction_inversion()
{
    testkit::SyntheticSpec spec;
    spec.n_cases = 1000;
    spec.n_rulings = 60;
    spec.n_short_facts = 40;
    spec.charge_count = testkit::SyntheticSpec::max_charges();
    spec.articles_per_charge = 2;
    spec.seed = 1009;
    auto corpus = testkit::generate_corpus(spec);
    auto result = filter_corpus(corpus.docs);
    std::size_t fields = 0, agree = 0;
    for (const auto& c : result.admitted) {
        auto it = corpus.truth.find(c.doc.case_id);
        if (it == corpus.truth.end()) continue;
        const auto& t = it->second.elements;
        fields += 4;
        agree += (c.elements.charges == t.charges) + (c.elements.main_articles == t.main_articles) +
                 (c.elements.ancillary_articles == t.ancillary_articles) + (c.elements.prison_term == t.prison_term);
    }
    std::size_t reasons_ok = 0;
    for (const auto& e : result.excluded) {
        auto it = corpus.expected_exclusions.find(e.case_id);
        reasons_ok += it != corpus.expected_exclusions.end() && it->second == e.reason;
    }
    bool pass = result.admitted.size() == 1000 && agree == fields && fields == 4000 &&
                result.excluded.size() == corpus.expected_exclusions.size() && reasons_ok == result.excluded.size();
    return {pass, fmt("admitted %zu/1000, field agreement %zu/%zu, exclusions %zu/%zu with correct reason",
                      result.admitted.size(), agree, fields, reasons_ok, corpus.expected_exclusions.size())};
}

Outcome truncation_scoring()
{
    std::mt19937_64 rng(555);
    testkit::SyntheticSpec spec;
    spec.n_cases = 200;
    spec.seed = 3;
    auto corpus = testkit::generate_corpus(spec);
    std::vector<std::string> texts;
    for (const auto& d : corpus.docs) texts.push_back(d.full_text());

    ToyEmbedder::Options opts;
    opts.seed = 99;
    ToyEmbedder emb(opts);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::string long_case;
        const std::size_t target = 2500 + rng() % 4000;
        while (text::char_count(long_case) < target) long_case += texts[rng() % texts.size()];
        std::string query = corpus.truth.at(corpus.docs[rng() % corpus.docs.size()].case_id).key_events;
        SegmentConfig cfg;
        if (trial % 2) cfg = {std::size_t(500 + rng() % 1500), 0};
        if (trial % 2) cfg.stride = 1 + rng() % cfg.max_len;
        Eigen::VectorXd qv = emb.embed({query}).row(0).transpose();
        // Windows enumerated directly from code point offsets.
        auto offsets = text::char_offsets(long_case);
        std::size_t len = offsets.size() - 1;
        double best = -2;
        for (std::size_t start = 0;; start += cfg.stride) {
            std::size_t end = std::min(len, start + cfg.max_len);
            std::string window = long_case.substr(offsets[start], offsets[end] - offsets[start]);
            Eigen::VectorXd v = emb.embed({window}).row(0).transpose();
            best = std::max(best, qv.dot(v) / (qv.norm() * v.norm()));
            if (end == len) break;
        }
        worst = std::max(worst, std::abs(dense_score(qv, long_case, emb, cfg) - best));
    }

    std::size_t count_mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t max_len = 1 + rng() % 3000;
        std::size_t stride = 1 + rng() % max_len;
        std::size_t len = 1 + rng() % 10000;
        std::size_t closed = len <= max_len ? 1 : (len - max_len + stride - 1) / stride + 1;
        std::string s(len, 'x');
        count_mismatches += segment_count(len, {max_len, stride}) != closed;
        count_mismatches += segment(s, {max_len, stride}).size() != closed;
    }
    return {worst <= 1e-12 && count_mismatches == 0,
            fmt("500 pairs, max |diff| %.3g (tol 1e-12); 50 count triples, %zu mismatches", worst, count_mismatches)};
}

// ---------------------------------------------------------------------------
// End-to-end trend

struct TrendWorld {
    std::vector<AdmittedCase> admitted;
    std::map<std::string, const AdmittedCase*> by_id;
    std::vector<QueryRecord> train_queries;
    testkit::Fixture fixture;
    ElementIndex index;
    std::vector<Bm25Index::Document> documents;
};

TrendWorld build_world(std::uint64_t seed)
{
    TrendWorld w;
    testkit::SyntheticSpec spec;
    spec.n_cases = 2000;
    spec.seed = seed;
    auto corpus = testkit::generate_corpus(spec);
    w.admitted = filter_corpus(corpus.docs).admitted;
    w.by_id = index_by_id(w.admitted);
    w.fixture = testkit::generate_qrels(corpus, text::derive_seed(seed, "qrels"));

    std::set<std::string> held_out;
    for (const auto& q : w.fixture.queries) held_out.insert(q.source_case_id);
    std::vector<CaseDocument> sources;
    for (const auto& c : w.admitted)
        if (!held_out.count(c.doc.case_id)) sources.push_back(c.doc);
    OfflineTemplateClient client;
    DictionaryTagger tagger;
    w.train_queries = generate_queries(sources, client, PromptTemplate::standard(), text::derive_seed(seed, "queries"),
                                       {}, {&tagger, &Lexicon::surrogates()}, 1);
    w.index = ElementIndex::build(w.admitted);
    w.documents = retrieval_documents(w.admitted);
    return w;
}

ToyEmbedder::Options trend_embedder(std::uint64_t seed)
{
    ToyEmbedder::Options o;
    o.seed = text::derive_seed(seed, "embedder");
    return o;
}

double dense_ndcg10(const TrendWorld& w, const Embedder& model)
{
    Retriever r(w.documents);
    r.enable_dense(model);
    auto run = search_all(r, w.fixture.queries, w.fixture.pools, ScorerKind::dense, 100, "dense");
    return evaluate_run(run, w.fixture.qrels).metric("NDCG@10");
}

double trained_ndcg10(const TrendWorld& w, std::uint64_t seed, double p, bool masking)
{
    AugmentConfig aug;
    aug.proportion_augmented = p;
    aug.seed = text::derive_seed(seed, "augment");
    auto pairs = mix_pairs(w.train_queries, w.index, aug);
    auto examples = examples_from_pairs(pairs, w.train_queries, w.by_id);
    TrainSchedule schedule;
    schedule.seed = text::derive_seed(seed, "train");
    schedule.batch_size = 128;
    schedule.loss = LossConfig::low_temperature();
    schedule.loss.masking_enabled = masking;
    ToyEmbedder model(trend_embedder(seed));
    train_toy(examples, model, schedule);
    return dense_ndcg10(w, model);
}

Outcome end_to_end_trend()
{
    auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seeds[] = {1, 2, 3};
    double untrained = 0, mixed = 0, original = 0, unmasked = 0;
    std::string per_seed;
    for (auto seed : seeds) {
        auto w = build_world(seed);
        double u = dense_ndcg10(w, ToyEmbedder(trend_embedder(seed)));
        double m = trained_ndcg10(w, seed, 0.7, true);
        double o = trained_ndcg10(w, seed, 0.0, true);
        double n = trained_ndcg10(w, seed, 0.7, false);
        untrained += u / 3;
        mixed += m / 3;
        original += o / 3;
        unmasked += n / 3;
        per_seed += fmt(" [seed %llu: %.3f %.3f %.3f %.3f]", (unsigned long long)seed, u, m, o, n);
    }
    double secs = seconds_since(t0);
    bool a = mixed >= untrained + 0.05;
    bool b = mixed > original;
    bool c = mixed > unmasked;
    return {a && b && c && secs < 300.0,
            fmt("NDCG@10 means: untrained %.4f, p=0.7 masked %.4f, p=0.0 masked %.4f, p=0.7 unmasked %.4f; "
                "(a) %s (b) %s (c) %s; %.1f s (limit 300 s);%s",
                untrained, mixed, original, unmasked, a ? "ok" : "FAIL", b ? "ok" : "FAIL", c ? "ok" : "FAIL", secs,
                per_seed.c_str())};
}

// ---------------------------------------------------------------------------

Outcome anonymization_soundness()
{
    testkit::SyntheticSpec spec;
    spec.n_cases = 500;
    spec.seed = 808;
    auto corpus = testkit::generate_corpus(spec);
    OfflineTemplateClient client;
    DictionaryTagger tagger;
    Anonymizer anon{&tagger, &Lexicon::surrogates()};
    auto run = [&] {
        return generate_queries(corpus.docs, client, PromptTemplate::standard(), 2718, {}, anon, 4);
    };
    auto first = run();
    auto second = run();
    std::size_t planted = 0, survivors = 0;
    for (const auto& q : first) {
        for (const auto& [cat, surface] : corpus.truth.at(q.source_case_id).planted) {
            ++planted;
            survivors += q.text.find(surface) != std::string::npos;
        }
    }
    bool same = first == second;
    return {first.size() == 500 && planted > 0 && survivors == 0 && same,
            fmt("500 queries, %zu planted entities, %zu survivors, repeat run %s", planted, survivors,
                same ? "identical" : "differs")};
}

Outcome bm25_sanity()
{
    const std::vector<std::vector<std::string>> docs = {{"theft", "car", "night", "theft"},
                                                        {"fraud", "phone", "money"},
                                                        {"car", "crash", "injury", "road", "car"},
                                                        {"theft", "phone"},
                                                        {"injury", "fight", "night"}};
    std::vector<Bm25Index::Document> input;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::string t;
        for (const auto& w : docs[i]) t += w + " ";
        input.push_back({fmt("d%zu", i + 1), t});
    }
    auto index = Bm25Index::build(input, TokenizerKind::whitespace);
    const std::vector<std::vector<std::string>> queries = {{"theft"}, {"car", "injury"}, {"phone", "money", "x"},
                                                           {"night", "theft", "car"}};
    double avgdl = 0;
    for (const auto& d : docs) avgdl += double(d.size());
    avgdl /= double(docs.size());
    double worst = 0;
    for (double k1 : {1.2, 2.0}) {
        for (double b : {0.75, 0.3}) {
            for (const auto& q : queries) {
                for (std::size_t d = 0; d < docs.size(); ++d) {
                    double s = 0;
                    for (const auto& t : std::set<std::string>(q.begin(), q.end())) {
                        double df = 0;
                        for (const auto& other : docs) df += std::find(other.begin(), other.end(), t) != other.end();
                        double tf = double(std::count(docs[d].begin(), docs[d].end(), t));
                        if (tf == 0) continue;
                        double idf = std::log(1.0 + (5.0 - df + 0.5) / (df + 0.5));
                        s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * double(docs[d].size()) / avgdl));
                    }
                    worst = std::max(worst, std::abs(index.score(q, input[d].id, {k1, b}) - s));
                }
            }
        }
    }

    testkit::SyntheticSpec spec;
    spec.n_cases = 400;
    spec.seed = 12;
    auto corpus = testkit::generate_corpus(spec);
    testkit::QrelsSpec qs;
    qs.n_queries = 20;
    auto fx = testkit::generate_qrels(corpus, 12, qs);
    auto admitted = filter_corpus(corpus.docs).admitted;
    auto search = [&] {
        Retriever r(retrieval_documents(admitted));
        r.enable_bm25();
        return search_all(r, fx.queries, fx.pools, ScorerKind::bm25, 100, "bm25");
    };
    auto a = search(), b = search();
    bool ordered = true;
    for (const auto& [qid, ranking] : a.queries) {
        for (std::size_t i = 1; i < ranking.size(); ++i) {
            const auto& x = ranking[i - 1];
            const auto& y = ranking[i];
            ordered = ordered && (x.score > y.score || (x.score == y.score && x.case_id < y.case_id));
        }
    }
    bool same = a.queries == b.queries;
    return {worst <= 1e-9 && same && ordered,
            fmt("5-doc corpus max |diff| %.3g (tol 1e-9); fixture runs %s, ordering %s", worst,
                same ? "identical" : "differ", ordered ? "consistent" : "inconsistent")};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"metric_oracle", metric_oracle},
        {"masking_equivalence", masking_equivalence},
        {"gradient_check", gradient_check},
        {"augmentation_exactness", augmentation_exactness},
        {"extraction_inversion", extraction_inversion},
        {"truncation_scoring", truncation_scoring},
        {"end_to_end_trend", end_to_end_trend},
        {"anonymization_soundness", anonymization_soundness},
        {"bm25_sanity", bm25_sanity},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
