#include "lcr/augment.hpp"
#include "lcr/error.hpp"
#include "lcr/testkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iterator>

using namespace lcr;

namespace {

AdmittedCase make_case(std::string id, ArticleSet main, ArticleSet anc, PrisonTerm term,
                       std::set<std::string> charges = {"交通肇事罪"})
{
    AdmittedCase c;
    c.doc.case_id = std::move(id);
    c.elements.main_articles = std::move(main);
    c.elements.ancillary_articles = std::move(anc);
    c.elements.prison_term = term;
    c.elements.charges = std::move(charges);
    return c;
}

QueryRecord query_for(const std::string& case_id)
{
    QueryRecord q;
    q.query_id = query_id_for(case_id);
    q.source_case_id = case_id;
    q.text = "query " + case_id;
    return q;
}

double jaccard_oracle(const ArticleSet& a, const ArticleSet& b)
{
    ArticleSet inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(inter, inter.end()));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(uni, uni.end()));
    return uni.empty() ? 1.0 : double(inter.size()) / double(uni.size());
}

std::vector<AdmittedCase> admitted_from(const testkit::SyntheticCorpus& corpus)
{
    std::vector<AdmittedCase> out;
    for (const auto& d : corpus.docs) {
        auto it = corpus.truth.find(d.case_id);
        if (it != corpus.truth.end()) out.push_back({d, it->second.elements});
    }
    return out;
}

}  // namespace

TEST_CASE("element index buckets cases by their main-article set")
{
    auto index = ElementIndex::build({make_case("c1", {{133, 0}}, {}, PrisonTerm::fixed(12)),
                                      make_case("c2", {{133, 0}}, {}, PrisonTerm::fixed(12)),
                                      make_case("c3", {{264, 0}}, {}, PrisonTerm::fixed(12), {"盗窃罪"})});
    CHECK(index.buckets().size() == 2);
    REQUIRE(index.bucket({{133, 0}}) != nullptr);
    CHECK(index.bucket({{133, 0}})->size() == 2);
    CHECK(index.bucket({{133, 0}, {264, 0}}) == nullptr);
    CHECK(ElementIndex::key_of({{264, 0}, {133, 1}}) == "133-1|264");
    CHECK(ElementIndex::build({}).buckets().empty());
    CHECK_THROWS_AS(ElementIndex::build({make_case("c1", {{133, 0}}, {}, PrisonTerm::fixed(1)),
                                         make_case("c1", {{133, 0}}, {}, PrisonTerm::fixed(1))}),
                    Error);
}

TEST_CASE("bucket sizes agree with the generator's bookkeeping")
{
    testkit::SyntheticSpec spec;
    spec.n_cases = 400;
    spec.articles_per_charge = 2;
    spec.seed = 3;
    auto corpus = testkit::generate_corpus(spec);
    auto index = ElementIndex::build(admitted_from(corpus));
    std::map<std::string, std::size_t> expected;
    for (const auto& [id, t] : corpus.truth) ++expected[ElementIndex::key_of(t.elements.main_articles)];
    REQUIRE(index.buckets().size() == expected.size());
    for (const auto& [key, n] : expected) CHECK(index.buckets().at(key).size() == n);
}

TEST_CASE("element similarity")
{
    LegalElements a{{"交通肇事罪"}, {{133, 0}}, {{67, 0}}, PrisonTerm::fixed(36)};
    CHECK(element_similarity(a, a) == 1.0);

    LegalElements b = a;
    b.ancillary_articles = {{72, 0}};
    CHECK(element_similarity(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    // Independent scalar evaluation of the same weighted mean.
    double oracle = (0.5 * jaccard_oracle(a.ancillary_articles, b.ancillary_articles) + 0.5 * 1.0) / 1.0;
    CHECK(std::abs(element_similarity(a, b) - oracle) < 1e-15);

    LegalElements c = a;
    c.ancillary_articles = {{27, 0}};
    c.prison_term = PrisonTerm::fine_only();
    LegalElements d = a;
    d.prison_term = PrisonTerm::death();
    CHECK(element_similarity(c, d) == 0.0);

    CHECK(jaccard({}, {}) == 1.0);
    CHECK(jaccard({{67, 0}, {65, 0}}, {{67, 0}}) == doctest::Approx(0.5));
    CHECK(term_similarity(PrisonTerm::fixed(12), PrisonTerm::fixed(36)) == doctest::Approx(std::exp(-1.0)));
    CHECK(term_similarity(PrisonTerm::life(), PrisonTerm::death()) == doctest::Approx(0.25));
    CHECK(term_similarity(PrisonTerm::detention(3), PrisonTerm::fixed(3)) == 0.0);

    AugmentConfig weighted;
    weighted.weight_ancillary = 3.0;
    weighted.weight_term = 1.0;
    CHECK(element_similarity(a, b, weighted) == doctest::Approx(0.25));

    LegalElements other = a;
    other.main_articles = {{264, 0}};
    try {
        element_similarity(a, other);
        FAIL("expected MainArticleMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::main_article_mismatch);
    }
    AugmentConfig loose;
    loose.match = MatchMode::shared_charge;
    CHECK(element_similarity(a, other, loose) == 1.0);
}

TEST_CASE("augmented positive search")
{
    std::vector<AdmittedCase> cases = {
        make_case("c1", {{133, 0}}, {{67, 0}}, PrisonTerm::fixed(36)),
        make_case("c2", {{133, 0}}, {{67, 0}}, PrisonTerm::fixed(36)),
        make_case("c3", {{133, 0}}, {{72, 0}}, PrisonTerm::fixed(36)),
        make_case("c4", {{264, 0}}, {{67, 0}}, PrisonTerm::fixed(36), {"盗窃罪"}),
    };
    auto index = ElementIndex::build(cases);
    CHECK(find_augmented_positive("c1", index) == "c2");

    try {
        find_augmented_positive("c4", index);
        FAIL("expected NoMatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::no_match);
    }
    CHECK_FALSE(try_find_augmented_positive("c4", index).has_value());
    CHECK_THROWS_AS(find_augmented_positive("zz", index), Error);

    // Ties go to the smaller case id, every time.
    auto ties = ElementIndex::build({make_case("t0", {{133, 0}}, {}, PrisonTerm::fixed(10)),
                                     make_case("t9", {{133, 0}}, {}, PrisonTerm::fixed(12)),
                                     make_case("t5", {{133, 0}}, {}, PrisonTerm::fixed(12)),
                                     make_case("t7", {{133, 0}}, {}, PrisonTerm::fixed(12))});
    for (int i = 0; i < 3; ++i) CHECK(find_augmented_positive("t0", ties) == "t5");

    AugmentConfig seeded;
    seeded.tie_break = TieBreak::seeded;
    seeded.seed = 11;
    auto pick = find_augmented_positive("t0", ties, seeded);
    CHECK((pick == "t5" || pick == "t7" || pick == "t9"));
    CHECK(find_augmented_positive("t0", ties, seeded) == pick);

    // Charge-sharing mode crosses article buckets.
    AugmentConfig loose;
    loose.match = MatchMode::shared_charge;
    auto cross = ElementIndex::build({make_case("x1", {{133, 0}}, {}, PrisonTerm::fixed(10), {"甲罪", "乙罪"}),
                                      make_case("x2", {{264, 0}}, {}, PrisonTerm::fixed(10), {"乙罪"})});
    CHECK(find_augmented_positive("x1", cross, loose) == "x2");
    CHECK_FALSE(try_find_augmented_positive("x1", cross).has_value());
}

TEST_CASE("pair mixing hits the augmented proportion exactly")
{
    std::vector<AdmittedCase> cases;
    std::vector<QueryRecord> queries;
    for (int i = 0; i < 10; ++i) {
        cases.push_back(make_case("c" + std::to_string(i), {{133, 0}}, {}, PrisonTerm::fixed(12 + i)));
        queries.push_back(query_for(cases.back().doc.case_id));
    }
    auto index = ElementIndex::build(cases);
    auto count = [](const std::vector<TrainingPair>& pairs) {
        return std::count_if(pairs.begin(), pairs.end(), [](auto& p) { return p.kind == PairKind::augmented; });
    };

    AugmentConfig cfg;
    cfg.seed = 5;
    auto pairs = mix_pairs(queries, index, cfg);
    CHECK(count(pairs) == 7);
    REQUIRE(pairs.size() == 10);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].query_id == queries[i].query_id);
        if (pairs[i].kind == PairKind::augmented) {
            CHECK(pairs[i].positive_case_id != queries[i].source_case_id);
        } else {
            CHECK(pairs[i].positive_case_id == queries[i].source_case_id);
        }
    }
    CHECK(mix_pairs(queries, index, cfg) == pairs);
    cfg.seed = 6;
    CHECK(count(mix_pairs(queries, index, cfg)) == 7);

    CHECK(count(mix_pairs(queries, index, AugmentConfig::civil())) == 0);

    // One query in a singleton bucket: p = 1 gives N-1 augmented plus a flagged fallback.
    cases.push_back(make_case("lonely", {{999, 0}}, {}, PrisonTerm::fixed(1)));
    queries.push_back(query_for("lonely"));
    auto with_lonely = ElementIndex::build(cases);
    cfg.proportion_augmented = 1.0;
    auto all = mix_pairs(queries, with_lonely, cfg);
    CHECK(count(all) == 10);
    CHECK(all.back().kind == PairKind::original);
    CHECK(all.back().fallback);

    queries.push_back(query_for("missing"));
    try {
        mix_pairs(queries, with_lonely, cfg);
        FAIL("expected UnknownDoc");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unknown_doc);
    }

    cfg.proportion_augmented = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);

    CHECK(augmented_target(0.35, 1000) == 350);
    CHECK(augmented_target(0.7, 10) == 7);
    CHECK(augmented_target(0.7, 3) == 2);
}

TEST_CASE("pairs file round-trips")
{
    std::vector<TrainingPair> pairs = {{"q-1", "c9", PairKind::augmented, {"甲罪", "乙罪"}, false},
                                       {"q-2", "c2", PairKind::original, {"丙罪"}, true}};
    auto path = std::filesystem::temp_directory_path() / "lcr_pairs_test.tsv";
    write_pairs(path, pairs);
    CHECK(read_pairs(path) == pairs);
}
