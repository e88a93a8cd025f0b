#include "lcr/augment.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lcr {

ElementIndex ElementIndex::build(const std::vector<AdmittedCase>& corpus)
{
    ElementIndex index;
    for (const auto& c : corpus) {
        if (!index.m_elements.emplace(c.doc.case_id, c.elements).second) {
            fail(ErrorKind::malformed_record, "duplicate case_id " + c.doc.case_id);
        }
        index.m_buckets[key_of(c.elements.main_articles)].push_back(
            {c.doc.case_id, c.elements.ancillary_articles, c.elements.prison_term, c.elements.charges});
    }
    for (auto& [key, bucket] : index.m_buckets) {
        std::sort(bucket.begin(), bucket.end(),
                  [](const ElementEntry& a, const ElementEntry& b) { return a.case_id < b.case_id; });
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            for (const auto& charge : bucket[i].charges) index.m_by_charge[charge].emplace_back(key, i);
        }
    }
    return index;
}

std::string ElementIndex::key_of(const ArticleSet& main_articles)
{
    std::string key;
    for (const auto& a : main_articles) {
        if (!key.empty()) key.push_back('|');
        key += a.to_string();
    }
    return key;
}

const std::vector<ElementEntry>* ElementIndex::bucket(const ArticleSet& main_articles) const
{
    auto it = m_buckets.find(key_of(main_articles));
    return it == m_buckets.end() ? nullptr : &it->second;
}

std::vector<const ElementEntry*> ElementIndex::sharing_charge(const std::set<std::string>& charges) const
{
    std::vector<const ElementEntry*> out;
    for (const auto& charge : charges) {
        auto it = m_by_charge.find(charge);
        if (it == m_by_charge.end()) continue;
        for (const auto& [key, slot] : it->second) out.push_back(&m_buckets.at(key)[slot]);
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->case_id < b->case_id; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const LegalElements* ElementIndex::elements(const std::string& case_id) const
{
    auto it = m_elements.find(case_id);
    return it == m_elements.end() ? nullptr : &it->second;
}

void AugmentConfig::validate() const
{
    if (!(proportion_augmented >= 0.0 && proportion_augmented <= 1.0)) {
        fail(ErrorKind::usage, "proportion_augmented must lie in [0, 1]");
    }
    if (weight_ancillary < 0.0 || weight_term < 0.0 || !(weight_ancillary + weight_term > 0.0)) {
        fail(ErrorKind::usage, "similarity weights must be non-negative with a positive sum");
    }
}

double jaccard(const ArticleSet& a, const ArticleSet& b)
{
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double term_similarity(const PrisonTerm& a, const PrisonTerm& b)
{
    if (a.kind == b.kind) {
        if (!a.has_months()) return 1.0;
        return std::exp(-std::abs(a.months - b.months) / 24.0);
    }
    auto life_death = [](TermKind k) { return k == TermKind::life || k == TermKind::death; };
    if (life_death(a.kind) && life_death(b.kind)) return 0.25;
    return 0.0;
}

namespace {

double weighted(const ArticleSet& anc_a, const PrisonTerm& term_a, const ArticleSet& anc_b, const PrisonTerm& term_b,
                const AugmentConfig& cfg)
{
    double num = cfg.weight_ancillary * jaccard(anc_a, anc_b) + cfg.weight_term * term_similarity(term_a, term_b);
    return num / (cfg.weight_ancillary + cfg.weight_term);
}

}  // namespace

double element_similarity(const LegalElements& a, const LegalElements& b, const AugmentConfig& cfg)
{
    if (cfg.match == MatchMode::exact_main_articles && a.main_articles != b.main_articles) {
        fail(ErrorKind::main_article_mismatch,
             ElementIndex::key_of(a.main_articles) + " vs " + ElementIndex::key_of(b.main_articles));
    }
    return weighted(a.ancillary_articles, a.prison_term, b.ancillary_articles, b.prison_term, cfg);
}

std::optional<std::string> try_find_augmented_positive(const std::string& source_case_id, const ElementIndex& index,
                                                       const AugmentConfig& cfg)
{
    const LegalElements* source = index.elements(source_case_id);
    if (!source) fail(ErrorKind::unknown_doc, source_case_id);

    std::vector<const ElementEntry*> candidates;
    if (cfg.match == MatchMode::exact_main_articles) {
        if (const auto* b = index.bucket(source->main_articles)) {
            for (const auto& e : *b) candidates.push_back(&e);
        }
    } else {
        candidates = index.sharing_charge(source->charges);
    }

    double best = -1.0;
    std::vector<const ElementEntry*> ties;
    for (const auto* e : candidates) {
        if (e->case_id == source_case_id) continue;
        double sim = weighted(source->ancillary_articles, source->prison_term, e->ancillary_articles, e->prison_term, cfg);
        if (sim > best) {
            best = sim;
            ties.assign(1, e);
        } else if (sim == best) {
            ties.push_back(e);
        }
    }
    if (ties.empty()) return std::nullopt;
    if (cfg.tie_break == TieBreak::seeded && ties.size() > 1) {
        std::mt19937_64 rng(text::derive_seed(cfg.seed, source_case_id));
        return ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)]->case_id;
    }
    return ties.front()->case_id;  // candidates are visited in case_id order
}

std::string find_augmented_positive(const std::string& source_case_id, const ElementIndex& index,
                                    const AugmentConfig& cfg)
{
    auto found = try_find_augmented_positive(source_case_id, index, cfg);
    if (!found) fail(ErrorKind::no_match, source_case_id + " has no distinct same-article case");
    return *found;
}

const char* to_string(PairKind kind) noexcept { return kind == PairKind::original ? "original" : "augmented"; }

std::size_t augmented_target(double proportion, std::size_t n)
{
    // The epsilon keeps products such as 0.35 * 1000 from flooring to 349.
    return static_cast<std::size_t>(std::floor(proportion * static_cast<double>(n) + 1e-9));
}

std::vector<TrainingPair> mix_pairs(const std::vector<QueryRecord>& queries, const ElementIndex& index,
                                    const AugmentConfig& cfg)
{
    cfg.validate();
    std::vector<TrainingPair> pairs;
    pairs.reserve(queries.size());
    for (const auto& q : queries) {
        const auto* e = index.elements(q.source_case_id);
        if (!e) fail(ErrorKind::unknown_doc, q.query_id + ": source case " + q.source_case_id + " not in corpus");
        pairs.push_back({q.query_id, q.source_case_id, PairKind::original, e->charges, false});
    }

    std::vector<std::size_t> order(queries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t target = augmented_target(cfg.proportion_augmented, queries.size());
    std::size_t done = 0;
    for (std::size_t i : order) {
        if (done == target) break;
        auto positive = try_find_augmented_positive(queries[i].source_case_id, index, cfg);
        if (!positive) {
            pairs[i].fallback = true;
            continue;
        }
        pairs[i].positive_case_id = *positive;
        pairs[i].kind = PairKind::augmented;
        pairs[i].positive_charges = index.elements(*positive)->charges;
        ++done;
    }
    return pairs;
}

void write_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs)
{
    std::string out;
    for (const auto& p : pairs) {
        std::string charges;
        for (const auto& c : p.positive_charges) {
            if (!charges.empty()) charges.push_back('|');
            charges += c;
        }
        out += io::join_tsv({p.query_id, p.positive_case_id, to_string(p.kind), p.fallback ? "1" : "0", charges});
        out += '\n';
    }
    io::write_atomic(path, out);
}

std::vector<TrainingPair> read_pairs(const std::filesystem::path& path)
{
    std::vector<TrainingPair> pairs;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        if (f.size() < 4 || (f[2] != "original" && f[2] != "augmented")) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": bad pair row");
        }
        TrainingPair p;
        p.query_id = f[0];
        p.positive_case_id = f[1];
        p.kind = f[2] == "original" ? PairKind::original : PairKind::augmented;
        p.fallback = f[3] == "1";
        if (f.size() > 4 && !f[4].empty()) {
            for (auto& c : text::split(f[4], '|')) p.positive_charges.insert(c);
        }
        pairs.push_back(std::move(p));
    });
    return pairs;
}

}  // namespace lcr
