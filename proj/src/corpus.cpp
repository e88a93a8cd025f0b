#include "lcr/corpus.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <regex>
#include <sstream>
#include <unordered_set>

using nlohmann::json;

namespace lcr {

const char* to_string(DocKind kind) noexcept
{
    return kind == DocKind::judgment ? "judgment" : "ruling";
}

DocKind parse_doc_kind(std::string_view s)
{
    if (s == "judgment") return DocKind::judgment;
    if (s == "ruling") return DocKind::ruling;
    fail(ErrorKind::malformed_record, "unknown doc_kind '" + std::string(s) + "'");
}

std::string ArticleId::to_string() const
{
    auto s = std::to_string(number);
    if (sub > 0) s += "-" + std::to_string(sub);
    return s;
}

ArticleId ArticleId::parse(std::string_view s)
{
    ArticleId id;
    auto dash = s.find('-');
    auto head = s.substr(0, dash);
    try {
        std::size_t used = 0;
        id.number = std::stoi(std::string(head), &used);
        if (used != head.size()) throw std::invalid_argument("trailing");
        if (dash != std::string_view::npos) {
            auto tail = std::string(s.substr(dash + 1));
            id.sub = std::stoi(tail, &used);
            if (used != tail.size()) throw std::invalid_argument("trailing");
        }
    } catch (const std::logic_error&) {
        fail(ErrorKind::malformed_record, "bad article id '" + std::string(s) + "'");
    }
    if (id.number <= 0 || id.sub < 0) {
        fail(ErrorKind::malformed_record, "bad article id '" + std::string(s) + "'");
    }
    return id;
}

const char* to_string(TermKind kind) noexcept
{
    switch (kind) {
    case TermKind::death: return "death";
    case TermKind::life: return "life";
    case TermKind::fixed_term: return "fixed_term";
    case TermKind::detention: return "detention";
    case TermKind::control: return "control";
    case TermKind::fine_only: return "fine_only";
    case TermKind::exempt: return "exempt";
    }
    return "exempt";
}

TermKind parse_term_kind(std::string_view s)
{
    for (auto k : {TermKind::death, TermKind::life, TermKind::fixed_term, TermKind::detention,
                   TermKind::control, TermKind::fine_only, TermKind::exempt}) {
        if (s == to_string(k)) return k;
    }
    fail(ErrorKind::malformed_record, "unknown term kind '" + std::string(s) + "'");
}

std::string PrisonTerm::to_string() const
{
    std::string s = lcr::to_string(kind);
    if (has_months()) s += ":" + std::to_string(months);
    return s;
}

std::string CaseDocument::full_text() const
{
    std::string out = fact;
    out += reason;
    out += judgment;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

json term_to_json(const PrisonTerm& t)
{
    return json{{"kind", to_string(t.kind)}, {"months", t.months}};
}

PrisonTerm term_from_json(const json& j)
{
    PrisonTerm t;
    t.kind = parse_term_kind(j.at("kind").get<std::string>());
    t.months = j.value("months", 0);
    if (!t.valid()) fail(ErrorKind::malformed_record, "invalid prison term " + t.to_string());
    return t;
}

json case_to_json(const CaseDocument& doc)
{
    json j;
    j["case_id"] = doc.case_id;
    j["doc_kind"] = to_string(doc.doc_kind);
    j["fact"] = doc.fact;
    j["reason"] = doc.reason;
    j["judgment"] = doc.judgment;
    if (!doc.charge_labels.empty()) j["charges"] = doc.charge_labels;
    if (!doc.structured_articles.empty()) {
        auto& arr = j["articles"] = json::array();
        for (const auto& a : doc.structured_articles) arr.push_back(a.to_string());
    }
    if (doc.structured_term) j["term"] = term_to_json(*doc.structured_term);
    return j;
}

const json* field(const json& j, const char* name, const char* alias = nullptr)
{
    if (auto it = j.find(name); it != j.end() && !it->is_null()) return &*it;
    if (alias) {
        if (auto it = j.find(alias); it != j.end() && !it->is_null()) return &*it;
    }
    return nullptr;
}

std::string string_field(const json& v, const char* name)
{
    if (!v.is_string()) fail(ErrorKind::malformed_record, std::string(name) + " is not a string");
    return v.get<std::string>();
}

CaseDocument case_from_json(const json& j)
{
    if (!j.is_object()) fail(ErrorKind::malformed_record, "record is not an object");
    CaseDocument doc;
    const json* id = field(j, "case_id", "id");
    if (!id) fail(ErrorKind::missing_field, "case_id");
    doc.case_id = string_field(*id, "case_id");
    if (doc.case_id.empty()) fail(ErrorKind::missing_field, "case_id");
    const json* fact = field(j, "fact");
    if (!fact) fail(ErrorKind::missing_field, "fact");
    doc.fact = string_field(*fact, "fact");
    if (const json* kind = field(j, "doc_kind", "kind")) {
        doc.doc_kind = parse_doc_kind(string_field(*kind, "doc_kind"));
    }
    if (const json* r = field(j, "reason")) doc.reason = string_field(*r, "reason");
    if (const json* g = field(j, "judgment")) doc.judgment = string_field(*g, "judgment");
    try {
        if (const json* c = field(j, "charges")) doc.charge_labels = c->get<std::vector<std::string>>();
        if (const json* a = field(j, "articles")) {
            for (const auto& s : *a) doc.structured_articles.push_back(ArticleId::parse(s.get<std::string>()));
        }
        if (const json* t = field(j, "term")) doc.structured_term = term_from_json(*t);
    } catch (const json::exception& e) {
        fail(ErrorKind::malformed_record, doc.case_id + ": " + e.what());
    }
    return doc;
}

json elements_to_json(const LegalElements& e)
{
    json j;
    j["charges"] = std::vector<std::string>(e.charges.begin(), e.charges.end());
    auto& main = j["main_articles"] = json::array();
    for (const auto& a : e.main_articles) main.push_back(a.to_string());
    auto& anc = j["ancillary_articles"] = json::array();
    for (const auto& a : e.ancillary_articles) anc.push_back(a.to_string());
    j["term"] = term_to_json(e.prison_term);
    return j;
}

LegalElements elements_from_json(const json& j)
{
    LegalElements e;
    try {
        for (const auto& c : j.at("charges")) e.charges.insert(c.get<std::string>());
        for (const auto& a : j.at("main_articles")) e.main_articles.insert(ArticleId::parse(a.get<std::string>()));
        for (const auto& a : j.at("ancillary_articles")) {
            e.ancillary_articles.insert(ArticleId::parse(a.get<std::string>()));
        }
        e.prison_term = term_from_json(j.at("term"));
    } catch (const json::exception& ex) {
        fail(ErrorKind::malformed_record, std::string("elements: ") + ex.what());
    }
    return e;
}

json parse_json(std::string_view line)
{
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::malformed_record, e.what());
    }
}

}  // namespace

CaseDocument parse_case(std::string_view json_line)
{
    return case_from_json(parse_json(json_line));
}

std::string serialize_case(const CaseDocument& doc) { return case_to_json(doc).dump(); }

std::string serialize_elements(const LegalElements& e) { return elements_to_json(e).dump(); }

LegalElements parse_elements(std::string_view s) { return elements_from_json(parse_json(s)); }

// ---------------------------------------------------------------------------

const char* to_string(ArticleRole role) noexcept
{
    return role == ArticleRole::main ? "main" : "ancillary";
}

ArticleSplitRule ArticleSplitRule::threshold(int last_ancillary)
{
    ArticleSplitRule r;
    r.m_last_ancillary = last_ancillary;
    return r;
}

ArticleSplitRule ArticleSplitRule::table(std::map<ArticleId, ArticleRole> roles)
{
    ArticleSplitRule r;
    r.m_table = std::move(roles);
    return r;
}

ArticleSplitRule ArticleSplitRule::load_table(const std::filesystem::path& path)
{
    std::map<ArticleId, ArticleRole> roles;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        if (f.size() != 2 || (f[1] != "main" && f[1] != "ancillary")) {
            fail(ErrorKind::malformed_record,
                 path.string() + ":" + std::to_string(number) + ": expected <article>\\t<main|ancillary>");
        }
        roles[ArticleId::parse(f[0])] = f[1] == "main" ? ArticleRole::main : ArticleRole::ancillary;
    });
    return table(std::move(roles));
}

ArticleRole ArticleSplitRule::classify(const ArticleId& article) const
{
    if (m_table) {
        auto it = m_table->find(article);
        if (it == m_table->end()) fail(ErrorKind::unknown_article, article.to_string());
        return it->second;
    }
    return article.number <= m_last_ancillary ? ArticleRole::ancillary : ArticleRole::main;
}

// ---------------------------------------------------------------------------

namespace {

// The regex engine works on bytes; multi-byte characters are spelled as
// alternatives rather than bracket classes.
#define LCR_NUM "((?:[0-9]|零|〇|一|二|两|三|四|五|六|七|八|九|十|百|千)+)"

int digit_value(std::string_view c)
{
    static const std::pair<std::string_view, int> table[] = {
        {"零", 0}, {"〇", 0}, {"一", 1}, {"二", 2}, {"两", 2}, {"三", 3}, {"四", 4},
        {"五", 5}, {"六", 6}, {"七", 7}, {"八", 8}, {"九", 9},
    };
    if (c.size() == 1 && c[0] >= '0' && c[0] <= '9') return c[0] - '0';
    for (const auto& [k, v] : table) {
        if (c == k) return v;
    }
    return -1;
}

int unit_value(std::string_view c)
{
    if (c == "十") return 10;
    if (c == "百") return 100;
    if (c == "千") return 1000;
    return 0;
}

}  // namespace

int parse_numeral(std::string_view s)
{
    if (s.empty()) fail(ErrorKind::malformed_record, "empty numeral");
    long section = 0;
    long pending = 0;
    bool have_pending = false;
    for (const auto& c : text::chars(s)) {
        if (int d = digit_value(c); d >= 0) {
            pending = pending * 10 + d;
            have_pending = true;
        } else if (int u = unit_value(c); u > 0) {
            section += (have_pending ? pending : 1) * u;
            pending = 0;
            have_pending = false;
        } else {
            fail(ErrorKind::malformed_record, "not a numeral: '" + std::string(s) + "'");
        }
        if (section + pending > 1000000) fail(ErrorKind::malformed_record, "numeral too large");
    }
    return static_cast<int>(section + pending);
}

std::set<std::string> extract_charges(std::string_view judgment)
{
    static const std::regex charge_re("犯((?:(?!，|。|；|犯|,).)+?罪)");
    std::set<std::string> out;
    std::string s(judgment);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), charge_re); it != std::sregex_iterator(); ++it) {
        auto name = text::normalize_space((*it)[1].str());
        if (!name.empty()) out.insert(name);
    }
    return out;
}

std::vector<ArticleId> extract_articles(std::string_view reason)
{
    static const std::regex article_re("第" LCR_NUM "条(?:之" LCR_NUM ")?");
    static const std::regex citation_re("《(?:中华人民共和国)?刑法》");

    std::string s(reason);
    // Restrict to the statute citations when present; the argument text
    // before them may mention articles of other codes.
    std::vector<std::string> regions;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), citation_re); it != std::sregex_iterator(); ++it) {
        auto begin = static_cast<std::size_t>(it->position(0) + it->length(0));
        auto end = std::min(s.find("之规定", begin), s.find("。", begin));
        regions.push_back(s.substr(begin, end == std::string::npos ? std::string::npos : end - begin));
    }
    if (regions.empty()) regions.push_back(s);

    std::vector<ArticleId> out;
    for (const auto& region : regions) {
        for (auto it = std::sregex_iterator(region.begin(), region.end(), article_re);
             it != std::sregex_iterator(); ++it) {
            ArticleId id;
            id.number = parse_numeral((*it)[1].str());
            if ((*it)[2].matched) id.sub = parse_numeral((*it)[2].str());
            if (id.number > 0 && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
        }
    }
    return out;
}

namespace {

int parse_duration_months(const std::smatch& m, int years_group, int months_group)
{
    int months = 0;
    if (m[years_group].matched) months += 12 * parse_numeral(m[years_group].str());
    if (m[months_group].matched) months += parse_numeral(m[months_group].str());
    return months;
}

}  // namespace

std::optional<PrisonTerm> extract_prison_term(std::string_view judgment)
{
    static const std::regex death_re("死刑");
    static const std::regex life_re("无期徒刑");
    static const std::regex fixed_re("有期徒刑(?:" LCR_NUM "年)?(?:" LCR_NUM "个月)?");
    static const std::regex detention_re("拘役" LCR_NUM "个月");
    static const std::regex control_re("管制(?:" LCR_NUM "年)?(?:" LCR_NUM "个月)?");
    static const std::regex exempt_re("免予刑事处罚|免除处罚");
    static const std::regex fine_re("单处罚金");

    std::string s(judgment);
    // With several charges the executed sentence follows 决定执行.
    if (auto pos = s.find("决定执行"); pos != std::string::npos) s = s.substr(pos);

    std::optional<PrisonTerm> best;
    std::ptrdiff_t best_pos = -1;
    auto consider = [&](const std::regex& re, auto make) {
        std::smatch m;
        auto begin = s.cbegin();
        while (std::regex_search(begin, s.cend(), m, re)) {
            auto term = make(m);
            auto pos = std::distance(s.cbegin(), m[0].first);
            if (term && (best_pos < 0 || pos < best_pos)) {
                best = term;
                best_pos = pos;
            }
            if (term) break;
            begin = m[0].second;
        }
    };
    consider(death_re, [](const std::smatch&) { return std::optional(PrisonTerm::death()); });
    consider(life_re, [](const std::smatch&) { return std::optional(PrisonTerm::life()); });
    consider(fixed_re, [](const std::smatch& m) -> std::optional<PrisonTerm> {
        int months = parse_duration_months(m, 1, 2);
        if (months <= 0) return std::nullopt;
        return PrisonTerm::fixed(months);
    });
    consider(detention_re, [](const std::smatch& m) {
        return std::optional(PrisonTerm::detention(parse_numeral(m[1].str())));
    });
    consider(control_re, [](const std::smatch& m) -> std::optional<PrisonTerm> {
        int months = parse_duration_months(m, 1, 2);
        if (months <= 0) return std::nullopt;
        return PrisonTerm::control(months);
    });
    consider(exempt_re, [](const std::smatch&) { return std::optional(PrisonTerm::exempt()); });
    consider(fine_re, [](const std::smatch&) { return std::optional(PrisonTerm::fine_only()); });
    return best;
}

#undef LCR_NUM

LegalElements extract_elements(const CaseDocument& doc, const ArticleSplitRule& rule)
{
    LegalElements e;
    e.charges = extract_charges(doc.judgment);
    if (e.charges.empty()) {
        for (const auto& c : doc.charge_labels) {
            auto name = text::normalize_space(c);
            if (!name.empty()) e.charges.insert(name);
        }
    }
    if (e.charges.empty()) fail(ErrorKind::extraction_failed, doc.case_id + ": no charge");

    auto articles = extract_articles(doc.reason);
    if (articles.empty()) articles = doc.structured_articles;
    for (const auto& a : articles) {
        if (rule.classify(a) == ArticleRole::main) {
            e.main_articles.insert(a);
        } else {
            e.ancillary_articles.insert(a);
        }
    }
    if (e.main_articles.empty()) fail(ErrorKind::extraction_failed, doc.case_id + ": no main article");

    auto term = extract_prison_term(doc.judgment);
    if (!term) term = doc.structured_term;
    if (!term) fail(ErrorKind::extraction_failed, doc.case_id + ": no prison term");
    e.prison_term = *term;
    return e;
}

// ---------------------------------------------------------------------------

const char* to_string(ExclusionReason reason) noexcept
{
    switch (reason) {
    case ExclusionReason::ruling: return "RULING";
    case ExclusionReason::short_fact: return "SHORT_FACT";
    case ExclusionReason::extraction_failed: return "EXTRACTION_FAILED";
    case ExclusionReason::duplicate_id: return "DUPLICATE_ID";
    case ExclusionReason::missing_field: return "MISSING_FIELD";
    case ExclusionReason::malformed: return "MALFORMED";
    }
    return "UNKNOWN";
}

FilterResult filter_corpus(const std::vector<CaseDocument>& docs, const CorpusFilterConfig& cfg,
                           const ArticleSplitRule& rule)
{
    FilterResult result;
    std::unordered_set<std::string> seen;
    for (const auto& doc : docs) {
        if (!seen.insert(doc.case_id).second) {
            result.excluded.push_back({doc.case_id, ExclusionReason::duplicate_id});
            continue;
        }
        if (doc.doc_kind == DocKind::ruling) {
            result.excluded.push_back({doc.case_id, ExclusionReason::ruling});
            continue;
        }
        if (text::char_count(doc.fact) < cfg.min_fact_chars) {
            result.excluded.push_back({doc.case_id, ExclusionReason::short_fact});
            continue;
        }
        AdmittedCase admitted{doc, {}};
        try {
            admitted.elements = extract_elements(doc, rule);
        } catch (const Error& e) {
            if (cfg.require_extractable_elements || e.kind() != ErrorKind::extraction_failed) {
                result.excluded.push_back({doc.case_id, ExclusionReason::extraction_failed});
                continue;
            }
        }
        result.admitted.push_back(std::move(admitted));
    }
    std::sort(result.admitted.begin(), result.admitted.end(),
              [](const AdmittedCase& a, const AdmittedCase& b) { return a.doc.case_id < b.doc.case_id; });
    return result;
}

// ---------------------------------------------------------------------------

IngestResult read_raw_corpus(const std::filesystem::path& path)
{
    IngestResult result;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            result.docs.push_back(parse_case(line));
        } catch (const Error& e) {
            // Best effort at an id for the log.
            std::string id = "line:" + std::to_string(number);
            try {
                auto j = json::parse(line);
                if (j.is_object()) {
                    if (auto it = j.find("case_id"); it != j.end() && it->is_string()) id = *it;
                    else if (auto it2 = j.find("id"); it2 != j.end() && it2->is_string()) id = *it2;
                }
            } catch (const json::exception&) {
            }
            result.rejected.push_back({id, e.kind() == ErrorKind::missing_field ? ExclusionReason::missing_field
                                                                              : ExclusionReason::malformed});
        }
    });
    return result;
}

void write_corpus(const std::filesystem::path& path, const std::vector<CaseDocument>& docs)
{
    std::string out;
    for (const auto& d : docs) {
        out += serialize_case(d);
        out += '\n';
    }
    io::write_atomic(path, out);
}

std::vector<CaseDocument> read_corpus(const std::filesystem::path& path)
{
    std::vector<CaseDocument> docs;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            docs.push_back(parse_case(line));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    });
    return docs;
}

void write_admitted(const std::filesystem::path& path, const std::vector<AdmittedCase>& cases)
{
    std::string out;
    for (const auto& c : cases) {
        auto j = case_to_json(c.doc);
        j["elements"] = elements_to_json(c.elements);
        out += j.dump();
        out += '\n';
    }
    io::write_atomic(path, out);
}

std::vector<AdmittedCase> read_admitted(const std::filesystem::path& path)
{
    std::vector<AdmittedCase> cases;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto j = parse_json(line);
        if (!j.is_object() || !j.contains("elements")) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": missing elements");
        }
        cases.push_back({case_from_json(j), elements_from_json(j["elements"])});
    });
    return cases;
}

void write_exclusions(const std::filesystem::path& path, const std::vector<Exclusion>& log)
{
    std::string out;
    for (const auto& e : log) {
        out += io::join_tsv({e.case_id, to_string(e.reason)});
        out += '\n';
    }
    io::write_atomic(path, out);
}

}  // namespace lcr
