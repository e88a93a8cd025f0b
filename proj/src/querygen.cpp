#include "lcr/querygen.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <thread>

using nlohmann::json;

namespace lcr {

const char* to_string(Role role) noexcept
{
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

const char* to_string(GeneratorKind kind) noexcept
{
    return kind == GeneratorKind::remote_model ? "remote_model" : "offline_template";
}

GeneratorKind parse_generator_kind(std::string_view s)
{
    if (s == "remote_model") return GeneratorKind::remote_model;
    if (s == "offline_template") return GeneratorKind::offline_template;
    fail(ErrorKind::malformed_record, "unknown generator '" + std::string(s) + "'");
}

const char* to_string(EntityCategory c) noexcept
{
    switch (c) {
    case EntityCategory::person: return "person";
    case EntityCategory::company: return "company";
    case EntityCategory::location: return "location";
    case EntityCategory::time: return "time";
    case EntityCategory::other: return "other";
    }
    return "other";
}

EntityCategory parse_entity_category(std::string_view s)
{
    for (auto c : {EntityCategory::person, EntityCategory::company, EntityCategory::location, EntityCategory::time,
                   EntityCategory::other}) {
        if (s == to_string(c)) return c;
    }
    fail(ErrorKind::malformed_record, "unknown entity category '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------

PromptTemplate PromptTemplate::standard()
{
    PromptTemplate tpl;
    tpl.system_text =
        "As a legal expert, you are capable of extracting key elements from the basic information of a case.";
    tpl.instruction_text =
        "I have a dataset for searching cases by case. However, the basic information of the cases in my "
        "dataset is too long. I will send you the basic information of these cases, please help me simplify "
        "them, and greatly shorten their length while retaining key legal elements. You can remove non-key "
        "names, locations, etc., but do not delete important elements for case judgments.";
    tpl.acknowledgement_text = "I understand your requirement.";
    tpl.brevity_text = "The summary is still too long. Shorten it further and keep only the key legal events.";
    tpl.exemplars.push_back(Exemplar{
        "obstruction",
        "In August 2015, XX Co., Ltd. obtained the right to use state-owned construction land in XX Lake area of "
        "XX District through public auction, and developed the \"XX\" project. The defendants Alice, Bob, "
        "Charlie, David, and Edward are villagers of XX Village, XX Street Office, XX District, within the scope "
        "of the project. The demolition and compensation within the scope of the land has been implemented by the "
        "Management Committee of XX in 2014. After the \"XX\" project started construction on July 13, 2016, "
        "Alice, Bob, and others proposed to the construction party to contract part of the project such as "
        "excavation of retaining walls and earthwork excavation of foundation piles. Because they did not have "
        "the construction qualification, the project developer did not agree. From July 20 to August 12, 2016, "
        "Alice, Bob, Charlie, David, and Edward convened at \"XX\" and \"XX\" Tea House to discuss obstructing "
        "the construction, and raised 70,000 yuan for the obstruction fund. At the same time, Bob, Charlie, "
        "David, and others used WeChat groups and phone calls to invite and mobilize more than 20 villagers from "
        "their village and their family members to obstruct the construction of the \"XX\" construction site by "
        "methods such as locking the gate, pulling the power switch, insulting, and standing on construction "
        "machinery, causing the construction site to be unable to proceed normally. The economic loss caused by "
        "the obstruction during the construction period was appraised by XX District Price Certification Center "
        "as 124,530 yuan.",
        "A company obtained the right to use construction land through auction and compensation has been "
        "implemented, but villagers nearby conspired to obstruct construction, raising a fund of 70,000 yuan and "
        "mobilizing more than 20 villagers to repeatedly obstruct the construction site, causing an economic loss "
        "appraised at 124,530 yuan.",
    });
    tpl.exemplars.push_back(Exemplar{
        "traffic",
        "On the evening of March 3, 2018, the defendant Zhang drove a small truck registered to a logistics "
        "company along a county road after finishing a delivery. Zhang had been working since early morning and "
        "the road was poorly lit. When passing a village entrance he failed to keep a proper lookout and struck "
        "a pedestrian crossing the road, then drove away without stopping. The pedestrian died at the scene. The "
        "traffic police determined that Zhang bore full responsibility for the accident. Two days later Zhang "
        "went to the police station on his own initiative and truthfully confessed.",
        "A driver failed to keep a proper lookout, struck and killed a pedestrian, fled the scene and bore full "
        "responsibility, then surrendered voluntarily and confessed two days later.",
    });
    return tpl;
}

std::vector<Message> assemble_prompt(std::string_view fact, const PromptTemplate& tpl, std::uint64_t seed,
                                     std::vector<std::string>* exemplar_ids)
{
    if (text::trim(fact).empty()) fail(ErrorKind::malformed_record, "empty fact");
    if (tpl.exemplars.size() < tpl.exemplars_per_prompt) {
        fail(ErrorKind::empty_pool, "pool has " + std::to_string(tpl.exemplars.size()) + " exemplars, prompt needs "
                                        + std::to_string(tpl.exemplars_per_prompt));
    }
    std::vector<std::size_t> order(tpl.exemplars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first k entries are the sample.
    for (std::size_t i = 0; i < tpl.exemplars_per_prompt; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }

    std::vector<Message> msgs;
    msgs.push_back({Role::system, tpl.system_text});
    msgs.push_back({Role::user, tpl.instruction_text});
    if (!tpl.acknowledgement_text.empty()) msgs.push_back({Role::assistant, tpl.acknowledgement_text});
    for (std::size_t i = 0; i < tpl.exemplars_per_prompt; ++i) {
        const auto& ex = tpl.exemplars[order[i]];
        msgs.push_back({Role::user, ex.fact});
        msgs.push_back({Role::assistant, ex.query});
        if (exemplar_ids) exemplar_ids->push_back(ex.id);
    }
    msgs.push_back({Role::user, std::string(fact)});
    return msgs;
}

// ---------------------------------------------------------------------------

OfflineTemplateClient::OfflineTemplateClient() : m_markers(default_markers()) {}

OfflineTemplateClient::OfflineTemplateClient(std::vector<std::string> markers) : m_markers(std::move(markers)) {}

const std::vector<std::string>& OfflineTemplateClient::default_markers()
{
    static const std::vector<std::string> markers = {
        "元", "致", "造成", "鉴定", "投案", "供述", "经查", "共计", "价值",
        "yuan", "loss", "injur", "killed", "died", "surrender",
    };
    return markers;
}

std::string OfflineTemplateClient::compress(std::string_view fact) const
{
    auto sentences = text::split_sentences(fact);
    std::string out;
    for (const auto& s : sentences) {
        bool key = std::any_of(m_markers.begin(), m_markers.end(),
                               [&](const std::string& m) { return s.find(m) != std::string::npos; });
        if (key) out += s;
    }
    if (out.empty() && !sentences.empty()) out = sentences.front();
    return text::trim(out);
}

std::string OfflineTemplateClient::complete(const std::vector<Message>& messages)
{
    // A re-ask ends with [assistant answer, user brevity request].
    static const std::string brevity = PromptTemplate::standard().brevity_text;
    if (messages.size() >= 2 && messages.back().role == Role::user && messages.back().content == brevity
        && messages[messages.size() - 2].role == Role::assistant) {
        auto sentences = text::split_sentences(messages[messages.size() - 2].content);
        std::string out;
        for (std::size_t i = 0; i < (sentences.size() + 1) / 2; ++i) out += sentences[i];
        return text::trim(out);
    }
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) return compress(it->content);
    }
    return {};
}

// ---------------------------------------------------------------------------

const Lexicon& Lexicon::gazetteer()
{
    static const Lexicon lex{{
        {EntityCategory::person,
         {"张伟", "王芳", "李娜", "刘洋", "陈杰", "杨磊", "赵敏", "黄勇", "周涛", "吴刚", "徐静", "孙鹏",
          "马骏", "朱丽", "胡斌", "郭强", "何平", "林辉", "罗军", "郑浩", "梁宇", "谢飞", "宋佳", "唐亮",
          "韩雪", "冯凯", "曹阳", "彭程", "欧阳明", "司马琳", "Alice", "Bob", "Charlie", "David", "Edward"}},
        {EntityCategory::company,
         {"宏达建材有限公司", "恒通物流有限公司", "鑫源贸易有限公司", "华盛电子科技有限公司", "金桥餐饮管理有限公司",
          "远航汽车租赁有限公司", "瑞丰农业发展有限公司", "博雅文化传媒有限公司", "天诚房地产开发有限公司",
          "顺丰源商贸有限公司"}},
        {EntityCategory::location,
         {"北京市朝阳区", "上海市浦东新区", "广州市天河区", "深圳市南山区", "杭州市西湖区", "成都市武侯区",
          "武汉市洪山区", "西安市雁塔区", "南京市鼓楼区", "重庆市渝中区", "长沙市岳麓区", "郑州市金水区",
          "济南市历下区", "沈阳市和平区", "昆明市五华区", "合肥市蜀山区", "中山北路", "解放东路", "滨江大道",
          "文化西路", "迎宾大道", "青年路"}},
        {EntityCategory::time, {}},
    }};
    return lex;
}

const Lexicon& Lexicon::surrogates()
{
    static const Lexicon lex{{
        {EntityCategory::person,
         {"李明", "王丽", "张强", "刘芳", "陈静", "杨帆", "赵磊", "黄丽", "周明", "吴静", "孙浩", "钱伟",
          "Emma", "Frank", "Grace", "Henry", "Irene", "Jack"}},
        {EntityCategory::company,
         {"安达商贸有限公司", "久盛实业有限公司", "长信物流有限公司", "百川建设工程有限公司", "佳和食品有限公司",
          "a trading company", "a logistics company"}},
        {EntityCategory::location,
         {"天津市河西区", "苏州市姑苏区", "厦门市思明区", "青岛市市南区", "福州市鼓山区", "贵阳市云岩区",
          "南宁市青秀区", "太原市小店区", "a nearby district", "a county town"}},
        {EntityCategory::time, {"某日", "当日", "one day"}},
    }};
    return lex;
}

namespace {

bool is_ascii(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_word_char(char c)
{
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_';
}

struct Candidate {
    std::size_t begin;
    std::size_t end;
    EntityCategory category;
};

const std::vector<std::regex>& time_patterns()
{
    static const std::vector<std::regex> patterns = [] {
        const std::string month = "(?:January|February|March|April|May|June|July|August|September|October|"
                                  "November|December)";
        return std::vector<std::regex>{
            std::regex("[0-9]{4}年(?:[0-9]{1,2}月(?:[0-9]{1,2}日)?)?"),
            std::regex("[0-9]{1,2}月[0-9]{1,2}日"),
            std::regex("[0-9]{1,2}时(?:[0-9]{1,2}分)?许?"),
            std::regex(month + "(?: [0-9]{1,2})?(?:,? [0-9]{4})?"),
            std::regex("[0-9]{1,2}:[0-9]{2}(?: ?[AP]M)?"),
        };
    }();
    return patterns;
}

}  // namespace

DictionaryTagger::DictionaryTagger() : DictionaryTagger(Lexicon::gazetteer()) {}

DictionaryTagger::DictionaryTagger(Lexicon gazetteer, bool date_patterns)
    : m_gazetteer(std::move(gazetteer)), m_date_patterns(date_patterns)
{}

std::vector<EntitySpan> DictionaryTagger::tag(std::string_view text) const
{
    std::vector<Candidate> candidates;
    for (const auto& [category, words] : m_gazetteer.entries) {
        for (const auto& w : words) {
            if (w.empty()) continue;
            bool ascii = is_ascii(w);
            for (auto pos = text.find(w); pos != std::string_view::npos; pos = text.find(w, pos + 1)) {
                auto end = pos + w.size();
                if (ascii && ((pos > 0 && is_word_char(text[pos - 1])) || (end < text.size() && is_word_char(text[end])))) {
                    continue;
                }
                candidates.push_back({pos, end, category});
            }
        }
    }
    if (m_date_patterns) {
        std::string s(text);
        for (const auto& re : time_patterns()) {
            for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
                auto pos = static_cast<std::size_t>(it->position(0));
                auto end = pos + static_cast<std::size_t>(it->length(0));
                if (end == pos) continue;
                if (pos > 0 && std::isdigit(static_cast<unsigned char>(s[pos - 1]))) continue;
                candidates.push_back({pos, end, EntityCategory::time});
            }
        }
    }
    // Leftmost, then longest; greedy non-overlapping selection.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        return a.end > b.end;
    });
    std::vector<EntitySpan> spans;
    std::size_t covered = 0;
    for (const auto& c : candidates) {
        if (c.begin < covered) continue;
        spans.push_back({c.begin, c.end, c.category});
        covered = c.end;
    }
    return spans;
}

namespace {

bool anonymized_category(EntityCategory c)
{
    return c == EntityCategory::person || c == EntityCategory::company || c == EntityCategory::location
           || c == EntityCategory::time;
}

// Random surrogate with the same shape as the original date or clock time,
// or nothing when the original has another shape.
std::optional<std::string> shaped_time(const std::string& original, std::mt19937_64& rng)
{
    static const std::regex cn_date("([0-9]{4})年(?:([0-9]{1,2})月(?:([0-9]{1,2})日)?)?");
    static const std::regex cn_md("[0-9]{1,2}月[0-9]{1,2}日");
    static const std::regex cn_clock("[0-9]{1,2}时(?:([0-9]{1,2})分)?(许?)");
    auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::smatch m;
    if (std::regex_match(original, m, cn_date)) {
        std::string s = std::to_string(draw(2008, 2021)) + "年";
        if (m[2].matched) s += std::to_string(draw(1, 12)) + "月";
        if (m[3].matched) s += std::to_string(draw(1, 28)) + "日";
        return s;
    }
    if (std::regex_match(original, cn_md)) {
        return std::to_string(draw(1, 12)) + "月" + std::to_string(draw(1, 28)) + "日";
    }
    if (std::regex_match(original, m, cn_clock)) {
        std::string s = std::to_string(draw(0, 23)) + "时";
        if (m[1].matched) s += std::to_string(draw(0, 59)) + "分";
        if (m[2].length() > 0) s += "许";
        return s;
    }
    return std::nullopt;
}

std::string fallback_surrogate(EntityCategory c, bool ascii)
{
    switch (c) {
    case EntityCategory::person: return ascii ? "someone" : "某人";
    case EntityCategory::company: return ascii ? "a company" : "某公司";
    case EntityCategory::location: return ascii ? "somewhere" : "某地";
    default: return ascii ? "some time" : "某时";
    }
}

}  // namespace

AnonymizedText anonymize(std::string_view text, const EntityTagger& tagger, const ReplacementDictionary& replacements,
                         std::uint64_t seed)
{
    std::vector<EntitySpan> spans;
    for (const auto& s : tagger.tag(text)) {
        if (anonymized_category(s.category)) spans.push_back(s);
    }
    if (spans.empty()) return {std::string(text), {}};

    std::set<std::string> surfaces;
    for (const auto& s : spans) surfaces.insert(std::string(text.substr(s.begin, s.end - s.begin)));

    AnonymizedText result;
    for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
        std::mt19937_64 rng(text::mix64(seed + attempt));
        std::map<std::string, std::string> mapping;
        std::set<std::string> used;
        result = {};
        std::size_t cursor = 0;
        for (const auto& span : spans) {
            std::string original(text.substr(span.begin, span.end - span.begin));
            auto it = mapping.find(original);
            if (it == mapping.end()) {
                bool ascii = is_ascii(original);
                std::string chosen;
                if (span.category == EntityCategory::time) {
                    for (int tries = 0; tries < 16 && chosen.empty(); ++tries) {
                        auto t = shaped_time(original, rng);
                        if (!t) break;
                        if (!surfaces.count(*t) && !used.count(*t)) chosen = *t;
                    }
                }
                if (chosen.empty()) {
                    std::vector<std::string> pool;
                    if (auto e = replacements.entries.find(span.category); e != replacements.entries.end()) {
                        for (const auto& r : e->second) {
                            if (is_ascii(r) == ascii && !surfaces.count(r) && !used.count(r)) pool.push_back(r);
                        }
                    }
                    if (pool.empty()) {
                        chosen = fallback_surrogate(span.category, ascii);
                    } else {
                        chosen = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                    }
                }
                used.insert(chosen);
                it = mapping.emplace(original, chosen).first;
            }
            result.text.append(text.substr(cursor, span.begin - cursor));
            result.log.push_back({original, span.category, it->second, span.begin, result.text.size()});
            result.text += it->second;
            cursor = span.end;
        }
        result.text.append(text.substr(cursor));

        bool clean = std::none_of(surfaces.begin(), surfaces.end(),
                                  [&](const std::string& s) { return result.text.find(s) != std::string::npos; });
        if (clean) break;
    }
    return result;
}

// ---------------------------------------------------------------------------

std::string query_id_for(std::string_view case_id) { return "q-" + std::string(case_id); }

std::string truncate_at_sentence(std::string_view text, std::size_t max_chars)
{
    if (text::char_count(text) <= max_chars) return std::string(text);
    std::string out;
    std::size_t used = 0;
    for (const auto& s : text::split_sentences(text)) {
        auto n = text::char_count(s);
        if (used + n > max_chars) break;
        out += s;
        used += n;
    }
    if (out.empty()) out = text::char_substr(text, 0, max_chars);
    return text::trim(out);
}

QueryRecord generate_query(const CaseDocument& doc, GenerationClient& client, const PromptTemplate& tpl,
                           std::uint64_t seed, const GenerationConfig& cfg, Anonymizer anonymizer)
{
    QueryRecord rec;
    rec.query_id = query_id_for(doc.case_id);
    rec.source_case_id = doc.case_id;
    rec.generator = client.kind();
    auto messages = assemble_prompt(doc.fact, tpl, seed, &rec.exemplar_ids);

    std::string out;
    for (int attempt = 0; attempt < std::max(1, cfg.max_attempts) && out.empty(); ++attempt) {
        out = text::trim(client.complete(messages));
    }
    if (out.empty()) {
        fail(ErrorKind::generation_failed, doc.case_id + ": empty output after " + std::to_string(cfg.max_attempts)
                                               + " attempts");
    }
    if (text::char_count(out) > cfg.max_query_chars) {
        messages.push_back({Role::assistant, out});
        messages.push_back({Role::user, tpl.brevity_text});
        auto shorter = text::trim(client.complete(messages));
        if (!shorter.empty()) out = shorter;
        if (text::char_count(out) > cfg.max_query_chars) {
            if (cfg.strict_length) {
                fail(ErrorKind::query_too_long, doc.case_id + ": " + std::to_string(text::char_count(out)) + " > "
                                                    + std::to_string(cfg.max_query_chars) + " chars");
            }
            out = truncate_at_sentence(out, cfg.max_query_chars);
            rec.truncated = true;
        }
    }

    if (anonymizer.tagger) {
        const auto& dict = anonymizer.replacements ? *anonymizer.replacements : Lexicon::surrogates();
        auto anon = anonymize(out, *anonymizer.tagger, dict, text::mix64(seed ^ 0xa5a5a5a5ULL));
        out = std::move(anon.text);
        rec.anonymization_log = std::move(anon.log);
        if (text::char_count(out) > cfg.max_query_chars) {
            out = truncate_at_sentence(out, cfg.max_query_chars);
            rec.truncated = true;
            std::erase_if(rec.anonymization_log,
                          [&](const Replacement& r) { return r.output_begin + r.replacement.size() > out.size(); });
        }
    }
    rec.text = std::move(out);
    return rec;
}

std::vector<QueryRecord> generate_queries(const std::vector<CaseDocument>& docs, GenerationClient& client,
                                          const PromptTemplate& tpl, std::uint64_t global_seed,
                                          const GenerationConfig& cfg, Anonymizer anonymizer,
                                          std::size_t max_in_flight)
{
    std::vector<QueryRecord> out(docs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            auto i = next.fetch_add(1);
            if (i >= docs.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (error) return;
            }
            try {
                out[i] = generate_query(docs[i], client, tpl, text::derive_seed(global_seed, docs[i].case_id), cfg,
                                        anonymizer);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::size_t threads = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(1, docs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

// ---------------------------------------------------------------------------

std::string serialize_query(const QueryRecord& q)
{
    json j;
    j["query_id"] = q.query_id;
    j["source_case_id"] = q.source_case_id;
    j["text"] = q.text;
    j["generator"] = to_string(q.generator);
    j["exemplar_ids"] = q.exemplar_ids;
    auto& log = j["anonymization_log"] = json::array();
    for (const auto& r : q.anonymization_log) {
        log.push_back({{"span", r.original},
                       {"category", to_string(r.category)},
                       {"replacement", r.replacement},
                       {"input_begin", r.input_begin},
                       {"output_begin", r.output_begin}});
    }
    if (q.truncated) j["truncated"] = true;
    return j.dump();
}

QueryRecord parse_query(std::string_view line)
{
    QueryRecord q;
    try {
        auto j = json::parse(line);
        q.query_id = j.at("query_id").get<std::string>();
        q.source_case_id = j.at("source_case_id").get<std::string>();
        q.text = j.at("text").get<std::string>();
        q.generator = parse_generator_kind(j.value("generator", std::string("offline_template")));
        q.exemplar_ids = j.value("exemplar_ids", std::vector<std::string>{});
        if (j.contains("anonymization_log")) {
            for (const auto& r : j["anonymization_log"]) {
                q.anonymization_log.push_back({r.at("span").get<std::string>(),
                                               parse_entity_category(r.at("category").get<std::string>()),
                                               r.at("replacement").get<std::string>(),
                                               r.value("input_begin", std::size_t{0}),
                                               r.value("output_begin", std::size_t{0})});
            }
        }
        q.truncated = j.value("truncated", false);
    } catch (const json::exception& e) {
        fail(ErrorKind::malformed_record, std::string("query record: ") + e.what());
    }
    if (q.query_id.empty()) fail(ErrorKind::missing_field, "query_id");
    return q;
}

void write_queries(const std::filesystem::path& path, const std::vector<QueryRecord>& queries)
{
    std::string out;
    for (const auto& q : queries) {
        out += serialize_query(q);
        out += '\n';
    }
    io::write_atomic(path, out);
}

std::vector<QueryRecord> read_queries(const std::filesystem::path& path)
{
    std::vector<QueryRecord> out;
    io::for_each_line(path, [&](std::string_view line, std::size_t) { out.push_back(parse_query(line)); });
    return out;
}

std::vector<Exemplar> read_exemplars(const std::filesystem::path& path)
{
    std::vector<Exemplar> out;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            auto j = json::parse(line);
            out.push_back({j.value("id", "ex" + std::to_string(number)), j.at("fact").get<std::string>(),
                           j.at("query").get<std::string>()});
        } catch (const json::exception& e) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace lcr
