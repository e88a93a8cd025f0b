#include "lcr/pipeline.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>

namespace lcr {

namespace {

std::filesystem::path resolve(const KeyedConfig& cfg, const std::string& key, const std::filesystem::path& fallback,
                              const std::filesystem::path& work_dir)
{
    std::filesystem::path p = cfg.get_string(key, fallback.string());
    if (p.empty() || p.is_absolute()) return p;
    return work_dir / p;
}

std::size_t get_size(const KeyedConfig& cfg, const std::string& key, std::size_t fallback)
{
    auto v = cfg.get_int(key, static_cast<long long>(fallback));
    if (v < 0) fail(ErrorKind::usage, key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const KeyedConfig& cfg, const std::string& key, std::uint64_t global)
{
    if (auto v = cfg.get(key)) {
        try {
            return std::stoull(*v);
        } catch (const std::exception&) {
            fail(ErrorKind::usage, key + ": not an unsigned integer: " + *v);
        }
    }
    return text::derive_seed(global, key);
}

MatchMode parse_match(const std::string& s)
{
    if (s == "exact") return MatchMode::exact_main_articles;
    if (s == "shared_charge") return MatchMode::shared_charge;
    fail(ErrorKind::usage, "augment.match must be exact or shared_charge, got " + s);
}

TieBreak parse_tie_break(const std::string& s)
{
    if (s == "smallest_id") return TieBreak::smallest_case_id;
    if (s == "seeded") return TieBreak::seeded;
    fail(ErrorKind::usage, "augment.tie_break must be smallest_id or seeded, got " + s);
}

MaskRule parse_mask_rule(const std::string& s)
{
    if (s == "overlap") return MaskRule::overlap;
    if (s == "exact_set") return MaskRule::exact_set;
    fail(ErrorKind::usage, "loss.mask_rule must be overlap or exact_set, got " + s);
}

Gain parse_gain(const std::string& s)
{
    if (s == "linear") return Gain::linear;
    if (s == "exponential") return Gain::exponential;
    fail(ErrorKind::usage, "eval.gain must be linear or exponential, got " + s);
}

void require_file(const std::filesystem::path& p, const char* what)
{
    if (p.empty()) fail(ErrorKind::usage, std::string(what) + " path is not configured");
    if (!std::filesystem::exists(p)) fail(ErrorKind::io, std::string(what) + " not found: " + p.string());
}

const QueryRecord* find_query(const std::map<std::string, const QueryRecord*>& by_id, const std::string& id)
{
    auto it = by_id.find(id);
    if (it == by_id.end()) fail(ErrorKind::unknown_doc, "unknown query " + id);
    return it->second;
}

const AdmittedCase* find_case(const std::map<std::string, const AdmittedCase*>& corpus, const std::string& id)
{
    auto it = corpus.find(id);
    if (it == corpus.end()) fail(ErrorKind::unknown_doc, "unknown case " + id);
    return it->second;
}

ArticleSplitRule split_rule(const PipelineConfig& cfg)
{
    if (!cfg.paths.article_table.empty()) return ArticleSplitRule::load_table(cfg.paths.article_table);
    return {};
}

std::map<std::string, std::vector<std::string>> pools_if_present(const std::filesystem::path& p)
{
    if (!p.empty() && std::filesystem::exists(p)) return read_pools(p);
    return {};
}

// --- stages ---------------------------------------------------------------

void stage_fixtures(const PipelineConfig& cfg, std::ostream& log)
{
    auto corpus = testkit::generate_corpus(cfg.synthetic);
    auto fx = testkit::generate_qrels(corpus, text::derive_seed(cfg.seed, "fixture.qrels"), cfg.fixture);
    write_corpus(cfg.paths.raw, corpus.docs);
    write_queries(cfg.paths.eval_queries, fx.queries);
    write_qrels(cfg.paths.qrels, fx.qrels);
    write_pools(cfg.paths.pools, fx.pools);
    log << "fixtures: " << corpus.docs.size() << " records, " << fx.queries.size() << " evaluation queries\n";
}

void stage_ingest(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.raw, "raw corpus");
    auto in = read_raw_corpus(cfg.paths.raw);
    write_corpus(cfg.paths.corpus, in.docs);
    write_exclusions(cfg.paths.exclusions, in.rejected);
    log << "ingest: " << in.docs.size() << " records, " << in.rejected.size() << " rejected\n";
}

void stage_extract(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.corpus, "corpus");
    auto docs = read_corpus(cfg.paths.corpus);
    auto result = filter_corpus(docs, cfg.filter, split_rule(cfg));
    // Keep rejections from ingest in the log.
    std::vector<Exclusion> log_rows;
    if (std::filesystem::exists(cfg.paths.exclusions)) {
        io::for_each_line(cfg.paths.exclusions, [&](std::string_view line, std::size_t) {
            auto f = io::split_tsv(line);
            if (f.size() == 2 && (f[1] == "MISSING_FIELD" || f[1] == "MALFORMED"))
                log_rows.push_back({f[0], f[1] == "MALFORMED" ? ExclusionReason::malformed : ExclusionReason::missing_field});
        });
    }
    log_rows.insert(log_rows.end(), result.excluded.begin(), result.excluded.end());
    write_admitted(cfg.paths.admitted, result.admitted);
    write_exclusions(cfg.paths.exclusions, log_rows);
    log << "extract: " << result.admitted.size() << " admitted, " << result.excluded.size() << " excluded\n";
}

void stage_synthesize(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.admitted, "admitted corpus");
    auto admitted = read_admitted(cfg.paths.admitted);

    // Evaluation query sources never become training queries.
    std::set<std::string> held_out;
    if (!cfg.paths.eval_queries.empty() && std::filesystem::exists(cfg.paths.eval_queries)) {
        for (const auto& q : read_queries(cfg.paths.eval_queries)) held_out.insert(q.source_case_id);
    }
    std::vector<CaseDocument> docs;
    for (const auto& c : admitted) {
        if (!held_out.count(c.doc.case_id)) docs.push_back(c.doc);
    }

    auto tpl = PromptTemplate::standard();
    if (!cfg.paths.exemplars.empty()) tpl.exemplars = read_exemplars(cfg.paths.exemplars);

    std::unique_ptr<GenerationClient> client;
    if (cfg.generator == GeneratorKind::remote_model) {
        client = std::make_unique<ChatHttpClient>(cfg.client);
    } else {
        client = std::make_unique<OfflineTemplateClient>();
    }
    DictionaryTagger tagger;
    Anonymizer anon;
    if (cfg.anonymize) anon = {&tagger, &Lexicon::surrogates()};

    auto queries = generate_queries(docs, *client, tpl, text::derive_seed(cfg.seed, "synthesize"), cfg.generation, anon,
                                    std::max<std::size_t>(1, cfg.max_in_flight));
    std::size_t truncated = 0;
    for (const auto& q : queries) truncated += q.truncated ? 1 : 0;
    write_queries(cfg.paths.queries, queries);
    log << "synthesize: " << queries.size() << " queries (" << truncated << " truncated, " << held_out.size()
        << " held out)\n";
}

void stage_augment(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.admitted, "admitted corpus");
    require_file(cfg.paths.queries, "queries");
    auto admitted = read_admitted(cfg.paths.admitted);
    auto queries = read_queries(cfg.paths.queries);
    auto index = ElementIndex::build(admitted);
    auto pairs = mix_pairs(queries, index, cfg.augment);
    std::size_t augmented = 0, fallback = 0;
    for (const auto& p : pairs) {
        augmented += p.kind == PairKind::augmented ? 1 : 0;
        fallback += p.fallback ? 1 : 0;
    }
    write_pairs(cfg.paths.pairs, pairs);
    log << "augment: " << pairs.size() << " pairs, " << augmented << " augmented, " << fallback << " without match\n";
}

void stage_pairs(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.eval_queries, "evaluation queries");
    require_file(cfg.paths.qrels, "qrels");
    auto result = triplets_from_qrels(read_queries(cfg.paths.eval_queries), read_qrels(cfg.paths.qrels),
                                      pools_if_present(cfg.paths.pools), text::derive_seed(cfg.seed, "pairs"));
    write_triplets(cfg.paths.triplets, result.triplets);
    log << "pairs: " << result.triplets.size() << " triplets";
    if (!result.no_positives.empty()) log << ", " << result.no_positives.size() << " queries without positives";
    if (!result.short_negatives.empty()) log << ", " << result.short_negatives.size() << " short of negatives";
    log << "\n";
}

void stage_train(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.admitted, "admitted corpus");
    auto admitted = read_admitted(cfg.paths.admitted);
    auto corpus = index_by_id(admitted);

    std::vector<TrainingExample> examples;
    if (cfg.use_triplets) {
        require_file(cfg.paths.triplets, "triplets");
        examples = examples_from_triplets(read_triplets(cfg.paths.triplets), read_queries(cfg.paths.eval_queries), corpus);
    } else {
        require_file(cfg.paths.pairs, "pairs");
        examples = examples_from_pairs(read_pairs(cfg.paths.pairs), read_queries(cfg.paths.queries), corpus);
    }
    ToyEmbedder model(cfg.embedder);
    auto result = train_toy(examples, model, cfg.schedule);
    model.save(cfg.paths.model);
    write_loss_curve(cfg.paths.loss_curve, result.loss_curve);
    char buf[128];
    std::snprintf(buf, sizeof buf, "train: %zu examples, %d epochs, final loss %.4f\n", examples.size(),
                  result.epochs_run, result.loss_curve.empty() ? 0.0 : result.loss_curve.back());
    log << buf;
}

void stage_index(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.admitted, "admitted corpus");
    auto docs = retrieval_documents(read_admitted(cfg.paths.admitted));
    auto index = Bm25Index::build(docs, cfg.tokenizer);
    index.save(cfg.paths.index);
    log << "index: " << index.size() << " documents\n";
}

void stage_search(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.admitted, "admitted corpus");
    require_file(cfg.paths.eval_queries, "evaluation queries");
    auto docs = retrieval_documents(read_admitted(cfg.paths.admitted));
    auto queries = read_queries(cfg.paths.eval_queries);
    auto pools = pools_if_present(cfg.paths.pools);

    Retriever retriever(docs);
    std::optional<ToyEmbedder> model;
    if (cfg.scorer == ScorerKind::bm25) {
        if (std::filesystem::exists(cfg.paths.index)) {
            retriever.enable_bm25(Bm25Index::load(cfg.paths.index), cfg.bm25);
        } else {
            retriever.enable_bm25(cfg.bm25, cfg.tokenizer);
        }
    } else {
        // Without a checkpoint the untrained initialization is scored.
        model = std::filesystem::exists(cfg.paths.model) ? ToyEmbedder::load(cfg.paths.model) : ToyEmbedder(cfg.embedder);
        retriever.enable_dense(*model, cfg.segments);
    }
    std::string tag = cfg.run_tag.empty() ? to_string(cfg.scorer) : cfg.run_tag;
    auto run = search_all(retriever, queries, pools, cfg.scorer, cfg.top_k, tag);
    write_run(cfg.paths.run, run);
    log << "search: " << run.queries.size() << " queries ranked with " << to_string(cfg.scorer) << "\n";
}

void stage_eval(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.run, "run");
    require_file(cfg.paths.qrels, "qrels");
    auto run = read_run(cfg.paths.run);
    auto report = evaluate_run(run, read_qrels(cfg.paths.qrels), cfg.eval);
    std::vector<std::pair<std::string, MetricsReport>> rows{{run.tag, report}};
    io::write_atomic(cfg.paths.metrics, report_to_json(rows));
    log << format_report_table(rows);
}

void stage_report(const PipelineConfig& cfg, std::ostream& log)
{
    require_file(cfg.paths.qrels, "qrels");
    auto qrels = read_qrels(cfg.paths.qrels);
    auto runs = cfg.report_runs;
    if (runs.empty()) runs.push_back(cfg.paths.run);
    std::vector<std::pair<std::string, MetricsReport>> rows;
    for (const auto& p : runs) {
        require_file(p, "run");
        auto run = read_run(p);
        rows.emplace_back(run.tag.empty() ? p.stem().string() : run.tag, evaluate_run(run, qrels, cfg.eval));
    }
    std::string out = format_report_table(rows);
    auto sweep = format_sweep_table(rows);
    if (!sweep.empty()) out += "\n" + sweep;
    io::write_atomic(cfg.paths.report, out);
    log << out;
}

}  // namespace

PipelineConfig PipelineConfig::from(const KeyedConfig& kc, const std::filesystem::path& work_dir)
{
    PipelineConfig c;
    auto& p = c.paths;
    p.raw = resolve(kc, "paths.raw", p.raw, work_dir);
    p.corpus = resolve(kc, "paths.corpus", p.corpus, work_dir);
    p.admitted = resolve(kc, "paths.admitted", p.admitted, work_dir);
    p.exclusions = resolve(kc, "paths.exclusions", p.exclusions, work_dir);
    p.queries = resolve(kc, "paths.queries", p.queries, work_dir);
    p.eval_queries = resolve(kc, "paths.eval_queries", p.eval_queries, work_dir);
    p.pairs = resolve(kc, "paths.pairs", p.pairs, work_dir);
    p.triplets = resolve(kc, "paths.triplets", p.triplets, work_dir);
    p.model = resolve(kc, "paths.model", p.model, work_dir);
    p.loss_curve = resolve(kc, "paths.loss_curve", p.loss_curve, work_dir);
    p.index = resolve(kc, "paths.index", p.index, work_dir);
    p.run = resolve(kc, "paths.run", p.run, work_dir);
    p.qrels = resolve(kc, "paths.qrels", p.qrels, work_dir);
    p.pools = resolve(kc, "paths.pools", p.pools, work_dir);
    p.metrics = resolve(kc, "paths.metrics", p.metrics, work_dir);
    p.report = resolve(kc, "paths.report", p.report, work_dir);
    p.exemplars = resolve(kc, "paths.exemplars", p.exemplars, work_dir);
    p.article_table = resolve(kc, "paths.article_table", p.article_table, work_dir);

    c.seed = static_cast<std::uint64_t>(kc.get_int("seed", 0));

    c.filter.min_fact_chars = get_size(kc, "filter.min_fact_chars", c.filter.min_fact_chars);

    c.generator = parse_generator_kind(kc.get_string("generation.kind", to_string(c.generator)));
    c.generation.max_query_chars = get_size(kc, "generation.max_query_chars", c.generation.max_query_chars);
    c.generation.max_attempts = static_cast<int>(kc.get_int("generation.max_attempts", c.generation.max_attempts));
    c.generation.strict_length = kc.get_bool("generation.strict_length", c.generation.strict_length);
    c.max_in_flight = get_size(kc, "generation.max_in_flight", c.max_in_flight);
    c.anonymize = kc.get_bool("generation.anonymize", c.anonymize);
    c.client.endpoint = kc.get_string("client.endpoint", c.client.endpoint);
    c.client.model = kc.get_string("client.model", c.client.model);
    c.client.api_key = kc.get_string("client.api_key", c.client.api_key);
    c.client.timeout = std::chrono::milliseconds(kc.get_int("client.timeout_ms", c.client.timeout.count()));
    c.client.max_attempts = static_cast<int>(kc.get_int("client.max_attempts", c.client.max_attempts));
    c.client.initial_backoff =
        std::chrono::milliseconds(kc.get_int("client.backoff_ms", c.client.initial_backoff.count()));
    c.client.temperature = kc.get_double("client.temperature", c.client.temperature);

    c.augment.proportion_augmented = kc.get_double("augment.p", c.augment.proportion_augmented);
    c.augment.weight_ancillary = kc.get_double("augment.w_anc", c.augment.weight_ancillary);
    c.augment.weight_term = kc.get_double("augment.w_term", c.augment.weight_term);
    c.augment.match = parse_match(kc.get_string("augment.match", "exact"));
    c.augment.tie_break = parse_tie_break(kc.get_string("augment.tie_break", "smallest_id"));
    c.augment.seed = get_seed(kc, "augment.seed", c.seed);
    c.augment.validate();

    auto& s = c.schedule;
    s.epochs = static_cast<int>(kc.get_int("train.epochs", s.epochs));
    s.batch_size = get_size(kc, "train.batch_size", s.batch_size);
    s.learning_rate = kc.get_double("train.lr", s.learning_rate);
    s.warmup_fraction = kc.get_double("train.warmup", s.warmup_fraction);
    s.patience = static_cast<int>(kc.get_int("train.patience", s.patience));
    s.max_input_chars = get_size(kc, "train.max_input_chars", s.max_input_chars);
    s.seed = get_seed(kc, "train.seed", c.seed);
    s.loss.temperature = kc.get_double("loss.temperature", s.loss.temperature);
    s.loss.masking_enabled = kc.get_bool("loss.masking", s.loss.masking_enabled);
    s.loss.mask_rule = parse_mask_rule(kc.get_string("loss.mask_rule", "overlap"));
    c.use_triplets = kc.get_bool("train.use_triplets", c.use_triplets);

    c.embedder.dim = static_cast<Eigen::Index>(kc.get_int("embedder.dim", c.embedder.dim));
    c.embedder.buckets = static_cast<Eigen::Index>(kc.get_int("embedder.buckets", c.embedder.buckets));
    c.embedder.ngram_min = static_cast<int>(kc.get_int("embedder.ngram_min", c.embedder.ngram_min));
    c.embedder.ngram_max = static_cast<int>(kc.get_int("embedder.ngram_max", c.embedder.ngram_max));
    c.embedder.seed = get_seed(kc, "embedder.seed", c.seed);

    c.segments.max_len = get_size(kc, "segment.max_len", c.segments.max_len);
    c.segments.stride = get_size(kc, "segment.stride", c.segments.stride);
    c.segments.validate();
    c.bm25.k1 = kc.get_double("bm25.k1", c.bm25.k1);
    c.bm25.b = kc.get_double("bm25.b", c.bm25.b);
    c.bm25.validate();
    c.tokenizer = parse_tokenizer_kind(kc.get_string("bm25.tokenizer", to_string(c.tokenizer)));
    c.scorer = parse_scorer_kind(kc.get_string("search.scorer", to_string(c.scorer)));
    c.top_k = get_size(kc, "search.top_k", c.top_k);
    c.run_tag = kc.get_string("search.tag", "");

    c.eval.gain = parse_gain(kc.get_string("eval.gain", "linear"));
    c.eval.strict = kc.get_bool("eval.strict", c.eval.strict);

    auto& sy = c.synthetic;
    sy.n_cases = get_size(kc, "fixture.n_cases", sy.n_cases);
    sy.charge_count = get_size(kc, "fixture.charges", sy.charge_count);
    sy.articles_per_charge = get_size(kc, "fixture.articles_per_charge", sy.articles_per_charge);
    sy.severity_levels = get_size(kc, "fixture.severity_levels", sy.severity_levels);
    sy.n_rulings = get_size(kc, "fixture.rulings", sy.n_rulings);
    sy.n_short_facts = get_size(kc, "fixture.short_facts", sy.n_short_facts);
    sy.seed = get_seed(kc, "fixture.seed", c.seed);
    c.fixture.n_queries = get_size(kc, "fixture.n_queries", c.fixture.n_queries);
    c.fixture.pool_size = get_size(kc, "fixture.pool_size", c.fixture.pool_size);
    c.fixture.annotated = get_size(kc, "fixture.annotated", c.fixture.annotated);
    return c;
}

const std::vector<std::string>& stage_names()
{
    static const std::vector<std::string> names = {"ingest", "extract", "synthesize", "augment", "pairs",   "train",
                                                   "index",  "search",  "eval",       "report",  "fixtures"};
    return names;
}

void run_stage(const std::string& name, const PipelineConfig& cfg, std::ostream& log)
{
    if (name == "fixtures") return stage_fixtures(cfg, log);
    if (name == "ingest") return stage_ingest(cfg, log);
    if (name == "extract") return stage_extract(cfg, log);
    if (name == "synthesize") return stage_synthesize(cfg, log);
    if (name == "augment") return stage_augment(cfg, log);
    if (name == "pairs") return stage_pairs(cfg, log);
    if (name == "train") return stage_train(cfg, log);
    if (name == "index") return stage_index(cfg, log);
    if (name == "search") return stage_search(cfg, log);
    if (name == "eval") return stage_eval(cfg, log);
    if (name == "report") return stage_report(cfg, log);
    fail(ErrorKind::usage, "unknown subcommand: " + name);
}

std::map<std::string, const AdmittedCase*> index_by_id(const std::vector<AdmittedCase>& corpus)
{
    std::map<std::string, const AdmittedCase*> out;
    for (const auto& c : corpus) out.emplace(c.doc.case_id, &c);
    return out;
}

std::vector<TrainingExample> examples_from_pairs(const std::vector<TrainingPair>& pairs,
                                                 const std::vector<QueryRecord>& queries,
                                                 const std::map<std::string, const AdmittedCase*>& corpus)
{
    std::map<std::string, const QueryRecord*> by_id;
    for (const auto& q : queries) by_id.emplace(q.query_id, &q);
    std::vector<TrainingExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        const auto* pos = find_case(corpus, p.positive_case_id);
        TrainingExample ex;
        ex.query = find_query(by_id, p.query_id)->text;
        ex.positive = pos->doc.full_text();
        ex.positive_charges = p.positive_charges.empty() ? pos->elements.charges : p.positive_charges;
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<TrainingExample> examples_from_triplets(const std::vector<Triplet>& triplets,
                                                    const std::vector<QueryRecord>& queries,
                                                    const std::map<std::string, const AdmittedCase*>& corpus)
{
    std::map<std::string, const QueryRecord*> by_id;
    for (const auto& q : queries) by_id.emplace(q.query_id, &q);
    std::vector<TrainingExample> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) {
        const auto* pos = find_case(corpus, t.positive_case_id);
        const auto* neg = find_case(corpus, t.negative_case_id);
        out.push_back({find_query(by_id, t.query_id)->text, pos->doc.full_text(), pos->elements.charges,
                       neg->doc.full_text(), neg->elements.charges});
    }
    return out;
}

std::vector<Bm25Index::Document> retrieval_documents(const std::vector<AdmittedCase>& corpus)
{
    std::vector<Bm25Index::Document> docs;
    docs.reserve(corpus.size());
    for (const auto& c : corpus) docs.push_back({c.doc.case_id, c.doc.full_text()});
    return docs;
}

RankedRun search_all(const Retriever& retriever, const std::vector<QueryRecord>& queries,
                     const std::map<std::string, std::vector<std::string>>& pools, ScorerKind scorer,
                     std::size_t top_k, const std::string& tag)
{
    RankedRun run;
    run.tag = tag;
    for (const auto& q : queries) {
        auto it = pools.find(q.query_id);
        std::span<const std::string> pool;
        if (it != pools.end()) pool = it->second;
        run.queries[q.query_id] = retriever.search(q.text, scorer, top_k, pool);
    }
    return run;
}

std::string format_sweep_table(const std::vector<std::pair<std::string, MetricsReport>>& runs)
{
    std::vector<std::pair<double, const MetricsReport*>> points;
    for (const auto& [label, report] : runs) {
        auto pos = label.find("p=");
        if (pos == std::string::npos) continue;
        try {
            points.emplace_back(std::stod(label.substr(pos + 2)), &report);
        } catch (const std::exception&) {
        }
    }
    if (points.size() < 2) return {};
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ostringstream out;
    out << "proportion sweep\n";
    char buf[64];
    out << "p       ";
    for (const auto& n : points.front().second->metric_names) {
        std::snprintf(buf, sizeof buf, "%-10s", n.c_str());
        out << buf;
    }
    out << "\n";
    for (const auto& [p, report] : points) {
        std::snprintf(buf, sizeof buf, "%-8.2f", p);
        out << buf;
        for (double v : report->macro) {
            std::snprintf(buf, sizeof buf, "%-10.1f", 100.0 * v);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace lcr
