#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace lcr;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name)
{
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig small_config(const fs::path& dir, std::uint64_t seed = 3)
{
    auto kc = KeyedConfig::parse("fixture.n_cases = 120\nfixture.rulings = 3\nfixture.short_facts = 2\n"
                                 "fixture.n_queries = 8\nfixture.pool_size = 40\nfixture.annotated = 20\n"
                                 "train.epochs = 2\nembedder.buckets = 1024\nembedder.dim = 16\n");
    kc.set("seed", std::to_string(seed));
    return PipelineConfig::from(kc, dir);
}

void run_all(const PipelineConfig& cfg, std::ostream& log)
{
    for (const char* s : {"fixtures", "ingest", "extract", "synthesize", "augment", "train", "index", "search"})
        run_stage(s, cfg, log);
}

}  // namespace

TEST_CASE("pipeline config parsing")
{
    auto kc = KeyedConfig::parse("seed = 5\naugment.p = 0.35\nloss.masking = false\nloss.temperature = 0.2\n"
                                 "search.scorer = dense\nbm25.k1 = 0.9\nsegment.max_len = 512\n"
                                 "segment.stride = 256\npaths.run = runs/a.tsv\naugment.match = shared_charge\n");
    auto cfg = PipelineConfig::from(kc, "/tmp/work");
    CHECK(cfg.seed == 5);
    CHECK(cfg.augment.proportion_augmented == doctest::Approx(0.35));
    CHECK(cfg.augment.match == MatchMode::shared_charge);
    CHECK_FALSE(cfg.schedule.loss.masking_enabled);
    CHECK(cfg.schedule.loss.temperature == doctest::Approx(0.2));
    CHECK(cfg.scorer == ScorerKind::dense);
    CHECK(cfg.bm25.k1 == doctest::Approx(0.9));
    CHECK(cfg.segments.max_len == 512);
    CHECK(cfg.segments.stride == 256);
    CHECK(cfg.paths.run == fs::path("/tmp/work/runs/a.tsv"));
    CHECK(cfg.paths.qrels == fs::path("/tmp/work/qrels.tsv"));

    // Sub-seeds fan out from the global seed.
    auto other = PipelineConfig::from(KeyedConfig::parse("seed = 6\n"), "/tmp/work");
    CHECK(other.augment.seed != cfg.augment.seed);
    CHECK(other.schedule.seed != cfg.schedule.seed);

    CHECK_THROWS_AS(PipelineConfig::from(KeyedConfig::parse("augment.match = fuzzy\n")), Error);
    CHECK_THROWS_AS(PipelineConfig::from(KeyedConfig::parse("search.scorer = tfidf\n")), Error);
    CHECK_THROWS_AS(run_stage("bogus", cfg, std::cout), Error);
    CHECK(stage_names().size() == 11);
}

TEST_CASE("sweep table lists proportion runs in order")
{
    auto report = [](double ndcg) {
        MetricsReport r;
        r.metric_names = EvalConfig{}.metric_names();
        r.macro.assign(r.metric_names.size(), ndcg);
        return r;
    };
    std::vector<std::pair<std::string, MetricsReport>> runs = {
        {"p=0.7", report(0.6)}, {"p=0.0", report(0.4)}, {"p=0.35", report(0.5)}};
    auto table = format_sweep_table(runs);
    auto a = table.find("0.0"), b = table.find("0.35"), c = table.find("0.7");
    REQUIRE(a != std::string::npos);
    REQUIRE(b != std::string::npos);
    REQUIRE(c != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(format_sweep_table({{"bm25", report(0.1)}, {"dense", report(0.2)}}).empty());
}

TEST_CASE("stages chain end to end and are reproducible")
{
    auto dir = fresh_dir("lcr_pipeline_test");
    auto cfg = small_config(dir);
    std::ostringstream log;
    run_all(cfg, log);
    run_stage("eval", cfg, log);
    for (auto p : {cfg.paths.raw, cfg.paths.corpus, cfg.paths.admitted, cfg.paths.exclusions, cfg.paths.queries,
                   cfg.paths.pairs, cfg.paths.model, cfg.paths.loss_curve, cfg.paths.index, cfg.paths.run,
                   cfg.paths.metrics})
        CHECK_MESSAGE(fs::exists(p), p.string());

    auto admitted = read_admitted(cfg.paths.admitted);
    CHECK(admitted.size() == 120);
    auto queries = read_queries(cfg.paths.queries);
    CHECK(queries.size() == 112);  // eval sources held out
    auto pairs = read_pairs(cfg.paths.pairs);
    std::size_t augmented = 0;
    for (const auto& p : pairs) augmented += p.kind == PairKind::augmented;
    CHECK(augmented == augmented_target(0.7, pairs.size()));

    auto first = io::read_file(cfg.paths.run);
    auto metrics = io::read_file(cfg.paths.metrics);
    auto second_dir = fresh_dir("lcr_pipeline_test_b");
    auto cfg2 = small_config(second_dir);
    run_all(cfg2, log);
    run_stage("eval", cfg2, log);
    CHECK(io::read_file(cfg2.paths.run) == first);
    CHECK(io::read_file(cfg2.paths.metrics) == metrics);
    CHECK(io::read_file(cfg2.paths.model) == io::read_file(cfg.paths.model));

    // Identity run: every query's pool in ideal order.
    auto qrels = read_qrels(cfg.paths.qrels);
    RankedRun ideal{"ideal", {}};
    for (const auto& [qid, pool] : qrels.queries()) {
        Ranking r;
        for (const auto& [cid, label] : pool) r.push_back({cid, double(label)});
        sort_ranking(r);
        ideal.queries[qid] = r;
    }
    PipelineConfig id_cfg = cfg;
    id_cfg.paths.run = dir / "ideal.tsv";
    id_cfg.paths.metrics = dir / "ideal.json";
    write_run(id_cfg.paths.run, ideal);
    run_stage("eval", id_cfg, log);
    auto report = evaluate_run(read_run(id_cfg.paths.run), qrels);
    CHECK(report.metric("NDCG@10") == 1.0);
    CHECK(report.metric("NDCG@30") == 1.0);

    PipelineConfig rep = cfg;
    rep.report_runs = {cfg.paths.run, id_cfg.paths.run};
    run_stage("report", rep, log);
    auto text = io::read_file(rep.paths.report);
    CHECK(text.find("ideal") != std::string::npos);

    PipelineConfig missing = cfg;
    missing.paths.admitted = dir / "nope.jsonl";
    CHECK_THROWS_AS(run_stage("augment", missing, log), Error);
}

TEST_CASE("benchmark triplets stage")
{
    auto dir = fresh_dir("lcr_pipeline_pairs");
    auto cfg = small_config(dir, 4);
    std::ostringstream log;
    for (const char* s : {"fixtures", "ingest", "extract", "pairs"}) run_stage(s, cfg, log);
    auto triplets = read_triplets(cfg.paths.triplets);
    auto qrels = read_qrels(cfg.paths.qrels);
    std::size_t positives = 0;
    for (const auto& [qid, pool] : qrels.queries())
        for (const auto& [cid, label] : pool) positives += label == 3;
    CHECK(triplets.size() == positives);

    cfg.use_triplets = true;
    run_stage("train", cfg, log);
    CHECK(fs::exists(cfg.paths.model));
}
