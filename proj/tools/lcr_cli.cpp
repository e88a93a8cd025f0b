#include "lcr/config.hpp"
#include "lcr/error.hpp"
#include "lcr/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRemote = 3;

int exit_code_for(lcr::ErrorKind kind)
{
    switch (kind) {
    case lcr::ErrorKind::usage: return kExitUsage;
    case lcr::ErrorKind::generation_failed: return kExitRemote;
    default: return kExitData;
    }
}

const char* describe(const std::string& stage)
{
    if (stage == "fixtures") return "Generate a synthetic corpus, evaluation queries, qrels and pools";
    if (stage == "ingest") return "Validate raw case records";
    if (stage == "extract") return "Extract legal elements and filter the corpus";
    if (stage == "synthesize") return "Generate and anonymize training queries";
    if (stage == "augment") return "Mix original and element-matched positive pairs";
    if (stage == "pairs") return "Build training triplets from graded judgments";
    if (stage == "train") return "Train the toy dual encoder";
    if (stage == "index") return "Build the BM25 index";
    if (stage == "search") return "Rank candidate pools for the evaluation queries";
    if (stage == "eval") return "Score one run against qrels";
    if (stage == "report") return "Compare several runs";
    return "";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Legal case retrieval data pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string work_dir = ".";
    std::vector<std::string> sets;
    std::optional<unsigned long long> seed;
    std::optional<double> proportion;
    std::optional<std::string> scorer, tag, generator;
    std::optional<std::size_t> max_in_flight;
    std::optional<int> epochs;
    bool no_mask = false;
    std::vector<std::string> runs;

    app.add_option("-c,--config", config_path, "Keyed config file (key = value)")->check(CLI::ExistingFile);
    app.add_option("-w,--work-dir", work_dir, "Directory that relative artifact paths resolve against");
    app.add_option("--set", sets, "Override a config key, e.g. --set augment.p=0.35");
    app.add_option("--seed", seed, "Global seed");
    app.add_option("--p", proportion, "Proportion of augmented pairs");
    app.add_flag("--no-mask", no_mask, "Disable false-negative masking");
    app.add_option("--scorer", scorer, "bm25 or dense");
    app.add_option("--tag", tag, "Run tag written into the run file");
    app.add_option("--generator", generator, "offline_template or remote_model");
    app.add_option("--max-in-flight", max_in_flight, "Concurrent generation requests");
    app.add_option("--epochs", epochs, "Training epochs");

    std::vector<CLI::App*> subs;
    for (const auto& name : lcr::stage_names()) {
        auto* sub = app.add_subcommand(name, describe(name));
        sub->fallthrough();
        if (name == "report") sub->add_option("--run", runs, "Run files to compare (first is the baseline)");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::string stage;
    for (auto* sub : subs) {
        if (sub->parsed()) stage = sub->get_name();
    }

    try {
        lcr::KeyedConfig kc;
        if (!config_path.empty()) kc = lcr::KeyedConfig::load(config_path);
        kc.apply_environment();
        for (const auto& s : sets) {
            auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0)
                lcr::fail(lcr::ErrorKind::usage, "--set expects key=value, got '" + s + "'");
            kc.set(s.substr(0, eq), s.substr(eq + 1));
        }
        if (seed) kc.set("seed", std::to_string(*seed));
        if (proportion) kc.set("augment.p", std::to_string(*proportion));
        if (no_mask) kc.set("loss.masking", "false");
        if (scorer) kc.set("search.scorer", *scorer);
        if (tag) kc.set("search.tag", *tag);
        if (generator) kc.set("generation.kind", *generator);
        if (max_in_flight) kc.set("generation.max_in_flight", std::to_string(*max_in_flight));
        if (epochs) kc.set("train.epochs", std::to_string(*epochs));

        auto cfg = lcr::PipelineConfig::from(kc, work_dir);
        for (const auto& r : runs) {
            std::filesystem::path p = r;
            cfg.report_runs.push_back(p.is_absolute() ? p : std::filesystem::path(work_dir) / p);
        }
        std::filesystem::create_directories(work_dir);
        lcr::run_stage(stage, cfg, std::cout);
    } catch (const lcr::Error& e) {
        std::cerr << "lcr " << stage << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "lcr " << stage << ": " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
