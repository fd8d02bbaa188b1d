// curate: command-line front end for the web-text curation pipeline.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "curate/pipeline.hpp"
#include "curate/text.hpp"

namespace fs = std::filesystem;
using namespace curate;
using pipeline::ConfigError;
using pipeline::PipelineConfig;
using pipeline::StageId;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::string input;
    std::string output_dir = "out";
    std::optional<bool> deterministic;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (comments allowed)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "url-lid, doc-filter, line-clean or flux");
    cmd->add_option("--input", o.input, "input JSONL (.gz accepted)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", o.output_dir, "directory for outputs");
    cmd->add_flag("--deterministic,!--no-deterministic", o.deterministic,
                  "order-preserving single-writer output (default on)");
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
}

PipelineConfig build_config(const CommonOptions& o) {
    std::optional<pipeline::Preset> preset;
    if (!o.preset.empty()) {
        preset = pipeline::preset_from_name(o.preset);
        if (!preset) throw ConfigError(fmt::format("unknown preset '{}'", o.preset));
    }
    PipelineConfig c = o.config_path.empty()
                           ? pipeline::load_config(Json::object(), ".", preset)
                           : pipeline::load_config_file(o.config_path, preset);
    if (o.workers) c.workers = *o.workers;
    if (o.deterministic) c.deterministic = *o.deterministic;
    return c;
}

/// Leaves only the given stages switched on.
void keep_only(PipelineConfig& c, std::initializer_list<StageId> ids) {
    pipeline::StageSet s;
    for (auto id : ids) s.set(id, true);
    c.stages = s;
}

void print_summary(const stats::RunStats& s, const std::string& out_dir) {
    std::cout << stats::render_stats_table(s);
    std::cout << fmt::format("\nwrote {}/{{kept,rejected,multilingual}}.jsonl, stats.json, stats.txt\n", out_dir);
}

std::vector<Json> read_json_lines(const std::string& path) {
    auto in = open_input(path);
    std::vector<Json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(*in, line)) {
        ++n;
        if (text::is_blank(line)) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            spdlog::warn("{}:{}: not a JSON object, skipped", path, n);
            continue;
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string text_of(const Json& j) {
    auto it = j.find("text");
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("curate"));
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

    CLI::App app{"Web-text curation pipeline: URL filtering, language routing, quality gates, "
                 "line cleaning, Bloom-filter dedup, quality classification and decontamination"};
    app.require_subcommand(1);
    app.fallthrough();
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "warnings and errors only");

    // run
    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "run the configured pipeline end to end");
    add_common(run, run_opts);

    // filter: document and line stages only
    CommonOptions filter_opts;
    auto* filter = app.add_subcommand("filter", "run URL, language, quality and line stages without dedup or gate");
    add_common(filter, filter_opts);

    // dedup
    CommonOptions dedup_opts;
    double fp_rate = 1e-3;
    double expected_ngrams = 0.0;
    std::size_t ngram_size = 13;
    std::string mode = "oldboth";
    auto* dedup = app.add_subcommand("dedup", "Bloom-filter paragraph dedup with document fallback");
    add_common(dedup, dedup_opts);
    dedup->add_option("--fp-rate", fp_rate, "target false-positive rate")->check(CLI::Range(1e-12, 0.999999));
    dedup->add_option("--expected-ngrams", expected_ngrams, "expected shingle count (0 sizes from input bytes)");
    dedup->add_option("--ngram-size", ngram_size, "words per shingle")->check(CLI::PositiveNumber);
    dedup->add_option("--mode", mode, "dedup mode")->check(CLI::IsMember({"oldboth"}));

    // classify
    CommonOptions classify_opts;
    std::string scorer_dclm, scorer_betr;
    std::optional<double> tau_dclm, tau_betr;
    auto* classify = app.add_subcommand("classify", "dual-bin quality gate over two scorers");
    add_common(classify, classify_opts);
    classify->add_option("--scorer-dclm", scorer_dclm, "model file, model:PATH or field:NAME");
    classify->add_option("--scorer-betr", scorer_betr, "model file, model:PATH or field:NAME");
    classify->add_option("--tau-dclm", tau_dclm, "general-quality bin threshold");
    classify->add_option("--tau-betr", tau_betr, "benchmark-proximity bin threshold");

    // decontam
    CommonOptions decontam_opts;
    std::string reference;
    std::optional<std::size_t> decontam_n, min_matches;
    auto* decontam_cmd = app.add_subcommand("decontam", "flag documents overlapping benchmark items");
    add_common(decontam_cmd, decontam_opts);
    decontam_cmd->add_option("--reference", reference, "benchmark items JSONL")->check(CLI::ExistingFile);
    decontam_cmd->add_option("--ngram-size", decontam_n, "words per n-gram");
    decontam_cmd->add_option("--min-matches", min_matches, "distinct n-gram hits needed to flag");

    // stats
    std::vector<std::string> stats_inputs;
    std::string stats_out;
    auto* stats_cmd = app.add_subcommand("stats", "merge stats.json files and print the per-filter table");
    stats_cmd->add_option("inputs", stats_inputs, "stats.json files from runs over disjoint shards")
        ->required()
        ->check(CLI::ExistingFile);
    stats_cmd->add_option("--json", stats_out, "write the merged stats JSON here");

    // sweep
    std::string sweep_input;
    std::vector<std::string> pair_specs;
    std::string sweep_json;
    auto* sweep_cmd = app.add_subcommand("sweep", "retention over (tau_dclm, tau_betr) pairs from a scores file");
    sweep_cmd->add_option("--input", sweep_input, "scores.jsonl written by classify or run")
        ->required()
        ->check(CLI::ExistingFile);
    sweep_cmd->add_option("--pair", pair_specs, "threshold pair DCLM,BETR (repeatable)");
    sweep_cmd->add_option("--json", sweep_json, "write the sweep as JSON here");
    std::string sweep_config;
    sweep_cmd->add_option("--config", sweep_config, "take sweep_pairs from this config")->check(CLI::ExistingFile);

    // train
    std::string train_input, model_out;
    qualitygate::TrainConfig train_cfg;
    std::size_t bucket_bits = 21;
    bool no_bigrams = false;
    auto* train = app.add_subcommand("train", "train the hashed n-gram classifier on {text, label} JSONL");
    train->add_option("--input", train_input, "labelled JSONL")->required()->check(CLI::ExistingFile);
    train->add_option("--model", model_out, "output model path")->required();
    train->add_option("--epochs", train_cfg.epochs, "training epochs");
    train->add_option("--lr", train_cfg.learning_rate, "learning rate");
    train->add_option("--seed", train_cfg.seed, "shuffle and hashing seed");
    train->add_option("--bucket-bits", bucket_bits, "log2 of the hashed feature space")->check(CLI::Range(8, 26));
    train->add_flag("--no-bigrams", no_bigrams, "unigram features only");

    // betr-trainset
    std::string betr_input, betr_examples, betr_out;
    std::size_t betr_target = 10000;
    std::uint64_t betr_seed = 42;
    double betr_top = 0.10;
    std::size_t betr_dims = 512;
    auto* betr = app.add_subcommand("betr-trainset",
                                    "score a corpus against benchmark examples and emit a balanced training set");
    betr->add_option("--input", betr_input, "corpus JSONL")->required()->check(CLI::ExistingFile);
    betr->add_option("--examples", betr_examples, "benchmark examples JSONL")->required()->check(CLI::ExistingFile);
    betr->add_option("--output", betr_out, "labelled JSONL to write")->required();
    betr->add_option("--target", betr_target, "training set size");
    betr->add_option("--seed", betr_seed, "negative sampling seed");
    betr->add_option("--top-fraction", betr_top, "share of the ranking treated as positive")
        ->check(CLI::Range(1e-9, 1.0));
    betr->add_option("--dims", betr_dims, "hashed embedding dimensions")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    if (verbose) spdlog::set_level(spdlog::level::debug);
    if (quiet) spdlog::set_level(spdlog::level::warn);

    try {
        if (*run) {
            auto c = build_config(run_opts);
            print_summary(pipeline::run_files(c, run_opts.input, run_opts.output_dir), run_opts.output_dir);
        } else if (*filter) {
            auto c = build_config(filter_opts);
            c.stages.set(StageId::dedup, false);
            c.stages.set(StageId::quality_gate, false);
            print_summary(pipeline::run_files(c, filter_opts.input, filter_opts.output_dir), filter_opts.output_dir);
        } else if (*dedup) {
            auto c = build_config(dedup_opts);
            keep_only(c, {StageId::dedup});
            if (dedup->count("--fp-rate")) c.dedup_fp_rate = fp_rate;
            if (dedup->count("--expected-ngrams")) c.dedup_expected_ngrams = expected_ngrams;
            if (dedup->count("--ngram-size")) c.shingle.ngram_size = ngram_size;
            auto s = pipeline::run_files(c, dedup_opts.input, dedup_opts.output_dir);
            print_summary(s, dedup_opts.output_dir);
        } else if (*classify) {
            auto c = build_config(classify_opts);
            if (!scorer_dclm.empty()) c.scorer_dclm = pipeline::scorer_from_spec(scorer_dclm);
            if (!scorer_betr.empty()) c.scorer_betr = pipeline::scorer_from_spec(scorer_betr);
            if (tau_dclm) c.gate.tau_dclm = *tau_dclm;
            if (tau_betr) c.gate.tau_betr = *tau_betr;
            keep_only(c, {StageId::quality_gate});
            auto s = pipeline::run_files(c, classify_opts.input, classify_opts.output_dir);
            print_summary(s, classify_opts.output_dir);
        } else if (*decontam_cmd) {
            auto c = build_config(decontam_opts);
            if (!reference.empty()) {
                decontam::DecontamConfig dc = c.reference ? c.reference->config() : decontam::DecontamConfig{};
                if (decontam_n) dc.ngram_size = *decontam_n;
                if (min_matches) dc.min_matches = *min_matches;
                c.reference =
                    std::make_shared<decontam::ReferenceSet>(decontam::load_benchmark_items(reference), dc);
            }
            if (!c.reference) throw ConfigError("decontam needs --reference or decontam.reference_path in the config");
            keep_only(c, {StageId::decontamination});
            auto s = pipeline::run_files(c, decontam_opts.input, decontam_opts.output_dir);
            print_summary(s, decontam_opts.output_dir);
            std::ifstream rep(fs::path(decontam_opts.output_dir) / "decontamination.txt");
            std::cout << '\n' << rep.rdbuf();
        } else if (*stats_cmd) {
            std::optional<stats::RunStats> merged;
            for (const auto& p : stats_inputs) {
                std::ifstream in(p);
                auto s = stats::RunStats::from_json(Json::parse(in));
                if (merged) {
                    merged->merge(s);
                } else {
                    merged = std::move(s);
                }
            }
            std::cout << stats::render_stats_table(*merged);
            if (!stats_out.empty()) {
                std::ofstream out(stats_out);
                out << merged->to_json().dump(2) << '\n';
            }
        } else if (*sweep_cmd) {
            std::vector<qualitygate::BinThresholds> pairs;
            for (const auto& spec : pair_specs) {
                auto comma = spec.find(',');
                if (comma == std::string::npos) throw ConfigError(fmt::format("--pair expects A,B, got '{}'", spec));
                try {
                    pairs.push_back({std::stod(spec.substr(0, comma)), std::stod(spec.substr(comma + 1))});
                } catch (const std::exception&) {
                    throw ConfigError(fmt::format("--pair expects two numbers, got '{}'", spec));
                }
            }
            if (pairs.empty()) {
                pairs = sweep_config.empty() ? qualitygate::default_sweep_pairs()
                                             : pipeline::load_config_file(sweep_config).sweep_pairs;
            }
            std::vector<qualitygate::ScoredDocument> docs;
            for (const auto& j : read_json_lines(sweep_input)) {
                qualitygate::ScoredDocument d;
                d.s_dclm = j.value("s_dclm", 0.0);
                d.s_betr = j.value("s_betr", 0.0);
                d.tokens = j.contains("tokens") ? j["tokens"].get<std::size_t>() : count_words(text_of(j));
                docs.push_back(d);
            }
            auto points = qualitygate::sweep(docs, pairs);
            std::cout << qualitygate::render_sweep_table(points);
            if (!sweep_json.empty()) {
                std::ofstream out(sweep_json);
                out << qualitygate::sweep_to_json(points).dump(2) << '\n';
            }
        } else if (*train) {
            std::vector<qualitygate::LabeledText> data;
            for (const auto& j : read_json_lines(train_input)) {
                if (!j.contains("label")) continue;
                const auto& l = j["label"];
                int label = l.is_number() ? (l.get<double>() > 0.5 ? 1 : 0)
                                          : (l.is_boolean() ? int(l.get<bool>())
                                                            : int(l.is_string() && (l == "1" || l == "positive" ||
                                                                                    l == "__label__hq")));
                data.push_back({text_of(j), label});
            }
            train_cfg.buckets = 1u << bucket_bits;
            train_cfg.bigrams = !no_bigrams;
            auto model = qualitygate::NgramModel::train(data, train_cfg);
            model.save(model_out);
            spdlog::info("trained on {} examples; model written to {}", data.size(), model_out);
        } else if (*betr) {
            qualitygate::HashedBagEmbedder embedder(betr_dims);
            std::vector<qualitygate::Embedding> examples;
            for (const auto& item : decontam::load_benchmark_items(betr_examples)) {
                examples.push_back(embedder.embed(item.text));
            }
            auto corpus = read_json_lines(betr_input);
            std::vector<std::string> ids;
            std::vector<qualitygate::Embedding> docs;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                auto id = corpus[i].find("id");
                ids.push_back(id != corpus[i].end() && id->is_string() ? id->get<std::string>()
                                                                       : fmt::format("{}", i + 1));
                docs.push_back(embedder.embed(text_of(corpus[i])));
            }
            auto scores = qualitygate::betr_score_corpus(ids, docs, examples);
            auto set = qualitygate::build_betr_training_set(scores, betr_target, betr_seed, betr_top);
            std::ofstream out(betr_out);
            if (!out) throw IoError(fmt::format("cannot write {}", betr_out), 0);
            auto emit = [&](std::size_t i, int label) {
                Json j;
                j["id"] = ids[i];
                j["text"] = text_of(corpus[i]);
                j["label"] = label;
                j["betr_score"] = scores[i].max_cosine;
                out << j.dump() << '\n';
            };
            for (auto i : set.positives) emit(i, 1);
            for (auto i : set.negatives) emit(i, 0);
            spdlog::info("{} positives, {} negatives written to {}", set.positives.size(), set.negatives.size(),
                         betr_out);
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const dedup::MemoryCapExceeded& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
