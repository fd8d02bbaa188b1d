#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "curate/pipeline.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::pipeline;

namespace {

struct RunOutput {
    std::string kept, rejected, multilingual, scores;
    stats::RunStats stats;
};

RunOutput run(PipelineConfig cfg, const std::string& input) {
    std::istringstream in(input);
    std::ostringstream kept, rejected, multi, scores;
    Pipeline p(std::move(cfg));
    RunOutput out;
    out.stats = p.run(in, {&kept, &rejected, &multi, &scores}, input.size());
    out.kept = kept.str();
    out.rejected = rejected.str();
    out.multilingual = multi.str();
    out.scores = scores.str();
    return out;
}

/// id -> "stage/criterion" for rejected documents.
std::map<std::string, std::string> rejections(const std::string& jsonl) {
    std::map<std::string, std::string> out;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        auto j = Json::parse(line);
        out[j["id"].get<std::string>()] =
            j["rejected_by"]["stage"].get<std::string>() + "/" + j["rejected_by"]["criterion"].get<std::string>();
    }
    return out;
}

std::set<std::string> ids(const std::string& jsonl) {
    std::set<std::string> out;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) out.insert(Json::parse(line)["id"].get<std::string>());
    return out;
}

std::set<std::string> row_names(const stats::RunStats& s) {
    std::set<std::string> out;
    for (const auto& st : s.stages) out.insert(st.name);
    return out;
}

std::string record(const std::string& id, const std::string& url, const std::string& text) {
    Json j;
    j["id"] = id;
    j["url"] = url;
    j["text"] = text;
    return j.dump() + "\n";
}

const std::set<std::string> kUrlLid = {"ut1_blocklist",     "url_strict_substring",  "url_hard_substring",
                                       "url_soft_substring", "url_token_removal",     "newline_normalization",
                                       "language_id",        "dedup"};

std::set<std::string> with(std::set<std::string> base, std::initializer_list<const char*> extra) {
    for (auto* e : extra) base.insert(e);
    return base;
}

}  // namespace

TEST(Presets, ExactStageSets) {
    auto doc = with(kUrlLid, {"gopher_quality", "nemo", "gopher_repetition", "badwords"});
    auto line = with(doc, {"custom_quality", "line_clean", "word_removal_ratio"});
    auto flux = line;
    flux.erase("badwords");
    const std::pair<Preset, std::set<std::string>> expected[] = {
        {Preset::url_lid, kUrlLid}, {Preset::doc_filter, doc}, {Preset::line_clean, line}, {Preset::flux, flux}};
    for (const auto& [preset, names] : expected) {
        auto cfg = PipelineConfig::for_preset(preset);
        auto n = cfg.stages.names();
        EXPECT_EQ(std::set<std::string>(n.begin(), n.end()), names) << preset_name(preset);
        Pipeline p(cfg);
        EXPECT_EQ(row_names(p.empty_stats()), names) << preset_name(preset);
    }
    EXPECT_TRUE(PipelineConfig::for_preset(Preset::flux).line.is_enabled(lineclean::LineClass::Timestamp));
    EXPECT_FALSE(PipelineConfig::for_preset(Preset::line_clean).line.is_enabled(lineclean::LineClass::Timestamp));
}

TEST(Presets, NameParsing) {
    EXPECT_EQ(preset_from_name("url-lid"), Preset::url_lid);
    EXPECT_EQ(preset_from_name("doc_filter"), Preset::doc_filter);
    EXPECT_EQ(preset_from_name("line-clean"), Preset::line_clean);
    EXPECT_EQ(preset_from_name("flux"), Preset::flux);
    EXPECT_FALSE(preset_from_name("everything").has_value());
    for (auto p : {Preset::url_lid, Preset::doc_filter, Preset::line_clean, Preset::flux}) {
        EXPECT_EQ(preset_from_name(preset_name(p)), p);
    }
}

TEST(StageCatalog, ExecutionOrderAndNames) {
    const auto& cat = stage_catalog();
    ASSERT_EQ(cat.size(), kStageCount);
    for (std::size_t i = 0; i < cat.size(); ++i) {
        EXPECT_EQ(static_cast<std::size_t>(cat[i].id), i);
        EXPECT_EQ(stage_from_name(cat[i].name), cat[i].id);
    }
    EXPECT_EQ(cat.front().name, "decontamination");
    EXPECT_EQ(cat.back().name, "quality_gate");
}

TEST(Pipeline, EmptyInputGivesZeroStats) {
    auto out = run(PipelineConfig::for_preset(Preset::flux), "");
    EXPECT_TRUE(out.kept.empty());
    EXPECT_TRUE(out.rejected.empty());
    EXPECT_EQ(out.stats.records_in, 0u);
    EXPECT_EQ(out.stats.initial_tokens, 0u);
    for (const auto& s : out.stats.stages) EXPECT_EQ(s.tokens_removed, 0u);
    EXPECT_NE(stats::render_stats_table(out.stats).find("100.00%"), std::string::npos);
}

TEST(Pipeline, EarlyExitAttribution) {
    synth::Generator g(1);
    std::string input = record("short", "https://a.com/x", "Too few words for this gate and the rest.") +
                        record("good", "https://b.com/y", g.paragraph(80, 120) + "\n" + g.paragraph(80, 120));
    auto out = run(PipelineConfig::for_preset(Preset::flux), input);
    auto rej = rejections(out.rejected);
    EXPECT_EQ(rej["short"], "gopher_quality/TooFewWords");
    EXPECT_EQ(ids(out.kept), std::set<std::string>{"good"});
    EXPECT_EQ(out.stats.find("gopher_quality")->find("TooFewWords")->docs, 1u);
    EXPECT_EQ(out.stats.find("nemo")->docs_in, 1u);
}

TEST(Pipeline, ForeignTextRoutesToMultilingual) {
    synth::Generator g(2);
    std::string input = record("fr", "https://fr.example/a", g.foreign_paragraph(100) + "\n" + g.foreign_paragraph(80));
    auto out = run(PipelineConfig::for_preset(Preset::url_lid), input);
    EXPECT_EQ(ids(out.multilingual), std::set<std::string>{"fr"});
    EXPECT_TRUE(out.kept.empty());
    EXPECT_EQ(out.stats.docs_multilingual, 1u);
}

TEST(Pipeline, AccountingInvariantsOnSyntheticCorpus) {
    synth::Generator g(3);
    std::string input = g.web_jsonl(1 << 20, {.p_short = 0.1, .p_repeat_paragraph = 0.1});
    input += "{broken json\n";
    for (auto preset : {Preset::url_lid, Preset::doc_filter, Preset::line_clean, Preset::flux}) {
        auto out = run(PipelineConfig::for_preset(preset), input);
        EXPECT_TRUE(out.stats.telescopes()) << preset_name(preset);
        EXPECT_TRUE(out.stats.conserves_documents()) << preset_name(preset);
        EXPECT_EQ(out.stats.parse_failures, 1u);
        EXPECT_EQ(ids(out.kept).size(), out.stats.docs_kept);
        EXPECT_EQ(rejections(out.rejected).size(), out.stats.docs_rejected);
        std::size_t kept_tokens = 0;
        std::istringstream in(out.kept);
        std::string line;
        while (std::getline(in, line)) kept_tokens += count_words(Json::parse(line)["text"].get<std::string>());
        EXPECT_EQ(kept_tokens, out.stats.tokens_kept);
    }
}

TEST(Pipeline, FluxRejectsEverythingUrlLidRejects) {
    synth::Generator g(4);
    std::string input = g.web_jsonl(512 << 10, {.p_foreign = 0.1, .p_repeat_paragraph = 0.1});
    auto base = PipelineConfig::for_preset(Preset::url_lid);
    base.strict_terms = urlstage::SubstringLexicon::make(urlstage::LexiconKind::strict, {synth::content_words()[0]});
    auto flux = PipelineConfig::for_preset(Preset::flux);
    flux.strict_terms = base.strict_terms;
    auto a = run(base, input), b = run(flux, input);
    auto kept_flux = ids(b.kept);
    for (const auto& [id, why] : rejections(a.rejected)) EXPECT_FALSE(kept_flux.count(id)) << id << " " << why;
    for (const auto& id : ids(a.multilingual)) EXPECT_FALSE(kept_flux.count(id)) << id;
    EXPECT_LE(kept_flux.size(), ids(a.kept).size());
}

TEST(Pipeline, DisablingAStageRemovesOnlyItsRowsAndRejections) {
    synth::Generator g(5);
    std::string input = g.web_jsonl(512 << 10, {.p_short = 0.1});
    auto full = PipelineConfig::for_preset(Preset::flux);
    full.stages.set(StageId::dedup, false);  // dedup couples documents through its shared filter
    for (auto victim : {StageId::nemo, StageId::gopher_repetition, StageId::custom_quality, StageId::line_clean}) {
        auto cut = full;
        cut.stages.set(victim, false);
        auto a = run(full, input), b = run(cut, input);
        const std::string name(stage_info(victim).name);
        EXPECT_TRUE(a.stats.find(name) != nullptr);
        EXPECT_TRUE(b.stats.find(name) == nullptr);
        auto ra = rejections(a.rejected), rb = rejections(b.rejected);
        for (const auto& [id, why] : rb) EXPECT_NE(why.substr(0, name.size() + 1), name + "/");
        for (const auto& [id, why] : ra) {
            if (why.starts_with(name + "/")) continue;
            // Earlier stages are untouched; later ones may now also see documents the victim used to take.
            if (victim != StageId::line_clean) EXPECT_EQ(rb[id], why) << id;
        }
    }
}

TEST(Pipeline, DeterministicAcrossWorkerCounts) {
    synth::Generator g(6);
    std::string input = g.web_jsonl(1 << 20, {.p_repeat_paragraph = 0.2});
    RunOutput first;
    for (std::size_t w : {1, 4, 8}) {
        auto cfg = PipelineConfig::for_preset(Preset::flux);
        cfg.workers = w;
        cfg.batch_size = 97;
        auto out = run(cfg, input);
        if (w == 1) {
            first = out;
            continue;
        }
        EXPECT_EQ(out.kept, first.kept) << w;
        EXPECT_EQ(out.rejected, first.rejected) << w;
        EXPECT_EQ(out.stats, first.stats) << w;
    }
}

TEST(Pipeline, GateUsesBothScorersAndWritesSidecar) {
    synth::Generator g(7);
    std::string input;
    const double dclm[] = {0.9, 0.0, 0.0};
    const double betr[] = {0.0, 0.9, 0.0};
    for (int i = 0; i < 3; ++i) {
        Json j;
        j["id"] = "g" + std::to_string(i);
        j["text"] = g.paragraph(80, 120) + "\n" + g.paragraph(80, 120);
        j["q"] = dclm[i];
        j["b"] = betr[i];
        input += j.dump() + "\n";
    }
    auto cfg = PipelineConfig::for_preset(Preset::url_lid);
    cfg.scorer_dclm = std::make_shared<qualitygate::FieldScorer>("q");
    cfg.scorer_betr = std::make_shared<qualitygate::FieldScorer>("b");
    cfg.gate = {0.5, 0.5};
    cfg.stages.set(StageId::quality_gate, true);
    auto out = run(cfg, input);
    EXPECT_EQ(ids(out.kept), (std::set<std::string>{"g0", "g1"}));
    EXPECT_EQ(rejections(out.rejected)["g2"], "quality_gate/BelowThreshold");
    std::istringstream sc(out.scores);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(sc, line)) {
        auto j = Json::parse(line);
        EXPECT_TRUE(j.contains("s_dclm") && j.contains("s_betr") && j.contains("bins"));
        ++rows;
    }
    EXPECT_EQ(rows, 3u);
}

TEST(Pipeline, DecontaminationRunsFirst) {
    std::vector<decontam::BenchmarkItem> items = {
        {"mmlu", "q1", "Which planet is known as the red planet in our solar system today?"}};
    auto cfg = PipelineConfig::for_preset(Preset::flux);
    cfg.reference = std::make_shared<decontam::ReferenceSet>(items);
    cfg.stages.set(StageId::decontamination, true);
    std::string input = record("c", "", "Quiz: which planet is known as the red planet in our solar system?") +
                        record("n", "", "Nothing to see.");
    std::istringstream in(input);
    std::ostringstream k, r, m;
    Pipeline p(cfg);
    auto s = p.run(in, {&k, &r, &m, nullptr});
    auto rej = rejections(r.str());
    EXPECT_EQ(rej["c"], "decontamination/BenchmarkOverlap");
    EXPECT_NE(rej["n"].substr(0, 15), "decontamination");
    ASSERT_NE(p.contamination_report(), nullptr);
    EXPECT_EQ(p.contamination_report()->total().documents, 1u);
    EXPECT_EQ(s.stages.front().name, "decontamination");
}

TEST(Config, CommentsAliasesAndOverrides) {
    auto j = parse_config_text(R"({
        // flat keys are accepted next to sections
        "preset": "doc-filter",
        "lid_threshold": 0.5,
        /* per-stage switches */
        "stages": {"nemo": false},
        "gopher_quality": {"min_words": 10}
    })");
    auto c = load_config(j);
    EXPECT_EQ(c.preset, Preset::doc_filter);
    EXPECT_DOUBLE_EQ(c.lid.threshold, 0.5);
    EXPECT_FALSE(c.stages.has(StageId::nemo));
    EXPECT_TRUE(c.stages.has(StageId::badwords));
    EXPECT_EQ(c.gopher.min_words, 10u);
    EXPECT_EQ(load_config(j, ".", Preset::flux).preset, Preset::flux);
}

TEST(Config, MissingResourcesAreReportedTogether) {
    auto j = parse_config_text(R"({"preset": "flux",
        "blocklist_path": "/nonexistent/blocklist.txt",
        "badwords_path": "/nonexistent/badwords.txt",
        "scorer_dclm_path": "/nonexistent/dclm.bin",
        "stages": {"quality_gate": true}})");
    try {
        load_config(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("blocklist.txt"), std::string::npos) << msg;
        EXPECT_NE(msg.find("badwords.txt"), std::string::npos) << msg;
        EXPECT_NE(msg.find("dclm.bin"), std::string::npos) << msg;
        EXPECT_NE(msg.find("BETR"), std::string::npos) << msg;
    }
    EXPECT_THROW(load_config(parse_config_text(R"({"preset":"nope"})")), ConfigError);
    EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(RunFiles, WritesAllOutputs) {
    auto dir = std::filesystem::temp_directory_path() / "curate_runfiles_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    synth::Generator g(9);
    {
        std::ofstream f(dir / "in.jsonl");
        f << g.web_jsonl(64 << 10);
    }
    auto s = run_files(PipelineConfig::for_preset(Preset::flux), (dir / "in.jsonl").string(), (dir / "out").string());
    for (auto name : {"kept.jsonl", "rejected.jsonl", "multilingual.jsonl", "stats.json", "stats.txt"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / "out" / name)) << name;
    }
    std::ifstream js(dir / "out" / "stats.json");
    auto j = Json::parse(js);
    EXPECT_EQ(stats::RunStats::from_json(j), s);
    EXPECT_EQ(j["preset"], "flux");
    std::filesystem::remove_all(dir);
}

TEST(ConfigTemplates, ShippedConfigsLoadWithTheirPresets) {
    const std::map<std::string, Preset> expected = {
        {"url-lid", Preset::url_lid},
        {"doc-filter", Preset::doc_filter},
        {"line-clean", Preset::line_clean},
        {"flux", Preset::flux},
    };
    for (const auto& [name, preset] : expected) {
        std::string path = std::string(CURATE_CONFIG_DIR) + "/" + name + ".json";
        PipelineConfig c = load_config_file(path);
        EXPECT_EQ(c.preset, preset) << name;
        EXPECT_EQ(c.stages.names(), PipelineConfig::for_preset(preset).stages.names()) << name;
    }
}
