#include "curate/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "curate/parallel.hpp"
#include "curate/text.hpp"

namespace curate::pipeline {

namespace fs = std::filesystem;
using stats::StageKind;

std::optional<Preset> preset_from_name(std::string_view name) {
    if (name == "url-lid" || name == "url_lid" || name == "url+lid") return Preset::url_lid;
    if (name == "doc-filter" || name == "doc_filter" || name == "docfilter") return Preset::doc_filter;
    if (name == "line-clean" || name == "line_clean" || name == "lineclean") return Preset::line_clean;
    if (name == "flux") return Preset::flux;
    return std::nullopt;
}

std::string_view preset_name(Preset preset) {
    switch (preset) {
        case Preset::url_lid:
            return "url-lid";
        case Preset::doc_filter:
            return "doc-filter";
        case Preset::line_clean:
            return "line-clean";
        case Preset::flux:
            return "flux";
    }
    return "flux";
}

const std::vector<StageInfo>& stage_catalog() {
    static const std::vector<StageInfo> catalog = [] {
        std::vector<std::string> line_rows;
        for (std::size_t i = 0; i < lineclean::kLineClassCount; ++i) {
            line_rows.emplace_back(lineclean::line_class_name(static_cast<lineclean::LineClass>(i)));
        }
        line_rows.emplace_back("EmptyAfterClean");
        return std::vector<StageInfo>{
            {StageId::decontamination, decontam::kStage, "Benchmark Decontamination", StageKind::filter,
             {"BenchmarkOverlap"}},
            {StageId::blocklist, urlstage::kBlocklistStage, "UT1 Domain Blocklist", StageKind::filter,
             {"BlockedDomain"}},
            {StageId::strict_substring, urlstage::kStrictStage, "URL Strict Substring", StageKind::filter,
             {"StrictSubstring"}},
            {StageId::hard_substring, urlstage::kHardStage, "URL Hard Substring", StageKind::filter,
             {"HardSubstring"}},
            {StageId::soft_substring, urlstage::kSoftStage, "URL Soft Substring", StageKind::filter,
             {"SoftSubstring"}},
            {StageId::url_token_removal, urlstage::kUrlRemovalStage, "URL Token Removal", StageKind::modifier, {}},
            {StageId::newline_normalization, urlstage::kNewlineStage, "Newline Normalization", StageKind::modifier,
             {}},
            {StageId::language_id, langid::kStage, "Language Identification", StageKind::filter, {"NonEnglish"}},
            {StageId::gopher_quality, docquality::kGopherQualityStage, "Gopher Quality Filter", StageKind::group,
             {"TooFewWords", "TooManyWords", "AvgWordLen", "SymbolWordRatio", "BulletLineRatio", "EllipsisLineRatio",
              "AlphaWordsRatio", "TooFewStopWords"}},
            {StageId::nemo, docquality::kNemoStage, "Nemo Filter", StageKind::group,
             {"NonAlphaNumericRatio", "NumericRatio", "UrlCharRatio", "WhitespaceRatio", "ParenthesesRatio"}},
            {StageId::gopher_repetition, docquality::kRepetitionStage, "Gopher Repetition", StageKind::group,
             {"DupLineFrac", "DupLineCharFrac", "DupParFrac", "DupParCharFrac", "TopNGramCharFrac",
              "DupNGramCharFrac"}},
            {StageId::badwords, docquality::kBadwordsStage, "Badwords Filter", StageKind::filter, {"Badwords"}},
            {StageId::custom_quality, docquality::kCustomQualityStage, "Custom Quality Filter", StageKind::group,
             {"TooFewTokens", "StopWordRatio", "UnclosedBracketRatio"}},
            {StageId::line_clean, lineclean::kStage, "Line Level Quality", StageKind::modifier_group, line_rows},
            {StageId::word_removal_ratio, lineclean::kWordRemovalStage, "Word Removal Ratio", StageKind::filter,
             {"WordRemovalRatio"}},
            {StageId::dedup, dedup::kStage, "Bloom Filter Dedup", StageKind::modifier_group,
             {"ParagraphRemoval", "DocumentDrop"}},
            {StageId::quality_gate, qualitygate::kStage, "Dual-Bin Quality Gate", StageKind::group,
             {"BelowThreshold", "ScorerError"}},
        };
    }();
    return catalog;
}

const StageInfo& stage_info(StageId id) { return stage_catalog()[static_cast<std::size_t>(id)]; }

std::optional<StageId> stage_from_name(std::string_view name) {
    for (const auto& s : stage_catalog()) {
        if (s.name == name) return s.id;
    }
    return std::nullopt;
}

std::vector<std::string> StageSet::names() const {
    std::vector<std::string> out;
    for (const auto& s : stage_catalog()) {
        if (has(s.id)) out.emplace_back(s.name);
    }
    return out;
}

StageSet preset_stages(Preset preset) {
    StageSet s;
    for (auto id : {StageId::blocklist, StageId::strict_substring, StageId::hard_substring, StageId::soft_substring,
                    StageId::url_token_removal, StageId::newline_normalization, StageId::language_id, StageId::dedup}) {
        s.set(id, true);
    }
    if (preset == Preset::url_lid) return s;
    for (auto id : {StageId::gopher_quality, StageId::nemo, StageId::gopher_repetition}) s.set(id, true);
    if (preset != Preset::flux) s.set(StageId::badwords, true);
    if (preset == Preset::doc_filter) return s;
    for (auto id : {StageId::custom_quality, StageId::line_clean, StageId::word_removal_ratio}) s.set(id, true);
    return s;
}

PipelineConfig PipelineConfig::for_preset(Preset preset) {
    PipelineConfig c;
    c.preset = preset;
    c.stages = preset_stages(preset);
    c.line = preset == Preset::flux ? lineclean::LineHeuristicConfig::full() : lineclean::LineHeuristicConfig::core();
    return c;
}

std::vector<std::string> PipelineConfig::validate() const {
    std::vector<std::string> problems;
    if (stages.has(StageId::quality_gate)) {
        if (!scorer_dclm) problems.emplace_back("quality_gate is enabled but no DCLM-bin scorer is configured");
        if (!scorer_betr) problems.emplace_back("quality_gate is enabled but no BETR-bin scorer is configured");
    }
    if (stages.has(StageId::decontamination) && !reference) {
        problems.emplace_back("decontamination is enabled but no benchmark reference set is configured");
    }
    if (stages.has(StageId::language_id) && !lid_scorer) problems.emplace_back("language_id has no scorer");
    if (stages.has(StageId::language_id) && !(lid.threshold > 0.0 && lid.threshold < 1.0)) {
        problems.emplace_back(fmt::format("lid threshold must be in (0,1), got {}", lid.threshold));
    }
    if (stages.has(StageId::dedup) && !(dedup_fp_rate > 0.0 && dedup_fp_rate < 1.0)) {
        problems.emplace_back(fmt::format("dedup fp_rate must be in (0,1), got {}", dedup_fp_rate));
    }
    if (batch_size == 0) problems.emplace_back("batch_size must be positive");
    return problems;
}

// ---- Config loading ---------------------------------------------------------------------------

Json parse_config_text(std::string_view input) {
    try {
        return Json::parse(input.begin(), input.end(), nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
}

namespace {

class ConfigReader {
public:
    explicit ConfigReader(std::string base_dir) : base_(std::move(base_dir)) {}

    template <typename T>
    void get(const Json& obj, const char* key, T& out, std::string_view where) {
        if (!obj.is_object()) return;
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return;
        try {
            out = it->get<T>();
        } catch (const Json::exception&) {
            problems.push_back(fmt::format("{}.{} has the wrong type", where, key));
        }
    }

    /// Resolved path when the key is set and non-empty; records a problem when the file is missing.
    std::optional<std::string> path(const Json& obj, const char* key, std::string_view where) {
        std::string p;
        get(obj, key, p, where);
        if (p.empty()) return std::nullopt;
        fs::path full = fs::path(p).is_absolute() ? fs::path(p) : fs::path(base_) / p;
        if (!fs::exists(full)) {
            problems.push_back(fmt::format("{}.{}: file not found: {}", where, key, full.string()));
            return std::nullopt;
        }
        return full.string();
    }

    const Json& section(const Json& root, const char* key) {
        static const Json empty = Json::object();
        if (!root.is_object()) return empty;
        auto it = root.find(key);
        if (it == root.end()) return empty;
        if (!it->is_object()) {
            problems.push_back(fmt::format("section '{}' must be an object", key));
            return empty;
        }
        return *it;
    }

    std::vector<std::string> problems;

private:
    std::string base_;
};

std::shared_ptr<const qualitygate::QualityScorer> make_scorer(const std::string& spec, ConfigReader& reader,
                                                              const std::string& base, std::string_view where) {
    if (spec.rfind("field:", 0) == 0) return std::make_shared<qualitygate::FieldScorer>(spec.substr(6));
    std::string p = spec.rfind("model:", 0) == 0 ? spec.substr(6) : spec;
    fs::path full = fs::path(p).is_absolute() ? fs::path(p) : fs::path(base) / p;
    if (!fs::exists(full)) {
        reader.problems.push_back(fmt::format("{}: model file not found: {}", where, full.string()));
        return nullptr;
    }
    try {
        auto model = std::make_shared<qualitygate::NgramModel>(qualitygate::NgramModel::load(full.string()));
        return std::make_shared<qualitygate::ModelScorer>(std::move(model));
    } catch (const std::exception& e) {
        reader.problems.push_back(fmt::format("{}: {}", where, e.what()));
        return nullptr;
    }
}

docquality::StopWords to_stop_words(const std::vector<std::string>& words) {
    docquality::StopWords out;
    for (const auto& w : words) out.insert(text::normalize_token(w));
    return out;
}

}  // namespace

namespace {

// Flat top-level spellings accepted alongside the sectioned layout. A value
// already present in the section wins.
struct KeyAlias {
    const char* flat;
    const char* section;
    const char* key;
};

constexpr KeyAlias kAliases[] = {
    {"blocklist_path", "url", "blocklist_path"},
    {"suffix_list_path", "url", "suffix_list_path"},
    {"strict_terms_path", "url", "strict_terms_path"},
    {"hard_terms_path", "url", "hard_terms_path"},
    {"soft_terms_path", "url", "soft_terms_path"},
    {"tld_list_path", "url", "tld_list_path"},
    {"lid_strategy", "lid", "strategy"},
    {"lid_threshold", "lid", "threshold"},
    {"badwords_path", "badwords", "lexicon_path"},
    {"word_removal_max_ratio", "word_removal", "max_ratio"},
    {"tau_dclm", "quality_gate", "tau_dclm"},
    {"tau_betr", "quality_gate", "tau_betr"},
    {"scorer_dclm_path", "quality_gate", "scorer_dclm"},
    {"scorer_betr_path", "quality_gate", "scorer_betr"},
    {"sweep_pairs", "quality_gate", "sweep_pairs"},
    {"fp_rate", "dedup", "fp_rate"},
    {"expected_ngrams", "dedup", "expected_ngrams"},
    {"reference_path", "decontam", "reference_path"},
};

Json apply_aliases(const Json& root) {
    Json out = root;
    for (const auto& a : kAliases) {
        auto it = root.find(a.flat);
        if (it == root.end()) continue;
        Json& section = out[a.section];
        if (section.is_null()) section = Json::object();
        if (section.is_object() && !section.contains(a.key)) section[a.key] = *it;
        out.erase(a.flat);
    }
    return out;
}

}  // namespace

PipelineConfig load_config(const Json& input, const std::string& base_dir, std::optional<Preset> preset_override) {
    ConfigReader r(base_dir);
    if (!input.is_object()) throw ConfigError("config must be a JSON object");
    const Json root = apply_aliases(input);

    Preset preset = Preset::flux;
    std::string preset_text;
    r.get(root, "preset", preset_text, "config");
    if (!preset_text.empty()) {
        if (auto p = preset_from_name(preset_text)) {
            preset = *p;
        } else {
            r.problems.push_back(fmt::format("unknown preset '{}'", preset_text));
        }
    }
    if (preset_override) preset = *preset_override;
    PipelineConfig c = PipelineConfig::for_preset(preset);

    r.get(root, "workers", c.workers, "config");
    r.get(root, "deterministic", c.deterministic, "config");
    r.get(root, "batch_size", c.batch_size, "config");
    std::string counter = "whitespace";
    r.get(root, "token_counter", counter, "config");
    if (counter != "whitespace") r.problems.push_back(fmt::format("unsupported token_counter '{}'", counter));

    // URL stages
    const Json& url = r.section(root, "url");
    if (auto p = r.path(url, "suffix_list_path", "url")) c.suffixes = urlstage::SuffixList::load(*p);
    if (auto p = r.path(url, "blocklist_path", "url")) c.blocklist = urlstage::DomainBlocklist::load(*p);
    if (auto p = r.path(url, "strict_terms_path", "url")) {
        c.strict_terms = urlstage::SubstringLexicon::load(urlstage::LexiconKind::strict, *p);
    }
    if (auto p = r.path(url, "hard_terms_path", "url")) {
        c.hard_terms = urlstage::SubstringLexicon::load(urlstage::LexiconKind::hard, *p);
    }
    if (auto p = r.path(url, "soft_terms_path", "url")) {
        c.soft_terms = urlstage::SubstringLexicon::load(urlstage::LexiconKind::soft, *p);
    }
    if (auto p = r.path(url, "tld_list_path", "url")) c.tlds = urlstage::TldList::load(*p);

    // Language routing
    const Json& lid = r.section(root, "lid");
    std::string strategy;
    r.get(lid, "strategy", strategy, "lid");
    if (strategy == "weighted_line") {
        c.lid.strategy = langid::Strategy::weighted_line;
    } else if (!strategy.empty() && strategy != "whole_doc") {
        r.problems.push_back(fmt::format("lid.strategy must be whole_doc or weighted_line, got '{}'", strategy));
    }
    r.get(lid, "threshold", c.lid.threshold, "lid");

    // Document gates
    const Json& gq = r.section(root, "gopher_quality");
    r.get(gq, "min_words", c.gopher.min_words, "gopher_quality");
    r.get(gq, "max_words", c.gopher.max_words, "gopher_quality");
    r.get(gq, "min_mean_word_len", c.gopher.min_mean_word_len, "gopher_quality");
    r.get(gq, "max_mean_word_len", c.gopher.max_mean_word_len, "gopher_quality");
    r.get(gq, "max_symbol_word_ratio", c.gopher.max_symbol_word_ratio, "gopher_quality");
    r.get(gq, "max_bullet_line_ratio", c.gopher.max_bullet_line_ratio, "gopher_quality");
    r.get(gq, "max_ellipsis_line_ratio", c.gopher.max_ellipsis_line_ratio, "gopher_quality");
    r.get(gq, "min_alpha_word_ratio", c.gopher.min_alpha_word_ratio, "gopher_quality");
    r.get(gq, "min_stop_words", c.gopher.min_stop_words, "gopher_quality");
    r.get(gq, "symbols", c.gopher_options.symbols, "gopher_quality");
    r.get(gq, "bullets", c.gopher_options.bullets, "gopher_quality");
    if (auto p = r.path(gq, "stop_words_path", "gopher_quality")) {
        c.gopher_stop_words = to_stop_words(urlstage::load_list(*p));
    }

    const Json& nemo = r.section(root, "nemo");
    r.get(nemo, "max_non_alnum_ratio", c.nemo.max_non_alnum_ratio, "nemo");
    r.get(nemo, "max_numeric_ratio", c.nemo.max_numeric_ratio, "nemo");
    r.get(nemo, "max_url_char_ratio", c.nemo.max_url_char_ratio, "nemo");
    r.get(nemo, "max_whitespace_ratio", c.nemo.max_whitespace_ratio, "nemo");
    r.get(nemo, "max_paren_ratio", c.nemo.max_paren_ratio, "nemo");

    const Json& rep = r.section(root, "gopher_repetition");
    r.get(rep, "dup_line_frac", c.repetition.dup_line_frac, "gopher_repetition");
    r.get(rep, "dup_line_char_frac", c.repetition.dup_line_char_frac, "gopher_repetition");
    r.get(rep, "dup_para_frac", c.repetition.dup_para_frac, "gopher_repetition");
    r.get(rep, "dup_para_char_frac", c.repetition.dup_para_char_frac, "gopher_repetition");
    r.get(rep, "top_ngram_char_frac", c.repetition.top_ngram_char_frac, "gopher_repetition");
    r.get(rep, "dup_ngram_char_frac", c.repetition.dup_ngram_char_frac, "gopher_repetition");

    const Json& cq = r.section(root, "custom_quality");
    r.get(cq, "min_tokens", c.custom.min_tokens, "custom_quality");
    r.get(cq, "min_stop_word_ratio", c.custom.min_stop_word_ratio, "custom_quality");
    r.get(cq, "max_unclosed_bracket_ratio", c.custom.max_unclosed_bracket_ratio, "custom_quality");
    if (auto p = r.path(cq, "stop_words_path", "custom_quality")) {
        c.custom_stop_words = to_stop_words(urlstage::load_list(*p));
    }

    const Json& bw = r.section(root, "badwords");
    if (auto p = r.path(bw, "lexicon_path", "badwords")) c.badwords = docquality::BadwordsLexicon::load(*p);

    // Line cleaning
    const Json& lc = r.section(root, "line_clean");
    if (lc.contains("classes")) {
        const Json& classes = lc["classes"];
        if (!classes.is_object()) {
            r.problems.emplace_back("line_clean.classes must be an object of class name to bool");
        } else {
            for (const auto& [name, value] : classes.items()) {
                auto cls = lineclean::line_class_from_name(name);
                if (!cls || !value.is_boolean()) {
                    r.problems.push_back(fmt::format("line_clean.classes: bad entry '{}'", name));
                    continue;
                }
                c.line.set_enabled(*cls, value.get<bool>());
            }
        }
    }
    r.get(lc, "min_words_per_line", c.line.min_words_per_line, "line_clean");
    r.get(lc, "max_uppercase_ratio", c.line.max_uppercase_ratio, "line_clean");
    r.get(lc, "max_numeric_ratio", c.line.max_numeric_ratio, "line_clean");
    r.get(lc, "engagement_words", c.line.engagement_words, "line_clean");
    r.get(lc, "boilerplate_markers", c.line.boilerplate_markers, "line_clean");
    r.get(lc, "code_start_tokens", c.line.code_start_tokens, "line_clean");
    r.get(lc, "breadcrumb_separators", c.line.breadcrumb_separators, "line_clean");
    r.get(lc, "cookie_phrases", c.line.cookie_phrases, "line_clean");
    r.get(lc, "social_cta_prefixes", c.line.social_cta_prefixes, "line_clean");
    r.get(lc, "form_labels", c.line.form_labels, "line_clean");
    if (auto p = r.path(lc, "markers_path", "line_clean")) c.line.boilerplate_markers = urlstage::load_list(*p);
    if (auto p = r.path(lc, "cookie_phrases_path", "line_clean")) c.line.cookie_phrases = urlstage::load_list(*p);
    const Json& wr = r.section(root, "word_removal");
    r.get(wr, "max_ratio", c.word_removal_max_ratio, "word_removal");

    // Dedup
    const Json& dd = r.section(root, "dedup");
    r.get(dd, "fp_rate", c.dedup_fp_rate, "dedup");
    r.get(dd, "expected_ngrams", c.dedup_expected_ngrams, "dedup");
    r.get(dd, "max_memory_bytes", c.dedup_max_bytes, "dedup");
    r.get(dd, "ngram_size", c.shingle.ngram_size, "dedup");
    r.get(dd, "dup_shingle_threshold", c.shingle.dup_shingle_threshold, "dedup");
    r.get(dd, "doc_fallback_para_threshold", c.shingle.doc_fallback_para_threshold, "dedup");

    // Quality gate
    const Json& qg = r.section(root, "quality_gate");
    r.get(qg, "tau_dclm", c.gate.tau_dclm, "quality_gate");
    r.get(qg, "tau_betr", c.gate.tau_betr, "quality_gate");
    std::string dclm_spec, betr_spec;
    r.get(qg, "scorer_dclm", dclm_spec, "quality_gate");
    r.get(qg, "scorer_betr", betr_spec, "quality_gate");
    if (qg.contains("sweep_pairs")) {
        c.sweep_pairs.clear();
        bool ok = qg["sweep_pairs"].is_array();
        if (ok) {
            for (const auto& p : qg["sweep_pairs"]) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    ok = false;
                    break;
                }
                c.sweep_pairs.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
        if (!ok) r.problems.emplace_back("quality_gate.sweep_pairs must be a list of [tau_dclm, tau_betr] pairs");
    }
    bool gate_on = !dclm_spec.empty() || !betr_spec.empty();
    r.get(qg, "enabled", gate_on, "quality_gate");
    if (gate_on) {
        c.stages.set(StageId::quality_gate, true);
        if (!dclm_spec.empty()) c.scorer_dclm = make_scorer(dclm_spec, r, base_dir, "quality_gate.scorer_dclm");
        if (!betr_spec.empty()) c.scorer_betr = make_scorer(betr_spec, r, base_dir, "quality_gate.scorer_betr");
    }

    // Decontamination
    const Json& dc = r.section(root, "decontam");
    decontam::DecontamConfig dconf;
    r.get(dc, "ngram_size", dconf.ngram_size, "decontam");
    r.get(dc, "min_matches", dconf.min_matches, "decontam");
    if (auto p = r.path(dc, "reference_path", "decontam")) {
        c.reference = std::make_shared<decontam::ReferenceSet>(decontam::load_benchmark_items(*p), dconf);
        c.stages.set(StageId::decontamination, true);
    }

    // Explicit per-stage switches win over everything above.
    const Json& st = r.section(root, "stages");
    for (const auto& [name, value] : st.items()) {
        auto id = stage_from_name(name);
        if (!id || !value.is_boolean()) {
            r.problems.push_back(fmt::format("stages: bad entry '{}'", name));
            continue;
        }
        c.stages.set(*id, value.get<bool>());
    }

    for (auto& p : c.validate()) r.problems.push_back(std::move(p));
    if (!r.problems.empty()) {
        std::string msg = "configuration problems:";
        for (const auto& p : r.problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    return c;
}

std::shared_ptr<const qualitygate::QualityScorer> scorer_from_spec(const std::string& spec,
                                                                   const std::string& base_dir) {
    ConfigReader r(base_dir);
    auto scorer = make_scorer(spec, r, base_dir, "scorer");
    if (!scorer) throw ConfigError(r.problems.empty() ? "bad scorer spec" : r.problems.front());
    return scorer;
}

PipelineConfig load_config_file(const std::string& path, std::optional<Preset> preset_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path));
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = fs::path(path).parent_path().string();
    return load_config(parse_config_text(ss.str()), base.empty() ? "." : base, preset_override);
}

// ---- Pipeline ---------------------------------------------------------------------------------

struct Pipeline::Trace {
    enum class Route { kept, rejected, multilingual, failed };
    enum class OpKind : std::uint8_t { enter, pass, remove, modify, criterion_tokens };
    struct Op {
        OpKind kind;
        std::uint8_t stage;
        std::int16_t criterion;
        std::uint64_t tokens;
    };

    Route route = Route::kept;
    Verdict verdict;
    std::uint64_t initial_tokens = 0;
    std::uint64_t tokens = 0;
    std::vector<Op> ops;
    decontam::ScreenResult screen;
    std::optional<qualitygate::GateDecision> decision;
    std::string failure;

    bool alive() const { return route == Route::kept; }

    void op(OpKind kind, StageId stage, int criterion = -1, std::uint64_t t = 0) {
        ops.push_back({kind, static_cast<std::uint8_t>(stage), static_cast<std::int16_t>(criterion), t});
    }
};

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    auto problems = config_.validate();
    if (!problems.empty()) {
        std::string msg = "configuration problems:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    int next = 0;
    for (std::size_t i = 0; i < kStageCount; ++i) slot_[i] = config_.stages.on[i] ? next++ : -1;
    if (config_.stages.has(StageId::decontamination)) {
        report_ = std::make_unique<decontam::ContaminationReport>(*config_.reference);
    }
}

Pipeline::~Pipeline() = default;

stats::RunStats Pipeline::empty_stats() const {
    stats::RunStats s;
    for (const auto& info : stage_catalog()) {
        if (!config_.stages.has(info.id)) continue;
        s.stages.emplace_back(std::string(info.name), std::string(info.label), info.kind, info.criteria);
    }
    return s;
}

namespace {

int criterion_index(StageId id, std::string_view criterion) {
    const auto& crit = stage_info(id).criteria;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        if (crit[i] == criterion) return static_cast<int>(i);
    }
    throw std::logic_error(fmt::format("stage {} produced unknown criterion {}", stage_info(id).name, criterion));
}

}  // namespace

void Pipeline::process_front(Document& doc, Trace& t) const {
    using Op = Trace::OpKind;
    const auto& c = config_;
    const auto& on = c.stages;
    t.initial_tokens = t.tokens = c.counter(doc.text);

    // Returns false when the verdict removed the document.
    auto filter = [&](StageId id, Verdict v) {
        t.op(Op::enter, id);
        if (!v.rejected()) {
            t.op(Op::pass, id);
            return true;
        }
        t.op(Op::remove, id, criterion_index(id, v.criterion), t.tokens);
        t.route = Trace::Route::rejected;
        t.verdict = std::move(v);
        return false;
    };
    auto modifier = [&](StageId id, auto&& mutate) {
        t.op(Op::enter, id);
        std::uint64_t before = t.tokens;
        if (mutate()) t.tokens = c.counter(doc.text);
        t.op(Op::modify, id, -1, before > t.tokens ? before - t.tokens : 0);
        t.op(Op::pass, id);
    };

    if (on.has(StageId::decontamination) &&
        !filter(StageId::decontamination, decontam::screen_verdict(doc, *c.reference, &t.screen))) {
        return;
    }
    if (on.has(StageId::blocklist) &&
        !filter(StageId::blocklist, urlstage::check_blocklist(doc.url, c.blocklist, c.suffixes))) {
        return;
    }
    if (on.has(StageId::strict_substring) &&
        !filter(StageId::strict_substring, urlstage::check_strict_substrings(doc.url, c.strict_terms))) {
        return;
    }
    if (on.has(StageId::hard_substring) &&
        !filter(StageId::hard_substring, urlstage::check_hard_substrings(doc.url, c.hard_terms))) {
        return;
    }
    if (on.has(StageId::soft_substring) &&
        !filter(StageId::soft_substring, urlstage::check_soft_substrings(doc.url, c.soft_terms))) {
        return;
    }
    if (on.has(StageId::url_token_removal)) {
        modifier(StageId::url_token_removal, [&] { return urlstage::strip_inline_urls(doc, c.tlds, c.counter) > 0; });
    }
    if (on.has(StageId::newline_normalization)) {
        modifier(StageId::newline_normalization, [&] {
            auto size = doc.text.size();
            urlstage::normalize_newlines(doc);
            return doc.text.size() != size;
        });
    }
    if (on.has(StageId::language_id)) {
        t.op(Op::enter, StageId::language_id);
        auto decision = langid::route(doc, c.lid, *c.lid_scorer);
        if (decision.partition == langid::Partition::multilingual) {
            t.op(Op::remove, StageId::language_id, 0, t.tokens);
            t.route = Trace::Route::multilingual;
            t.verdict = Verdict::reject(std::string(langid::kStage), "NonEnglish");
            return;
        }
        t.op(Op::pass, StageId::language_id);
    }
    if (on.has(StageId::gopher_quality) &&
        !filter(StageId::gopher_quality,
                docquality::gopher_quality(doc, c.gopher, c.gopher_stop_words, c.gopher_options))) {
        return;
    }
    if (on.has(StageId::nemo) && !filter(StageId::nemo, docquality::nemo(doc, c.nemo, c.tlds))) return;
    if (on.has(StageId::gopher_repetition) &&
        !filter(StageId::gopher_repetition, docquality::gopher_repetition(doc, c.repetition))) {
        return;
    }
    if (on.has(StageId::badwords) &&
        !filter(StageId::badwords, docquality::badwords_document_filter(doc, c.badwords))) {
        return;
    }
    if (on.has(StageId::custom_quality) &&
        !filter(StageId::custom_quality,
                docquality::custom_quality(doc, c.custom, c.custom_stop_words, c.counter))) {
        return;
    }

    std::uint64_t w_pre = t.tokens;
    std::uint64_t w_post = t.tokens;
    if (on.has(StageId::line_clean)) {
        t.op(Op::enter, StageId::line_clean);
        auto r = lineclean::clean_lines(doc, c.line, c.counter);
        for (std::size_t i = 0; i < lineclean::kLineClassCount; ++i) {
            if (r.lines_removed[i] > 0) {
                t.op(Op::criterion_tokens, StageId::line_clean, static_cast<int>(i), r.words_removed[i]);
            }
        }
        w_pre = r.words_before;
        w_post = r.words_after;
        t.tokens = r.words_after;
        if (r.total_lines_removed() > 0) t.op(Op::modify, StageId::line_clean, -1, r.total_words_removed());
        if (r.rejected) {
            t.op(Op::remove, StageId::line_clean, static_cast<int>(lineclean::kLineClassCount), t.tokens);
            t.route = Trace::Route::rejected;
            t.verdict = Verdict::reject(std::string(lineclean::kStage), "EmptyAfterClean");
            return;
        }
        t.op(Op::pass, StageId::line_clean);
    }
    if (on.has(StageId::word_removal_ratio) &&
        !filter(StageId::word_removal_ratio, lineclean::word_removal_gate(w_pre, w_post, c.word_removal_max_ratio))) {
        return;
    }
}

void Pipeline::process_gate(Document& doc, Trace& t) const {
    using Op = Trace::OpKind;
    t.op(Op::enter, StageId::quality_gate);
    qualitygate::GateDecision d;
    Verdict v = qualitygate::gate_verdict(doc, *config_.scorer_dclm, *config_.scorer_betr, config_.gate, &d);
    if (v.criterion != "ScorerError") t.decision = d;
    if (!v.rejected()) {
        t.op(Op::pass, StageId::quality_gate);
        return;
    }
    t.op(Op::remove, StageId::quality_gate, criterion_index(StageId::quality_gate, v.criterion), t.tokens);
    t.route = Trace::Route::rejected;
    t.verdict = std::move(v);
}

void Pipeline::account(const Trace& t, stats::RunStats& s) const {
    using Op = Trace::OpKind;
    ++s.records_in;
    if (t.route == Trace::Route::failed) {
        ++s.parse_failures;
        return;
    }
    s.initial_tokens += t.initial_tokens;
    for (const auto& op : t.ops) {
        auto& st = s.stages[static_cast<std::size_t>(slot_[op.stage])];
        switch (op.kind) {
            case Op::enter:
                ++st.docs_in;
                break;
            case Op::pass:
                ++st.docs_out;
                break;
            case Op::remove:
                ++st.docs_removed;
                st.tokens_removed += op.tokens;
                if (op.criterion >= 0) {
                    auto& cc = st.criterion(static_cast<std::size_t>(op.criterion));
                    ++cc.docs;
                    cc.tokens += op.tokens;
                }
                break;
            case Op::modify:
                if (op.tokens > 0 || st.kind == StageKind::modifier_group) ++st.docs_modified;
                st.tokens_removed += op.tokens;
                break;
            case Op::criterion_tokens:
                st.criterion(static_cast<std::size_t>(op.criterion)).tokens += op.tokens;
                break;
        }
    }
    switch (t.route) {
        case Trace::Route::kept:
            ++s.docs_kept;
            s.tokens_kept += t.tokens;
            break;
        case Trace::Route::rejected:
            ++s.docs_rejected;
            break;
        case Trace::Route::multilingual:
            ++s.docs_multilingual;
            s.tokens_multilingual += t.tokens;
            break;
        case Trace::Route::failed:
            break;
    }
}

namespace {

void write_line(std::ostream* out, const std::string& line, const char* what) {
    if (!out) return;
    *out << line << '\n';
    if (!*out) throw IoError(fmt::format("I/O failure writing {} stream", what), 0);
}

}  // namespace

stats::RunStats Pipeline::run(std::istream& in, const Outputs& out, std::uint64_t input_bytes) {
    using Op = Trace::OpKind;
    const auto started = std::chrono::steady_clock::now();
    stats::RunStats s = empty_stats();
    dedup_stats_ = {};
    if (report_) report_ = std::make_unique<decontam::ContaminationReport>(*config_.reference);

    std::optional<dedup::BloomFilter> filter;
    if (config_.stages.has(StageId::dedup)) {
        double expected = config_.dedup_expected_ngrams > 0.0
                              ? config_.dedup_expected_ngrams
                              : dedup::auto_expected_ngrams(input_bytes ? input_bytes : (64ull << 20));
        try {
            filter.emplace(dedup::BloomFilter::sized(config_.dedup_fp_rate, expected, config_.dedup_max_bytes));
        } catch (const dedup::MemoryCapExceeded& e) {
            throw ConfigError(e.what());
        }
        spdlog::debug("dedup filter: {} bits, k={}, expected {:.0f} shingles", filter->m_bits(), filter->k(), expected);
    }

    const std::size_t workers = std::max<std::size_t>(1, config_.workers);
    JsonlReader reader(in);
    std::vector<std::pair<std::size_t, std::string>> raw;
    std::vector<Document> docs;
    std::vector<Trace> traces;
    std::uint64_t bytes_read = 0;

    while (reader.next_lines(raw, config_.batch_size) > 0) {
        const std::size_t n = raw.size();
        docs.assign(n, Document{});
        traces.assign(n, Trace{});
        for (const auto& r : raw) bytes_read += r.second.size() + 1;

        parallel_for(n, workers, [&](std::size_t i) {
            auto parsed = parse_record(raw[i].second, raw[i].first);
            if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
                traces[i].route = Trace::Route::failed;
                traces[i].failure = failure->message;
                return;
            }
            docs[i] = std::move(std::get<Document>(parsed));
            process_front(docs[i], traces[i]);
        }, 4);

        if (filter) {
            std::vector<dedup::DocumentResult> results(n);
            std::vector<std::uint64_t> bytes_before(n);
            for (std::size_t i = 0; i < n; ++i) bytes_before[i] = docs[i].text.size();
            auto one = [&](std::size_t i) {
                if (traces[i].alive()) results[i] = dedup::dedup_document(docs[i], *filter, config_.shingle, config_.counter);
            };
            if (config_.deterministic || workers == 1) {
                // Single writer in input order keeps the surviving copy of a duplicate stable.
                for (std::size_t i = 0; i < n; ++i) one(i);
            } else {
                parallel_for(n, workers, one, 4);
            }
            for (std::size_t i = 0; i < n; ++i) {
                auto& t = traces[i];
                if (!t.alive()) continue;
                const auto& r = results[i];
                t.op(Op::enter, StageId::dedup);
                ++dedup_stats_.docs_in;
                dedup_stats_.bytes_in += bytes_before[i];
                dedup_stats_.tokens_in += t.tokens;
                dedup_stats_.paragraphs_in += r.paragraphs;
                dedup_stats_.paragraphs_flagged += r.paragraphs_flagged;
                dedup_stats_.shingles_inserted += r.shingles_inserted;
                if (r.outcome == dedup::Outcome::dropped) {
                    ++dedup_stats_.documents_dropped;
                    t.op(Op::remove, StageId::dedup, 1, t.tokens);
                    t.route = Trace::Route::rejected;
                    t.verdict = Verdict::reject(std::string(dedup::kStage), "DocumentDrop");
                    continue;
                }
                if (r.outcome == dedup::Outcome::modified) {
                    ++dedup_stats_.documents_modified;
                    std::uint64_t before = t.tokens;
                    t.tokens = config_.counter(docs[i].text);
                    std::uint64_t delta = before > t.tokens ? before - t.tokens : 0;
                    t.op(Op::criterion_tokens, StageId::dedup, 0, delta);
                    t.op(Op::modify, StageId::dedup, -1, delta);
                }
                ++dedup_stats_.docs_out;
                dedup_stats_.bytes_out += docs[i].text.size();
                dedup_stats_.tokens_out += t.tokens;
                t.op(Op::pass, StageId::dedup);
            }
        }

        if (config_.stages.has(StageId::quality_gate)) {
            parallel_for(n, workers, [&](std::size_t i) {
                if (traces[i].alive()) process_gate(docs[i], traces[i]);
            }, 4);
        }

        for (std::size_t i = 0; i < n; ++i) {
            const auto& t = traces[i];
            account(t, s);
            switch (t.route) {
                case Trace::Route::failed:
                    spdlog::warn("line {}: unparseable record skipped ({})", raw[i].first, t.failure);
                    continue;
                case Trace::Route::kept:
                    write_line(out.kept, serialize_kept(docs[i]), "kept");
                    break;
                case Trace::Route::rejected:
                    write_line(out.rejected, serialize_rejected(docs[i], t.verdict), "rejected");
                    break;
                case Trace::Route::multilingual:
                    write_line(out.multilingual, serialize_kept(docs[i]), "multilingual");
                    break;
            }
            if (report_ && t.screen.contaminated) report_->add(docs[i].id, t.screen);
            if (out.scores && t.decision) {
                Json j;
                j["id"] = docs[i].id;
                j["s_dclm"] = t.decision->s_dclm;
                j["s_betr"] = t.decision->s_betr;
                j["tokens"] = t.tokens;
                j["accepted"] = t.decision->accepted();
                j["bins"] = t.decision->bins();
                write_line(out.scores, j.dump(), "scores");
            }
        }
    }
    if (filter) dedup_stats_.finish(*filter);

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    spdlog::info("processed {} records ({:.1f} MB) in {:.2f} s: {:.0f} docs/s, {:.1f} MB/s, {} kept", s.records_in,
                 static_cast<double>(bytes_read) / 1e6, secs, secs > 0 ? static_cast<double>(s.records_in) / secs : 0.0,
                 secs > 0 ? static_cast<double>(bytes_read) / 1e6 / secs : 0.0, s.docs_kept);
    return s;
}

stats::RunStats run_files(const PipelineConfig& config, const std::string& input_path, const std::string& output_dir) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory {}: {}", output_dir, ec.message()), 0);

    auto in = open_input(input_path);
    std::uint64_t bytes = fs::file_size(input_path, ec);
    if (ec) bytes = 0;
    if (input_path.ends_with(".gz")) bytes *= 4;  // rough inflation guess for sizing only

    auto open = [&](const char* name) {
        auto p = (fs::path(output_dir) / name).string();
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError(fmt::format("cannot open {} for writing", p), 0);
        return f;
    };
    std::ofstream kept = open("kept.jsonl");
    std::ofstream rejected = open("rejected.jsonl");
    std::ofstream multilingual = open("multilingual.jsonl");
    std::optional<std::ofstream> scores;
    if (config.stages.has(StageId::quality_gate)) scores.emplace(open("scores.jsonl"));

    Pipeline pipeline(config);
    Outputs out{&kept, &rejected, &multilingual, scores ? &*scores : nullptr};
    stats::RunStats s = pipeline.run(*in, out, bytes);

    Json j = s.to_json();
    j["preset"] = preset_name(config.preset);
    j["active_stages"] = config.stages.names();
    if (config.stages.has(StageId::dedup)) j["dedup_filter"] = pipeline.dedup_stats().to_json();
    if (const auto* report = pipeline.contamination_report()) {
        j["decontamination"] = report->to_json();
        std::ofstream rep = open("decontamination.txt");
        rep << report->render_table();
    }
    std::ofstream stats_json = open("stats.json");
    stats_json << j.dump(2) << '\n';
    std::ofstream stats_txt = open("stats.txt");
    stats_txt << stats::render_stats_table(s);
    if (!stats_json || !stats_txt) throw IoError("I/O failure writing stats", 0);
    return s;
}

}  // namespace curate::pipeline
