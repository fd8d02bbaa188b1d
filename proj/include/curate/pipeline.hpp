#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curate/corpus.hpp"
#include "curate/decontam.hpp"
#include "curate/dedup.hpp"
#include "curate/docquality.hpp"
#include "curate/langid.hpp"
#include "curate/lineclean.hpp"
#include "curate/qualitygate.hpp"
#include "curate/stats.hpp"
#include "curate/urlstage.hpp"

namespace curate::pipeline {

enum class Preset { url_lid, doc_filter, line_clean, flux };

std::optional<Preset> preset_from_name(std::string_view name);
std::string_view preset_name(Preset preset);

// Execution order.
enum class StageId : std::size_t {
    decontamination,
    blocklist,
    strict_substring,
    hard_substring,
    soft_substring,
    url_token_removal,
    newline_normalization,
    language_id,
    gopher_quality,
    nemo,
    gopher_repetition,
    badwords,
    custom_quality,
    line_clean,
    word_removal_ratio,
    dedup,
    quality_gate,
};

inline constexpr std::size_t kStageCount = 17;

struct StageInfo {
    StageId id;
    std::string_view name;
    std::string_view label;
    stats::StageKind kind;
    std::vector<std::string> criteria;
};

/// Every stage the pipeline knows, in execution order.
const std::vector<StageInfo>& stage_catalog();
const StageInfo& stage_info(StageId id);
std::optional<StageId> stage_from_name(std::string_view name);

struct StageSet {
    std::array<bool, kStageCount> on{};

    bool has(StageId id) const { return on[static_cast<std::size_t>(id)]; }
    void set(StageId id, bool value) { on[static_cast<std::size_t>(id)] = value; }
    std::vector<std::string> names() const;
};

/// Stages a preset activates. Dedup is on by default; decontamination and
/// the quality gate depend on resources and start off.
StageSet preset_stages(Preset preset);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    Preset preset = Preset::flux;
    StageSet stages;

    // URL stages
    urlstage::SuffixList suffixes = urlstage::SuffixList::builtin();
    urlstage::DomainBlocklist blocklist;
    urlstage::SubstringLexicon strict_terms = urlstage::SubstringLexicon::make(urlstage::LexiconKind::strict, {});
    urlstage::SubstringLexicon hard_terms = urlstage::SubstringLexicon::make(urlstage::LexiconKind::hard, {});
    urlstage::SubstringLexicon soft_terms = urlstage::SubstringLexicon::make(urlstage::LexiconKind::soft, {});
    urlstage::TldList tlds = urlstage::TldList::builtin();

    // Language routing
    langid::LidConfig lid;
    std::shared_ptr<const langid::LanguageScorer> lid_scorer = std::make_shared<langid::FunctionWordScorer>();

    // Document gates
    docquality::GopherQualityThresholds gopher;
    docquality::GopherQualityOptions gopher_options;
    docquality::StopWords gopher_stop_words = docquality::gopher_stop_words();
    docquality::NemoThresholds nemo;
    docquality::RepetitionThresholds repetition;
    docquality::CustomQualityThresholds custom;
    docquality::StopWords custom_stop_words = docquality::english_stop_words();
    docquality::BadwordsLexicon badwords;

    // Line cleaning
    lineclean::LineHeuristicConfig line = lineclean::LineHeuristicConfig::full();
    double word_removal_max_ratio = 0.05;

    // Dedup
    double dedup_fp_rate = 1e-3;
    double dedup_expected_ngrams = 0.0;  // 0 sizes from the input byte count
    std::uint64_t dedup_max_bytes = 8ull << 30;
    dedup::ShingleConfig shingle;

    // Quality gate
    qualitygate::BinThresholds gate;
    std::shared_ptr<const qualitygate::QualityScorer> scorer_dclm;
    std::shared_ptr<const qualitygate::QualityScorer> scorer_betr;
    std::vector<qualitygate::BinThresholds> sweep_pairs = qualitygate::default_sweep_pairs();

    // Decontamination
    std::shared_ptr<const decontam::ReferenceSet> reference;

    WordCounter counter;
    std::size_t workers = 1;
    bool deterministic = true;
    std::size_t batch_size = 512;

    static PipelineConfig for_preset(Preset preset);

    /// Problems that would stop a run (missing scorers, references), all at once.
    std::vector<std::string> validate() const;
};

/// Parses JSON that may contain // and /* */ comments.
Json parse_config_text(std::string_view text);

/// Builds a config from a JSON document. Relative paths resolve against
/// `base_dir`. `preset_override` wins over the document's "preset" key.
/// Throws ConfigError listing every problem found, including missing files.
PipelineConfig load_config(const Json& doc, const std::string& base_dir = ".",
                           std::optional<Preset> preset_override = std::nullopt);
PipelineConfig load_config_file(const std::string& path, std::optional<Preset> preset_override = std::nullopt);

/// Scorer from "field:NAME", "model:PATH" or a bare model path. Throws ConfigError.
std::shared_ptr<const qualitygate::QualityScorer> scorer_from_spec(const std::string& spec,
                                                                   const std::string& base_dir = ".");

struct Outputs {
    std::ostream* kept = nullptr;
    std::ostream* rejected = nullptr;
    std::ostream* multilingual = nullptr;
    std::ostream* scores = nullptr;  // optional gate sidecar
};

class Pipeline {
public:
    /// Throws ConfigError when validate() reports problems.
    explicit Pipeline(PipelineConfig config);
    ~Pipeline();

    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    /// Streams JSONL from `in` to the outputs. `input_bytes` sizes the dedup
    /// filter when no expected n-gram count is configured.
    stats::RunStats run(std::istream& in, const Outputs& out, std::uint64_t input_bytes = 0);

    /// Stats with every active stage present and all counters zero.
    stats::RunStats empty_stats() const;

    const PipelineConfig& config() const { return config_; }
    const dedup::DedupStats& dedup_stats() const { return dedup_stats_; }
    const decontam::ContaminationReport* contamination_report() const { return report_.get(); }

private:
    struct Trace;
    void process_front(Document& doc, Trace& trace) const;
    void process_gate(Document& doc, Trace& trace) const;
    void account(const Trace& trace, stats::RunStats& stats) const;

    PipelineConfig config_;
    std::array<int, kStageCount> slot_{};  // stage id -> index in RunStats::stages, -1 when inactive
    dedup::DedupStats dedup_stats_;
    std::unique_ptr<decontam::ContaminationReport> report_;
};

/// Runs over a file (plain or .gz) and writes kept.jsonl, rejected.jsonl,
/// multilingual.jsonl, stats.json and stats.txt into `output_dir`.
stats::RunStats run_files(const PipelineConfig& config, const std::string& input_path, const std::string& output_dir);

}  // namespace curate::pipeline
