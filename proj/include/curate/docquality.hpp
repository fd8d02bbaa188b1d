#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "curate/corpus.hpp"
#include "curate/urlstage.hpp"

namespace curate::docquality {

inline constexpr std::string_view kGopherQualityStage = "gopher_quality";
inline constexpr std::string_view kNemoStage = "nemo";
inline constexpr std::string_view kRepetitionStage = "gopher_repetition";
inline constexpr std::string_view kCustomQualityStage = "custom_quality";
inline constexpr std::string_view kBadwordsStage = "badwords";

struct GopherQualityThresholds {
    std::size_t min_words = 50;
    std::size_t max_words = 100000;
    double min_mean_word_len = 3.0;
    double max_mean_word_len = 10.0;
    double max_symbol_word_ratio = 0.10;
    double max_bullet_line_ratio = 0.90;
    double max_ellipsis_line_ratio = 0.30;
    double min_alpha_word_ratio = 0.80;
    std::size_t min_stop_words = 2;
};

struct NemoThresholds {
    double max_non_alnum_ratio = 0.25;
    double max_numeric_ratio = 0.15;
    double max_url_char_ratio = 0.20;
    double max_whitespace_ratio = 0.25;
    double max_paren_ratio = 0.10;
};

struct RepetitionThresholds {
    double dup_line_frac = 0.30;
    double dup_line_char_frac = 0.20;
    double dup_para_frac = 0.30;
    double dup_para_char_frac = 0.20;
    std::array<double, 3> top_ngram_char_frac = {0.20, 0.18, 0.16};                   // n = 2, 3, 4
    std::array<double, 6> dup_ngram_char_frac = {0.15, 0.14, 0.13, 0.12, 0.11, 0.10};  // n = 5..10
};

struct CustomQualityThresholds {
    std::size_t min_tokens = 50;
    double min_stop_word_ratio = 0.20;
    double max_unclosed_bracket_ratio = 0.05;
};

/// Lowercase stop-word set; lookups use text::normalize_token.
using StopWords = std::unordered_set<std::string>;

/// {the, be, to, of, and, that, have, with}
const StopWords& gopher_stop_words();
/// General English list used for the stop-word ratio.
const StopWords& english_stop_words();

struct GopherQualityOptions {
    std::vector<std::string> symbols = {"#", "...", "…"};
    std::vector<std::string> bullets = {"•", "-", "*", "‣", "▪"};
};

struct GopherQualityMetrics {
    std::size_t words = 0;
    double mean_word_len = 0.0;
    double symbol_word_ratio = 0.0;
    double bullet_line_ratio = 0.0;
    double ellipsis_line_ratio = 0.0;
    double alpha_word_ratio = 0.0;
    std::size_t stop_words = 0;
};

GopherQualityMetrics gopher_quality_metrics(std::string_view text, const StopWords& stop_words,
                                            const GopherQualityOptions& options = {});

Verdict gopher_quality(const Document& doc, const GopherQualityThresholds& thresholds = {},
                       const StopWords& stop_words = gopher_stop_words(),
                       const GopherQualityOptions& options = {});

struct NemoMetrics {
    double non_alnum_ratio = 0.0;
    double numeric_ratio = 0.0;
    double url_char_ratio = 0.0;
    double whitespace_ratio = 0.0;
    double paren_ratio = 0.0;
    std::size_t total_chars = 0;
};

NemoMetrics nemo_metrics(std::string_view text, const urlstage::TldList& tlds);

/// Ratios are over code points. Non-alphanumeric counts exclude whitespace;
/// parentheses cover ()[]{}. URL spans come from the inline-URL matcher.
Verdict nemo(const Document& doc, const NemoThresholds& thresholds = {},
             const urlstage::TldList& tlds = urlstage::TldList::builtin());

struct RepetitionMetrics {
    double dup_line_frac = 0.0;
    double dup_line_char_frac = 0.0;
    double dup_para_frac = 0.0;
    double dup_para_char_frac = 0.0;
    std::array<double, 3> top_ngram_char_frac{};
    std::array<double, 6> dup_ngram_char_frac{};
};

/// Fraction of non-blank units that repeat an earlier unit, and the share of
/// their characters. Units are lines ('\n') or paragraphs (blank-line separated).
struct DuplicateUnits {
    double frac = 0.0;
    double char_frac = 0.0;
};
DuplicateUnits duplicate_lines(std::string_view text);
DuplicateUnits duplicate_paragraphs(std::string_view text);

/// Characters covered by greedy non-overlapping occurrences of the most
/// frequent repeated word n-gram, over total word characters.
double top_ngram_char_frac(const std::vector<std::string_view>& words, std::size_t n);
/// Characters of word positions covered by any repeated word n-gram, over total word characters.
double dup_ngram_char_frac(const std::vector<std::string_view>& words, std::size_t n);

RepetitionMetrics repetition_metrics(std::string_view text);

Verdict gopher_repetition(const Document& doc, const RepetitionThresholds& thresholds = {});

/// Unmatched bracket characters over all bracket characters in ()[]{}; 0 when none.
double unclosed_bracket_ratio(std::string_view text);
double stop_word_ratio(std::string_view text, const StopWords& stop_words);

Verdict custom_quality(const Document& doc, const CustomQualityThresholds& thresholds = {},
                       const StopWords& stop_words = english_stop_words(), const WordCounter& counter = {});

/// Whole-word lexicon. Terms may span several words.
class BadwordsLexicon {
public:
    BadwordsLexicon() = default;
    explicit BadwordsLexicon(const std::vector<std::string>& terms);
    static BadwordsLexicon load(const std::string& path);

    bool matches(std::string_view text) const;
    bool empty() const { return by_first_.empty(); }

private:
    std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
};

/// Lowercased maximal alphanumeric runs.
std::vector<std::string> word_tokens(std::string_view text);

Verdict badwords_document_filter(const Document& doc, const BadwordsLexicon& lexicon);

}  // namespace curate::docquality
