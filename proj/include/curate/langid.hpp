#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "curate/corpus.hpp"

namespace curate::langid {

inline constexpr std::string_view kStage = "language_id";

struct LanguageScore {
    std::string label;                      // top-1 label, e.g. "en"
    double confidence = 0.0;                // top-1 confidence in [0,1]
    std::optional<double> english;          // English-class probability when exposed
};

/// English-class confidence: the exposed English probability, else the
/// top-1 confidence when the top label is English, else 0.
double english_confidence(const LanguageScore& score);

/// Pluggable language identifier. Implementations must be safe for
/// concurrent const use.
class LanguageScorer {
public:
    virtual ~LanguageScorer() = default;
    virtual LanguageScore score(std::string_view text) const = 0;
};

/// Built-in deterministic stand-in for an external language-ID model. The
/// English probability combines the share of Latin-script letters with the
/// density of common English function words.
class FunctionWordScorer : public LanguageScorer {
public:
    LanguageScore score(std::string_view text) const override;
};

enum class Strategy { whole_document, weighted_line };

struct LidConfig {
    Strategy strategy = Strategy::whole_document;
    double threshold = 0.65;
};

enum class Partition { english, multilingual };

struct RoutingDecision {
    Partition partition = Partition::multilingual;
    double score = 0.0;
};

double score_whole_document(const Document& doc, const LanguageScorer& scorer);
double score_weighted_lines(const Document& doc, const LanguageScorer& scorer);

/// Length-weighted mean: sum(bytes_i * p_i) / sum(bytes_i). Zero total weight yields 0.
double weighted_line_score(std::span<const std::size_t> byte_lengths, std::span<const double> probabilities);

RoutingDecision route(const Document& doc, const LidConfig& config, const LanguageScorer& scorer);

}  // namespace curate::langid
