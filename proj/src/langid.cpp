#include "curate/langid.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <unordered_set>

#include "curate/text.hpp"

namespace curate::langid {

double english_confidence(const LanguageScore& score) {
    double p = score.english ? *score.english : (score.label == "en" ? score.confidence : 0.0);
    return std::clamp(p, 0.0, 1.0);
}

namespace {

const std::unordered_set<std::string_view>& function_words() {
    static const std::unordered_set<std::string_view> words = {
        "the", "of", "and", "to", "a", "in", "is", "that", "for", "it", "as", "was", "with", "be",
        "by", "on", "not", "he", "i", "this", "are", "or", "his", "from", "at", "which", "but",
        "have", "an", "had", "they", "you", "were", "their", "one", "all", "we", "can", "her",
        "has", "there", "been", "if", "more", "when", "will", "would", "who", "so", "no", "she",
        "my", "do", "our", "what", "about", "your", "its", "also", "than", "them", "these",
    };
    return words;
}

}  // namespace

LanguageScore FunctionWordScorer::score(std::string_view input) const {
    std::size_t letters = 0;
    std::size_t latin = 0;
    std::size_t i = 0;
    while (i < input.size()) {
        char32_t c = text::next_code_point(input, i);
        if (!text::is_alpha(c)) continue;
        ++letters;
        if (c < 0x250) ++latin;
    }
    std::size_t words = 0;
    std::size_t hits = 0;
    const auto& fw = function_words();
    text::for_each_word(input, [&](std::string_view w) {
        ++words;
        std::string t = text::normalize_token(w);
        if (fw.count(t)) ++hits;
    });
    if (letters == 0 || words == 0) return {"und", 0.0, 0.0};

    double latin_share = static_cast<double>(latin) / static_cast<double>(letters);
    double density = static_cast<double>(hits) / static_cast<double>(words);
    // Running English prose has a function-word density around 0.35-0.5.
    double p_en = latin_share * std::min(1.0, density / 0.25);
    p_en = std::clamp(p_en, 0.0, 1.0);
    if (p_en >= 0.5) return {"en", p_en, p_en};
    return {"xx", 1.0 - p_en, p_en};
}

double score_whole_document(const Document& doc, const LanguageScorer& scorer) {
    if (doc.text.empty()) return 0.0;
    std::string flat = doc.text;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    return english_confidence(scorer.score(flat));
}

double weighted_line_score(std::span<const std::size_t> byte_lengths, std::span<const double> probabilities) {
    if (byte_lengths.size() != probabilities.size()) {
        throw std::invalid_argument("weighted_line_score: length/probability size mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < byte_lengths.size(); ++i) {
        num += static_cast<double>(byte_lengths[i]) * probabilities[i];
        den += static_cast<double>(byte_lengths[i]);
    }
    return den > 0.0 ? num / den : 0.0;
}

double score_weighted_lines(const Document& doc, const LanguageScorer& scorer) {
    std::vector<std::size_t> lengths;
    std::vector<double> probs;
    for (auto line : doc.lines()) {
        if (line.empty()) continue;
        lengths.push_back(line.size());
        probs.push_back(english_confidence(scorer.score(line)));
    }
    return weighted_line_score(lengths, probs);
}

RoutingDecision route(const Document& doc, const LidConfig& config, const LanguageScorer& scorer) {
    RoutingDecision decision;
    try {
        decision.score = config.strategy == Strategy::whole_document ? score_whole_document(doc, scorer)
                                                                     : score_weighted_lines(doc, scorer);
    } catch (const std::exception& e) {
        spdlog::warn("language scorer failed on document {}: {}", doc.id, e.what());
        decision.score = 0.0;
    }
    decision.partition = decision.score >= config.threshold ? Partition::english : Partition::multilingual;
    return decision;
}

}  // namespace curate::langid
