#include "curate/docquality.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>

#include "curate/text.hpp"

namespace curate::docquality {

const StopWords& gopher_stop_words() {
    static const StopWords words = {"the", "be", "to", "of", "and", "that", "have", "with"};
    return words;
}

const StopWords& english_stop_words() {
    static const StopWords words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
        "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
        "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
        "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
        "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
        "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
        "for", "with", "about", "against", "between", "into", "through", "during", "before",
        "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
        "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
        "nor", "not", "only", "own", "same", "so", "than", "too", "very", "can", "will", "just",
        "don't", "should", "should've", "now", "would", "could", "also", "may", "might", "must",
        "shall", "it's", "i'm", "you're", "we're", "they're", "that's", "there's", "isn't",
        "aren't", "wasn't", "weren't", "doesn't", "didn't", "won't", "can't", "couldn't",
        "wouldn't", "shouldn't", "haven't", "hasn't", "hadn't", "let's", "upon", "yet",
    };
    return words;
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    std::size_t pos = haystack.find(needle);
    while (pos != std::string_view::npos) {
        ++n;
        pos = haystack.find(needle, pos + needle.size());
    }
    return n;
}

std::string_view trim_left(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && text::is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
    return s.substr(b);
}

std::string_view trim_right(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && text::is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(0, e);
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::vector<std::string_view> non_blank_lines(std::string_view t) {
    std::vector<std::string_view> out;
    for (auto line : text::split_lines(t)) {
        if (!text::is_blank(line)) out.push_back(line);
    }
    return out;
}

}  // namespace

GopherQualityMetrics gopher_quality_metrics(std::string_view t, const StopWords& stop_words,
                                            const GopherQualityOptions& options) {
    GopherQualityMetrics m;
    std::size_t word_chars = 0;
    std::size_t alpha_words = 0;
    text::for_each_word(t, [&](std::string_view w) {
        ++m.words;
        word_chars += text::utf8_length(w);
        if (text::contains_alpha(w)) ++alpha_words;
        if (stop_words.count(text::normalize_token(w))) ++m.stop_words;
    });
    m.mean_word_len = ratio(static_cast<double>(word_chars), static_cast<double>(m.words));
    m.alpha_word_ratio = ratio(static_cast<double>(alpha_words), static_cast<double>(m.words));

    std::size_t symbols = 0;
    for (const auto& s : options.symbols) symbols += count_occurrences(t, s);
    m.symbol_word_ratio = ratio(static_cast<double>(symbols), static_cast<double>(m.words));

    auto lines = non_blank_lines(t);
    std::size_t bullets = 0;
    std::size_t ellipses = 0;
    for (auto line : lines) {
        auto left = trim_left(line);
        for (const auto& b : options.bullets) {
            if (left.starts_with(b)) {
                ++bullets;
                break;
            }
        }
        auto right = trim_right(line);
        if (right.ends_with("...") || right.ends_with("…")) ++ellipses;
    }
    m.bullet_line_ratio = ratio(static_cast<double>(bullets), static_cast<double>(lines.size()));
    m.ellipsis_line_ratio = ratio(static_cast<double>(ellipses), static_cast<double>(lines.size()));
    return m;
}

Verdict gopher_quality(const Document& doc, const GopherQualityThresholds& th, const StopWords& stop_words,
                       const GopherQualityOptions& options) {
    const std::string stage(kGopherQualityStage);
    GopherQualityMetrics m = gopher_quality_metrics(doc.text, stop_words, options);
    if (m.words < th.min_words) return Verdict::reject(stage, "TooFewWords");
    if (m.words > th.max_words) return Verdict::reject(stage, "TooManyWords");
    if (m.mean_word_len < th.min_mean_word_len || m.mean_word_len > th.max_mean_word_len) {
        return Verdict::reject(stage, "AvgWordLen");
    }
    if (m.symbol_word_ratio > th.max_symbol_word_ratio) return Verdict::reject(stage, "SymbolWordRatio");
    if (m.bullet_line_ratio > th.max_bullet_line_ratio) return Verdict::reject(stage, "BulletLineRatio");
    if (m.ellipsis_line_ratio > th.max_ellipsis_line_ratio) return Verdict::reject(stage, "EllipsisLineRatio");
    if (m.alpha_word_ratio < th.min_alpha_word_ratio) return Verdict::reject(stage, "AlphaWordsRatio");
    if (m.stop_words < th.min_stop_words) return Verdict::reject(stage, "TooFewStopWords");
    return Verdict::keep(stage);
}

NemoMetrics nemo_metrics(std::string_view t, const urlstage::TldList& tlds) {
    NemoMetrics m;
    std::size_t alnum = 0, digits = 0, spaces = 0, parens = 0;
    std::size_t i = 0;
    while (i < t.size()) {
        char32_t c = text::next_code_point(t, i);
        ++m.total_chars;
        if (text::is_digit(c)) {
            ++digits;
            ++alnum;
        } else if (text::is_alpha(c)) {
            ++alnum;
        } else if (text::is_whitespace(c)) {
            ++spaces;
        }
        if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}') ++parens;
    }
    std::size_t url_chars = 0;
    text::for_each_word(t, [&](std::string_view w) {
        if (urlstage::is_url_token(w, tlds)) url_chars += text::utf8_length(w);
    });
    const double total = static_cast<double>(m.total_chars);
    m.non_alnum_ratio = ratio(static_cast<double>(m.total_chars - alnum - spaces), total);
    m.numeric_ratio = ratio(static_cast<double>(digits), total);
    m.url_char_ratio = ratio(static_cast<double>(url_chars), total);
    m.whitespace_ratio = ratio(static_cast<double>(spaces), total);
    m.paren_ratio = ratio(static_cast<double>(parens), total);
    return m;
}

Verdict nemo(const Document& doc, const NemoThresholds& th, const urlstage::TldList& tlds) {
    const std::string stage(kNemoStage);
    if (doc.text.empty()) return Verdict::reject(stage, "NonAlphaNumericRatio");
    NemoMetrics m = nemo_metrics(doc.text, tlds);
    if (m.non_alnum_ratio > th.max_non_alnum_ratio) return Verdict::reject(stage, "NonAlphaNumericRatio");
    if (m.numeric_ratio > th.max_numeric_ratio) return Verdict::reject(stage, "NumericRatio");
    if (m.url_char_ratio > th.max_url_char_ratio) return Verdict::reject(stage, "UrlCharRatio");
    if (m.whitespace_ratio > th.max_whitespace_ratio) return Verdict::reject(stage, "WhitespaceRatio");
    if (m.paren_ratio > th.max_paren_ratio) return Verdict::reject(stage, "ParenthesesRatio");
    return Verdict::keep(stage);
}

namespace {

DuplicateUnits duplicate_units(const std::vector<std::string_view>& units) {
    DuplicateUnits d;
    if (units.empty()) return d;
    std::unordered_set<std::string_view> seen;
    seen.reserve(units.size() * 2);
    std::size_t dup = 0;
    std::size_t dup_chars = 0;
    std::size_t total_chars = 0;
    for (auto u : units) {
        std::size_t len = text::utf8_length(u);
        total_chars += len;
        if (!seen.insert(u).second) {
            ++dup;
            dup_chars += len;
        }
    }
    d.frac = ratio(static_cast<double>(dup), static_cast<double>(units.size()));
    d.char_frac = ratio(static_cast<double>(dup_chars), static_cast<double>(total_chars));
    return d;
}

std::vector<std::string_view> split_paragraphs(std::string_view t) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '\n' && i + 1 < t.size() && t[i + 1] == '\n') {
            auto para = t.substr(start, i - start);
            if (!text::is_blank(para)) out.push_back(para);
            while (i < t.size() && t[i] == '\n') ++i;
            start = i;
        } else {
            ++i;
        }
    }
    auto last = t.substr(start);
    if (!text::is_blank(last)) out.push_back(last);
    return out;
}

/// Word n-grams of a text grouped by exact equality. Words are interned to
/// integer ids and n-gram hashes grow one word at a time, so asking for
/// n = 2, 3, ... 10 in turn costs one pass per n. Hash matches are confirmed
/// against the ids, so grouping never depends on the hash being collision free.
class NGramIndex {
public:
    explicit NGramIndex(const std::vector<std::string_view>& words) {
        const std::size_t count = words.size();
        ids_.reserve(count);
        lens_.reserve(count);
        prefix_.assign(count + 1, 0);
        std::vector<std::uint32_t> slots(table_size(count), 0);
        const std::size_t mask = slots.size() - 1;
        std::vector<std::string_view> vocab;
        std::hash<std::string_view> hasher;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t at = hasher(words[i]) & mask;
            while (slots[at] != 0 && vocab[slots[at] - 1] != words[i]) at = (at + 1) & mask;
            if (slots[at] == 0) {
                vocab.push_back(words[i]);
                slots[at] = static_cast<std::uint32_t>(vocab.size());
            }
            ids_.push_back(slots[at] - 1);
            std::size_t len = text::utf8_length(words[i]);
            lens_.push_back(len);
            prefix_[i + 1] = prefix_[i] + len;
        }
    }

    std::size_t size() const { return ids_.size(); }
    std::size_t total_chars() const { return prefix_.back(); }
    std::size_t chars(std::size_t begin, std::size_t end) const { return prefix_[end] - prefix_[begin]; }
    std::size_t word_len(std::size_t i) const { return lens_[i]; }

    /// Groups the n-grams; afterwards group_of()[p] names the group of the
    /// n-gram starting at p and group_sizes() holds each group's size.
    void group(std::size_t n) {
        if (n < hashed_n_ || hashes_.empty()) {
            hashes_.assign(ids_.size(), 0x9e3779b97f4a7c15ULL);
            hashed_n_ = 0;
        }
        for (; hashed_n_ < n; ++hashed_n_) {
            for (std::size_t p = 0; p + hashed_n_ < ids_.size(); ++p) {
                hashes_[p] = mix(hashes_[p] ^ ids_[p + hashed_n_]);
            }
        }
        const std::size_t count = ids_.size() - n + 1;
        std::vector<std::uint32_t> slots(table_size(count), 0);
        const std::size_t mask = slots.size() - 1;
        group_of_.resize(count);
        sizes_.clear();
        reps_.clear();
        for (std::size_t p = 0; p < count; ++p) {
            const std::uint64_t h = hashes_[p];
            std::size_t at = h & mask;
            while (slots[at] != 0) {
                std::size_t rep = reps_[slots[at] - 1];
                if (hashes_[rep] == h && std::equal(ids_.begin() + p, ids_.begin() + p + n, ids_.begin() + rep)) break;
                at = (at + 1) & mask;
            }
            if (slots[at] == 0) {
                reps_.push_back(p);
                sizes_.push_back(0);
                slots[at] = static_cast<std::uint32_t>(reps_.size());
            }
            group_of_[p] = slots[at] - 1;
            ++sizes_[slots[at] - 1];
        }
    }

    const std::vector<std::uint32_t>& group_of() const { return group_of_; }
    const std::vector<std::uint32_t>& group_sizes() const { return sizes_; }

private:
    static std::size_t table_size(std::size_t items) { return std::bit_ceil(std::max<std::size_t>(items * 2, 16)); }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::vector<std::uint32_t> ids_;
    std::vector<std::size_t> lens_;
    std::vector<std::size_t> prefix_;
    std::vector<std::uint64_t> hashes_;
    std::size_t hashed_n_ = 0;
    std::vector<std::uint32_t> group_of_;
    std::vector<std::uint32_t> sizes_;
    std::vector<std::size_t> reps_;
};

double top_ngram_frac(NGramIndex& index, std::size_t n) {
    if (index.total_chars() == 0 || n == 0 || index.size() < n) return 0.0;
    index.group(n);
    const auto& sizes = index.group_sizes();
    std::uint32_t best_count = *std::max_element(sizes.begin(), sizes.end());
    if (best_count < 2) return 0.0;
    // Greedy non-overlapping cover of every group that shares the top count.
    std::vector<std::size_t> cover(sizes.size(), 0);
    std::vector<std::size_t> last_end(sizes.size(), 0);
    const auto& group_of = index.group_of();
    for (std::size_t p = 0; p < group_of.size(); ++p) {
        const auto g = group_of[p];
        if (sizes[g] != best_count || p < last_end[g]) continue;
        cover[g] += index.chars(p, p + n);
        last_end[g] = p + n;
    }
    std::size_t best_cover = *std::max_element(cover.begin(), cover.end());
    return ratio(static_cast<double>(best_cover), static_cast<double>(index.total_chars()));
}

double dup_ngram_frac(NGramIndex& index, std::size_t n) {
    if (index.total_chars() == 0 || n == 0 || index.size() < n) return 0.0;
    index.group(n);
    const auto& sizes = index.group_sizes();
    const auto& group_of = index.group_of();
    std::vector<int> diff(index.size() + 1, 0);
    bool any = false;
    for (std::size_t p = 0; p < group_of.size(); ++p) {
        if (sizes[group_of[p]] < 2) continue;
        any = true;
        ++diff[p];
        --diff[p + n];
    }
    if (!any) return 0.0;
    std::size_t covered = 0;
    int depth = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        depth += diff[i];
        if (depth > 0) covered += index.word_len(i);
    }
    return ratio(static_cast<double>(covered), static_cast<double>(index.total_chars()));
}

}  // namespace

DuplicateUnits duplicate_lines(std::string_view t) { return duplicate_units(non_blank_lines(t)); }

DuplicateUnits duplicate_paragraphs(std::string_view t) { return duplicate_units(split_paragraphs(t)); }

double top_ngram_char_frac(const std::vector<std::string_view>& words, std::size_t n) {
    NGramIndex index(words);
    return top_ngram_frac(index, n);
}

double dup_ngram_char_frac(const std::vector<std::string_view>& words, std::size_t n) {
    NGramIndex index(words);
    return dup_ngram_frac(index, n);
}

RepetitionMetrics repetition_metrics(std::string_view t) {
    RepetitionMetrics m;
    auto lines = duplicate_lines(t);
    m.dup_line_frac = lines.frac;
    m.dup_line_char_frac = lines.char_frac;
    auto paras = duplicate_paragraphs(t);
    m.dup_para_frac = paras.frac;
    m.dup_para_char_frac = paras.char_frac;
    NGramIndex index(text::split_words(t));
    for (std::size_t n = 2; n <= 4; ++n) m.top_ngram_char_frac[n - 2] = top_ngram_frac(index, n);
    for (std::size_t n = 5; n <= 10; ++n) m.dup_ngram_char_frac[n - 5] = dup_ngram_frac(index, n);
    return m;
}

Verdict gopher_repetition(const Document& doc, const RepetitionThresholds& th) {
    const std::string stage(kRepetitionStage);
    auto lines = duplicate_lines(doc.text);
    if (lines.frac > th.dup_line_frac) return Verdict::reject(stage, "DupLineFrac");
    if (lines.char_frac > th.dup_line_char_frac) return Verdict::reject(stage, "DupLineCharFrac");
    auto paras = duplicate_paragraphs(doc.text);
    if (paras.frac > th.dup_para_frac) return Verdict::reject(stage, "DupParFrac");
    if (paras.char_frac > th.dup_para_char_frac) return Verdict::reject(stage, "DupParCharFrac");
    NGramIndex index(text::split_words(doc.text));
    for (std::size_t n = 2; n <= 4; ++n) {
        if (top_ngram_frac(index, n) > th.top_ngram_char_frac[n - 2]) return Verdict::reject(stage, "TopNGramCharFrac");
    }
    for (std::size_t n = 5; n <= 10; ++n) {
        if (dup_ngram_frac(index, n) > th.dup_ngram_char_frac[n - 5]) return Verdict::reject(stage, "DupNGramCharFrac");
    }
    return Verdict::keep(stage);
}

double unclosed_bracket_ratio(std::string_view t) {
    std::vector<char> stack;
    std::size_t total = 0;
    std::size_t unmatched = 0;
    for (char c : t) {
        switch (c) {
            case '(':
            case '[':
            case '{':
                ++total;
                stack.push_back(c);
                break;
            case ')':
            case ']':
            case '}': {
                ++total;
                char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
                if (!stack.empty() && stack.back() == open) {
                    stack.pop_back();
                } else {
                    ++unmatched;
                }
                break;
            }
            default:
                break;
        }
    }
    unmatched += stack.size();
    return ratio(static_cast<double>(unmatched), static_cast<double>(total));
}

double stop_word_ratio(std::string_view t, const StopWords& stop_words) {
    std::size_t words = 0;
    std::size_t hits = 0;
    text::for_each_word(t, [&](std::string_view w) {
        ++words;
        if (stop_words.count(text::normalize_token(w))) ++hits;
    });
    return ratio(static_cast<double>(hits), static_cast<double>(words));
}

Verdict custom_quality(const Document& doc, const CustomQualityThresholds& th, const StopWords& stop_words,
                       const WordCounter& counter) {
    const std::string stage(kCustomQualityStage);
    if (counter(doc.text) < th.min_tokens) return Verdict::reject(stage, "TooFewTokens");
    if (stop_word_ratio(doc.text, stop_words) < th.min_stop_word_ratio) return Verdict::reject(stage, "StopWordRatio");
    if (unclosed_bracket_ratio(doc.text) > th.max_unclosed_bracket_ratio) {
        return Verdict::reject(stage, "UnclosedBracketRatio");
    }
    return Verdict::keep(stage);
}

std::vector<std::string> word_tokens(std::string_view t) {
    std::vector<std::string> out;
    std::size_t i = 0;
    std::size_t start = std::string_view::npos;
    while (i < t.size()) {
        std::size_t at = i;
        char32_t c = text::next_code_point(t, i);
        bool alnum = text::is_alnum(c);
        if (alnum && start == std::string_view::npos) start = at;
        if (!alnum && start != std::string_view::npos) {
            out.push_back(text::normalize_token(t.substr(start, at - start)));
            start = std::string_view::npos;
        }
    }
    if (start != std::string_view::npos) out.push_back(text::normalize_token(t.substr(start)));
    return out;
}

BadwordsLexicon::BadwordsLexicon(const std::vector<std::string>& terms) {
    for (const auto& term : terms) {
        auto tokens = word_tokens(term);
        if (tokens.empty()) continue;
        by_first_[tokens.front()].push_back(std::move(tokens));
    }
}

BadwordsLexicon BadwordsLexicon::load(const std::string& path) { return BadwordsLexicon(urlstage::load_list(path)); }

bool BadwordsLexicon::matches(std::string_view t) const {
    if (by_first_.empty()) return false;
    auto tokens = word_tokens(t);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = by_first_.find(tokens[i]);
        if (it == by_first_.end()) continue;
        for (const auto& seq : it->second) {
            if (i + seq.size() <= tokens.size() && std::equal(seq.begin(), seq.end(), tokens.begin() + i)) return true;
        }
    }
    return false;
}

Verdict badwords_document_filter(const Document& doc, const BadwordsLexicon& lexicon) {
    const std::string stage(kBadwordsStage);
    if (lexicon.matches(doc.text)) return Verdict::reject(stage, "Badwords");
    return Verdict::keep(stage);
}

}  // namespace curate::docquality
