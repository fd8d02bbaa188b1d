#include "curate/lineclean.hpp"

#include <algorithm>
#include <cctype>

#include "curate/text.hpp"

namespace curate::lineclean {

namespace {

constexpr std::array<std::string_view, kLineClassCount> kClassNames = {
    "LineLength",  "UppercaseRatio", "NumericLine", "CounterLine", "SubstringModifier", "CodeArtifact",
    "Navigation",  "CookieBanner",   "SocialCTA",   "FormElement", "Timestamp",
};

bool is_digit_ascii(char c) { return c >= '0' && c <= '9'; }

std::size_t digit_run(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_digit_ascii(s[j])) ++j;
    return j - i;
}

// \d+([.,]\d+)*[kmb]?
bool is_count_token(std::string_view t) {
    std::size_t i = digit_run(t, 0);
    if (i == 0) return false;
    while (i + 1 < t.size() && (t[i] == '.' || t[i] == ',') && is_digit_ascii(t[i + 1])) {
        ++i;
        i += digit_run(t, i);
    }
    if (i < t.size()) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(t[i])));
        if (c == 'k' || c == 'm' || c == 'b') ++i;
    }
    return i == t.size();
}

std::string_view strip_punct_edges(std::string_view t) {
    auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    while (!t.empty() && punct(t.front())) t.remove_prefix(1);
    while (!t.empty() && punct(t.back())) t.remove_suffix(1);
    return t;
}

// D{1,2}[/-.]D{1,2}[/-.]D{4}  or  D{4}[-/]D{1,2}[-/]D{1,2}
bool is_date_token(std::string_view t) {
    std::size_t a = digit_run(t, 0);
    if (a == 0 || a >= t.size()) return false;
    char sep = t[a];
    if (sep != '/' && sep != '-' && sep != '.') return false;
    std::size_t b = digit_run(t, a + 1);
    if (b == 0 || b > 2 || a + 1 + b >= t.size() || t[a + 1 + b] != sep) return false;
    std::size_t c_start = a + 2 + b;
    std::size_t c = digit_run(t, c_start);
    if (c_start + c != t.size()) return false;
    if (a <= 2 && c == 4) return true;
    return a == 4 && sep != '.' && c >= 1 && c <= 2;
}

bool is_meridiem(std::string_view t) {
    if (t.size() == 2) {
        char a = static_cast<char>(std::tolower(static_cast<unsigned char>(t[0])));
        char m = static_cast<char>(std::tolower(static_cast<unsigned char>(t[1])));
        return (a == 'a' || a == 'p') && m == 'm';
    }
    if (t.size() == 4) {  // a.m. / p.m.
        char a = static_cast<char>(std::tolower(static_cast<unsigned char>(t[0])));
        char m = static_cast<char>(std::tolower(static_cast<unsigned char>(t[2])));
        return (a == 'a' || a == 'p') && t[1] == '.' && m == 'm' && t[3] == '.';
    }
    return false;
}

// HH:MM[:SS][AM|PM], optionally suffixed with 'Z'
bool is_time_token(std::string_view t) {
    std::size_t h = digit_run(t, 0);
    if (h == 0 || h > 2 || h >= t.size() || t[h] != ':') return false;
    std::size_t i = h + 1;
    if (digit_run(t, i) != 2) return false;
    i += 2;
    if (i < t.size() && t[i] == ':') {
        if (digit_run(t, i + 1) != 2) return false;
        i += 3;
    }
    auto rest = t.substr(i);
    return rest.empty() || rest == "Z" || is_meridiem(rest);
}

}  // namespace

std::string_view line_class_name(LineClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<LineClass> line_class_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLineClassCount; ++i) {
        if (kClassNames[i] == name) return static_cast<LineClass>(i);
    }
    return std::nullopt;
}

LineHeuristicConfig LineHeuristicConfig::core() {
    LineHeuristicConfig c;
    for (auto cls : {LineClass::LineLength, LineClass::UppercaseRatio, LineClass::NumericLine,
                     LineClass::CounterLine, LineClass::SubstringModifier}) {
        c.set_enabled(cls, true);
    }
    return c;
}

LineHeuristicConfig LineHeuristicConfig::full() {
    LineHeuristicConfig c;
    c.enabled.fill(true);
    return c;
}

std::size_t CleanResult::total_lines_removed() const {
    std::size_t n = 0;
    for (auto v : lines_removed) n += v;
    return n;
}

double uppercase_ratio(std::string_view line) {
    std::size_t upper = 0;
    std::size_t lower = 0;
    std::size_t i = 0;
    while (i < line.size()) {
        char32_t c = text::next_code_point(line, i);
        if (text::is_upper(c)) {
            ++upper;
        } else if (text::is_lower(c)) {
            ++lower;
        }
    }
    if (upper + lower == 0) return 0.0;
    return static_cast<double>(upper) / static_cast<double>(upper + lower);
}

bool is_counter_line(std::string_view line, const LineHeuristicConfig& config) {
    auto words = text::split_words(line);
    if (words.size() < 2 || words.size() > config.counter_max_words) return false;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        if (!is_count_token(strip_punct_edges(words[i]))) continue;
        std::string next = text::ascii_lower(strip_punct_edges(words[i + 1]));
        if (std::find(config.engagement_words.begin(), config.engagement_words.end(), next) !=
            config.engagement_words.end()) {
            return true;
        }
    }
    return false;
}

bool is_navigation_line(std::string_view line, const LineHeuristicConfig& config) {
    const auto& seps = config.breadcrumb_separators;
    std::size_t segments = 0;
    std::size_t current = 0;
    std::size_t total_words = 0;
    bool saw_separator = false;
    bool ok = true;
    auto close_segment = [&] {
        if (current == 0) return;
        ++segments;
        if (current > config.breadcrumb_max_segment_words) ok = false;
        current = 0;
    };
    text::for_each_word(line, [&](std::string_view w) {
        if (std::find(seps.begin(), seps.end(), w) != seps.end()) {
            saw_separator = true;
            close_segment();
        } else {
            ++current;
            ++total_words;
        }
    });
    close_segment();
    return ok && saw_separator && segments >= config.breadcrumb_min_segments &&
           total_words <= config.breadcrumb_max_words;
}

bool is_code_line(std::string_view line, const LineHeuristicConfig& config) {
    auto t = text::trim(line);
    if (t.empty()) return false;
    std::string_view first;
    text::for_each_word(t, [&](std::string_view w) {
        if (first.empty()) first = w;
    });
    for (const auto& tok : config.code_start_tokens) {
        if (tok == "var" || tok == "let" || tok == "const") {
            // Keywords double as English words; require an assignment or statement end.
            if (first == tok && t.size() > tok.size() &&
                (t.find('=') != std::string_view::npos || t.find(';') != std::string_view::npos)) {
                return true;
            }
        } else if (t.starts_with(tok)) {
            return true;
        }
    }
    return false;
}

bool is_timestamp_line(std::string_view line) {
    auto t = text::trim(line);
    if (t.empty() || !is_digit_ascii(t.front())) return false;
    bool any = false;
    bool ok = true;
    bool after_time = false;
    text::for_each_word(t, [&](std::string_view w) {
        if (!ok) return;
        while (!w.empty() && w.back() == ',') w.remove_suffix(1);
        if (w.empty()) {
            ok = false;
            return;
        }
        if (is_date_token(w)) {
            any = true;
            after_time = false;
            return;
        }
        if (is_time_token(w)) {
            any = true;
            after_time = true;
            return;
        }
        if (after_time && is_meridiem(w)) {
            after_time = false;
            return;
        }
        auto tpos = w.find('T');
        if (tpos != std::string_view::npos && is_date_token(w.substr(0, tpos)) && is_time_token(w.substr(tpos + 1))) {
            any = true;
            after_time = true;
            return;
        }
        ok = false;
    });
    return ok && any;
}

std::optional<LineClass> classify_line(std::string_view line, const LineHeuristicConfig& config) {
    if (text::is_blank(line)) return std::nullopt;
    const std::size_t words = text::count_whitespace_words(line);

    if (config.is_enabled(LineClass::LineLength) && words < config.min_words_per_line) return LineClass::LineLength;
    if (config.is_enabled(LineClass::UppercaseRatio) && uppercase_ratio(line) > config.max_uppercase_ratio) {
        return LineClass::UppercaseRatio;
    }
    if (config.is_enabled(LineClass::NumericLine)) {
        std::size_t digits = 0;
        std::size_t chars = 0;
        std::size_t i = 0;
        while (i < line.size()) {
            char32_t c = text::next_code_point(line, i);
            if (text::is_whitespace(c)) continue;
            ++chars;
            if (text::is_digit(c)) ++digits;
        }
        if (chars > 0 && static_cast<double>(digits) / static_cast<double>(chars) > config.max_numeric_ratio) {
            return LineClass::NumericLine;
        }
    }
    if (config.is_enabled(LineClass::CounterLine) && is_counter_line(line, config)) return LineClass::CounterLine;

    std::string lower;
    auto lowered = [&]() -> const std::string& {
        if (lower.empty()) lower = text::ascii_lower(text::trim(line));
        return lower;
    };
    auto contains = [](const std::string& hay, const std::string& needle) {
        return hay.find(needle) != std::string::npos;
    };

    if (config.is_enabled(LineClass::SubstringModifier) && words <= config.marker_max_words) {
        for (const auto& m : config.boilerplate_markers) {
            if (contains(lowered(), m)) return LineClass::SubstringModifier;
        }
    }
    if (config.is_enabled(LineClass::CodeArtifact) && is_code_line(line, config)) return LineClass::CodeArtifact;
    if (config.is_enabled(LineClass::Navigation) && is_navigation_line(line, config)) return LineClass::Navigation;
    if (config.is_enabled(LineClass::CookieBanner)) {
        std::size_t hits = 0;
        for (const auto& p : config.cookie_phrases) {
            if (contains(lowered(), p)) ++hits;
        }
        if (hits >= config.cookie_min_phrases) return LineClass::CookieBanner;
    }
    if (config.is_enabled(LineClass::SocialCTA)) {
        for (const auto& p : config.social_cta_prefixes) {
            if (lowered().starts_with(p)) return LineClass::SocialCTA;
        }
    }
    if (config.is_enabled(LineClass::FormElement)) {
        std::string_view label = lowered();
        while (!label.empty() && (label.back() == ':' || label.back() == '*' || text::is_ascii_space(label.back()))) {
            label.remove_suffix(1);
        }
        for (const auto& f : config.form_labels) {
            if (label == f) return LineClass::FormElement;
        }
    }
    if (config.is_enabled(LineClass::Timestamp) && is_timestamp_line(line)) return LineClass::Timestamp;
    return std::nullopt;
}

CleanResult clean_lines(Document& doc, const LineHeuristicConfig& config, const WordCounter& counter) {
    CleanResult result;
    result.words_before = counter(doc.text);

    auto lines = doc.lines();
    std::vector<std::string_view> kept;
    kept.reserve(lines.size());
    bool any_content = false;
    bool changed = false;
    for (auto line : lines) {
        auto cls = classify_line(line, config);
        if (!cls) {
            kept.push_back(line);
            if (!text::is_blank(line)) any_content = true;
            continue;
        }
        changed = true;
        auto idx = static_cast<std::size_t>(*cls);
        ++result.lines_removed[idx];
        result.words_removed[idx] += counter(line);
    }

    if (changed) doc.set_lines(kept);
    result.words_after = changed ? counter(doc.text) : result.words_before;
    result.rejected = !any_content;
    return result;
}

Verdict word_removal_gate(std::size_t w_pre, std::size_t w_post, double max_ratio) {
    const std::string stage(kWordRemovalStage);
    if (w_pre == 0) return Verdict::reject(stage, "WordRemovalRatio");
    std::size_t removed = w_pre > w_post ? w_pre - w_post : 0;
    double rho = static_cast<double>(removed) / static_cast<double>(w_pre);
    if (rho > max_ratio) return Verdict::reject(stage, "WordRemovalRatio");
    return Verdict::keep(stage);
}

}  // namespace curate::lineclean
