#pragma once

// Seeded generator of web-like test documents. Everything is derived from
// one mt19937_64 stream, so a seed pins the corpus byte for byte.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "curate/corpus.hpp"
#include "curate/lineclean.hpp"
#include "curate/rng.hpp"

namespace curate::synth {

inline const std::vector<std::string>& function_words() {
    static const std::vector<std::string> words = {
        "the", "of",   "and",  "to",    "a",    "in",   "is",   "that", "for",   "it",   "as",  "was",
        "with", "be",  "by",   "on",    "not",  "this", "are",  "or",   "from",  "at",   "which", "but",
        "have", "an",  "they", "were",  "their", "we",  "can",  "has",  "there", "been", "will", "would",
        "more", "when", "who", "its",   "also", "than", "these", "into", "over",  "about"};
    return words;
}

/// About eight thousand distinct pronounceable content words.
inline const std::vector<std::string>& content_words() {
    static const std::vector<std::string> words = [] {
        const char* syllables[] = {"ka",  "lo",  "mer", "tin", "sa",  "ve", "ro",  "dan", "pel", "ti",
                                   "gor", "ma",  "lu",  "sen", "bra", "do", "fi",  "nel", "qua", "ris"};
        std::vector<std::string> out;
        for (auto* a : syllables) {
            for (auto* b : syllables) {
                out.push_back(std::string(a) + b);
                for (auto* c : syllables) out.push_back(std::string(a) + b + c);
            }
        }
        rng::Engine eng(7);
        rng::shuffle(out, eng);
        return out;
    }();
    return words;
}

inline const std::vector<std::string>& foreign_function_words() {
    static const std::vector<std::string> words = {"le",   "la",  "les", "de",  "des",   "et",  "un",
                                                   "une",  "est", "dans", "pour", "que", "qui", "pas",
                                                   "sur",  "avec", "au",  "du",  "ce",   "il",  "elle"};
    return words;
}

struct WebOptions {
    std::size_t min_paragraphs = 3;
    std::size_t max_paragraphs = 8;
    std::size_t min_paragraph_words = 40;
    std::size_t max_paragraph_words = 120;
    double p_boilerplate = 0.30;  // document gets one or two boilerplate lines
    double p_foreign = 0.03;
    double p_short = 0.03;
    double p_repeat_paragraph = 0.04;  // a paragraph copied from an earlier document
    double p_inline_url = 0.05;
    double p_bullets = 0.02;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : eng_(seed) {}

    rng::Engine& engine() { return eng_; }
    std::size_t uniform(std::size_t n) { return static_cast<std::size_t>(rng::uniform_index(eng_, n)); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + uniform(hi - lo + 1); }
    double real() { return rng::uniform_real(eng_); }
    bool chance(double p) { return real() < p; }

    const std::string& content_word() { return pick(content_words()); }
    const std::string& function_word() { return pick(function_words()); }

    std::string sentence(std::size_t min_words = 8, std::size_t max_words = 20) {
        return sentence_of(between(min_words, max_words));
    }

    std::string sentence_of(std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) s.push_back(' ');
            s += chance(0.42) ? function_word() : content_word();
            if (i + 1 < n && i > 2 && chance(0.06)) s.push_back(',');
        }
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
        s.push_back('.');
        return s;
    }

    /// Sentences on one line until at least `min_words` words.
    std::string paragraph(std::size_t min_words, std::size_t max_words) {
        std::size_t target = between(min_words, max_words);
        std::string p;
        std::size_t words = 0;
        while (words < target) {
            std::size_t left = target - words;
            std::size_t n = left < 8 ? 8 : between(8, std::min<std::size_t>(left, 20));
            if (!p.empty()) p.push_back(' ');
            p += sentence_of(n);
            words += n;
        }
        return p;
    }

    std::string foreign_paragraph(std::size_t words) {
        std::string p;
        for (std::size_t i = 0; i < words; ++i) {
            if (i) p.push_back(' ');
            if (chance(0.45)) {
                p += pick(foreign_function_words());
            } else {
                p += content_word();
                p += chance(0.5) ? "é" : "è";
            }
        }
        p.push_back('.');
        return p;
    }

    /// A line that the given class detects (and no earlier class does).
    std::string boilerplate_line(lineclean::LineClass cls) {
        using lineclean::LineClass;
        switch (cls) {
            case LineClass::LineLength:
                return pick(std::vector<std::string>{"Menu", "Advertisement", "Share", "Comments", "Navigation"});
            case LineClass::UppercaseRatio: {
                std::string s = upper(content_word());
                for (std::size_t i = between(1, 4); i > 0; --i) s += " " + upper(content_word());
                return s;
            }
            case LineClass::NumericLine:
                return std::to_string(between(1, 99999)) + " " + std::to_string(between(1, 99999));
            case LineClass::CounterLine: {
                static const std::vector<std::string> units = {"", "K", "M", "k"};
                static const std::vector<std::string> what = {"likes", "shares", "comments", "views", "followers"};
                return std::to_string(between(1, 999)) + pick(units) + " " + pick(what);
            }
            case LineClass::SubstringModifier:
                return pick(std::vector<std::string>{"Read more", "Read more...", "3 items in cart",
                                                     "Sign in to continue", "Add to cart", "Back to top"});
            case LineClass::CodeArtifact:
                return pick(std::vector<std::string>{"var total = price * qty;", "function(e) { return e.value; }",
                                                     "@media screen and (max-width: 600px) {",
                                                     "$.ajax({url: endpoint});", "const result = compute(a, b);"});
            case LineClass::Navigation:
                return "Home > " + cap(content_word()) + " > " + cap(content_word());
            case LineClass::CookieBanner:
                return pick(std::vector<std::string>{
                    "We use cookies to improve your experience and ask for your consent to store them.",
                    "This site uses cookies. Accept all or review our privacy policy for details.",
                    "Under GDPR we need your consent before setting any cookie on this device."});
            case LineClass::SocialCTA:
                return pick(std::vector<std::string>{"Follow us on Twitter for the latest updates",
                                                     "Subscribe now and never miss a story",
                                                     "Share this article with your friends"});
            case LineClass::FormElement:
                return pick(std::vector<std::string>{"Email address:", "Confirm password *", "Remember me",
                                                     "First name:", "Phone number"});
            case LineClass::Timestamp:
                return pick(std::vector<std::string>{"2023-04-05 10:30", "12/05/2021 8:15 pm",
                                                     "2022-11-30 23:59:59", "05/11/2022 14:32"});
        }
        return "Menu";
    }

    lineclean::LineClass any_class() { return static_cast<lineclean::LineClass>(uniform(lineclean::kLineClassCount)); }

    /// Text of a web-like document with a title line and paragraphs separated by "\n".
    std::string web_text(const WebOptions& o) {
        if (chance(o.p_short)) return sentence(6, 14);
        if (chance(o.p_foreign)) {
            std::string t = foreign_paragraph(between(60, 160));
            t += "\n" + foreign_paragraph(between(60, 160));
            return t;
        }
        std::vector<std::string> lines;
        lines.push_back(cap(content_word()) + " " + function_word() + " " + cap(content_word()) + " " +
                        content_word());
        std::size_t paras = between(o.min_paragraphs, o.max_paragraphs);
        for (std::size_t i = 0; i < paras; ++i) {
            if (!history_.empty() && chance(o.p_repeat_paragraph)) {
                lines.push_back(history_[uniform(history_.size())]);
                continue;
            }
            std::string p = paragraph(o.min_paragraph_words, o.max_paragraph_words);
            if (chance(o.p_inline_url)) p += " See https://www." + content_word() + ".com/" + content_word() + " for more.";
            remember(p);
            lines.push_back(std::move(p));
        }
        if (chance(o.p_bullets)) {
            for (int i = 0; i < 3; ++i) lines.push_back("- " + sentence(6, 10));
        }
        if (chance(o.p_boilerplate)) {
            std::size_t n = between(1, 2);
            for (std::size_t i = 0; i < n; ++i) {
                auto line = boilerplate_line(any_class());
                std::size_t at = uniform(lines.size() + 1);
                lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), line);
            }
        }
        std::string t;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (i) t.push_back('\n');
            t += lines[i];
        }
        return t;
    }

    Document web_document(std::size_t index, const WebOptions& o = {}) {
        Document d;
        d.id = "doc-" + std::to_string(index);
        d.url = "https://www." + content_word() + ".com/" + content_word() + "/" + std::to_string(index);
        d.text = web_text(o);
        return d;
    }

    /// JSONL of web documents, at least `target_bytes` long.
    std::string web_jsonl(std::size_t target_bytes, const WebOptions& o = {}) {
        std::string out;
        out.reserve(target_bytes + 4096);
        for (std::size_t i = 0; out.size() < target_bytes; ++i) {
            Document d = web_document(i, o);
            Json j;
            j["id"] = d.id;
            j["url"] = d.url;
            j["text"] = d.text;
            out += j.dump();
            out.push_back('\n');
        }
        return out;
    }

    static std::string upper(std::string s) {
        for (auto& c : s) c = static_cast<char>(c >= 'a' && c <= 'z' ? c - 32 : c);
        return s;
    }
    static std::string cap(std::string s) {
        if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
        return s;
    }

private:
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[uniform(v.size())];
    }
    // Non-static overload so temporaries in boilerplate_line can be returned by value.
    std::string pick(std::vector<std::string>&& v) { return v[uniform(v.size())]; }

    void remember(const std::string& p) {
        if (history_.size() < 256) {
            history_.push_back(p);
        } else {
            history_[uniform(history_.size())] = p;
        }
    }

    rng::Engine eng_;
    std::vector<std::string> history_;
};

}  // namespace curate::synth
