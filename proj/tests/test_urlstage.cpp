#include <gtest/gtest.h>

#include <set>

#include "curate/text.hpp"
#include "curate/urlstage.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::urlstage;

namespace {

const std::vector<std::string> kTenSuffixes = {"com", "org", "net", "uk",     "co.uk",
                                               "ac.uk", "jp", "co.jp", "io", "github.io"};

// Independent reading of "registered domain": walk suffix candidates from the
// longest, then take one more label.
std::string oracle_registered(const std::string& host, const std::vector<std::string>& suffixes) {
    std::vector<std::string> labels;
    std::string cur;
    for (char c : host) {
        if (c == '.') {
            labels.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    labels.push_back(cur);
    if (labels.size() == 1) return host;
    std::set<std::string> listed(suffixes.begin(), suffixes.end());
    std::size_t cut = labels.size() - 1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string cand;
        for (std::size_t j = i; j < labels.size(); ++j) cand += (j == i ? "" : ".") + labels[j];
        if (listed.count(cand)) {
            cut = i;
            break;
        }
    }
    if (cut == 0) return host;
    std::string out;
    for (std::size_t j = cut - 1; j < labels.size(); ++j) out += (j == cut - 1 ? "" : ".") + labels[j];
    return out;
}

// Term occurrence bounded on both sides by '-', '.', '/' or the path ends.
bool oracle_delimited(const std::string& path, const std::string& term) {
    auto is_delim = [](char c) { return c == '-' || c == '.' || c == '/'; };
    for (std::size_t i = 0; i + term.size() <= path.size(); ++i) {
        if (path.compare(i, term.size(), term) != 0) continue;
        bool l = i == 0 || is_delim(path[i - 1]);
        bool r = i + term.size() == path.size() || is_delim(path[i + term.size()]);
        if (l && r) return true;
    }
    return false;
}

}  // namespace

TEST(RegisteredDomain, MatchesOracleOnRandomHosts) {
    SuffixList list(kTenSuffixes);
    synth::Generator g(5);
    const std::vector<std::string> tails = {"com", "co.uk", "uk", "ac.uk", "jp", "co.jp", "github.io",
                                            "io", "org", "xyz", "net", "de"};
    for (int i = 0; i < 2000; ++i) {
        std::string host;
        for (std::size_t n = g.between(0, 3); n > 0; --n) host += g.content_word() + ".";
        host += tails[g.uniform(tails.size())];
        EXPECT_EQ(list.registered_domain(host), oracle_registered(host, kTenSuffixes)) << host;
    }
}

TEST(RegisteredDomain, Examples) {
    SuffixList list(kTenSuffixes);
    EXPECT_EQ(list.registered_domain("bad.example.com"), "example.com");
    EXPECT_EQ(list.registered_domain("www.bbc.co.uk"), "bbc.co.uk");
    EXPECT_EQ(list.registered_domain("user.github.io"), "user.github.io");
    EXPECT_EQ(list.registered_domain("localhost"), "localhost");
    EXPECT_EQ(list.registered_domain("10.0.0.1"), "10.0.0.1");
}

TEST(Blocklist, RegisteredDomainLookup) {
    SuffixList suffixes(kTenSuffixes);
    DomainBlocklist bl({"example.com"});
    auto v = check_blocklist("http://bad.example.com/x", bl, suffixes);
    EXPECT_TRUE(v.rejected());
    EXPECT_EQ(v.stage, "ut1_blocklist");
    EXPECT_EQ(v.criterion, "BlockedDomain");
    EXPECT_FALSE(check_blocklist("http://example.org/", bl, suffixes).rejected());
    EXPECT_FALSE(check_blocklist("", bl, suffixes).rejected());
    EXPECT_TRUE(check_blocklist("HTTPS://User@Bad.EXAMPLE.com:8080/p?q", bl, suffixes).rejected());
    EXPECT_FALSE(check_blocklist("not a url at all", bl, suffixes).rejected());
}

TEST(StrictSubstring, Examples) {
    auto lex = SubstringLexicon::make(LexiconKind::strict, {"badterm"});
    EXPECT_TRUE(check_strict_substrings("http://x.com/foo-badterm.html", lex).rejected());
    EXPECT_FALSE(check_strict_substrings("http://x.com/embadtermed", lex).rejected());
    EXPECT_TRUE(check_strict_substrings("http://x.com/a/badterm/b", lex).rejected());
    EXPECT_FALSE(check_strict_substrings("http://badterm.com/", lex).rejected()) << "host is not the path";
    EXPECT_FALSE(check_strict_substrings("http://x.com/foo-badterm.html",
                                         SubstringLexicon::make(LexiconKind::strict, {}))
                     .rejected());
}

TEST(StrictSubstring, MatchesDelimiterScanOracle) {
    synth::Generator g(8);
    const std::vector<std::string> terms = {"kalo", "ro", "sen"};
    auto lex = SubstringLexicon::make(LexiconKind::strict, terms);
    const std::string pieces[] = {"kalo", "ro", "sen", "ma", "x", "kalosen", "roro"};
    const char delims[] = {'-', '.', '/', '_', '?'};
    for (int i = 0; i < 3000; ++i) {
        std::string path = "/";
        for (std::size_t n = g.between(1, 5); n > 0; --n) {
            path += pieces[g.uniform(7)];
            path.push_back(delims[g.uniform(4)]);  // '?' would end the path
        }
        bool expect = false;
        for (const auto& t : terms) expect = expect || oracle_delimited(path, t);
        EXPECT_EQ(check_strict_substrings("http://h.com" + path, lex).rejected(), expect) << path;
    }
}

TEST(HardSubstring, Examples) {
    auto lex = SubstringLexicon::make(LexiconKind::hard, {"badterm"});
    EXPECT_TRUE(check_hard_substrings("http://x.com/abadtermz", lex).rejected());
    EXPECT_FALSE(check_hard_substrings("http://x.com/fine", lex).rejected());
    auto whole = SubstringLexicon::make(LexiconKind::hard, {"http://x.com/"});
    EXPECT_TRUE(check_hard_substrings("http://x.com/", whole).rejected());
    EXPECT_TRUE(check_hard_substrings("http://BADTERM.com", lex).rejected());
}

TEST(SoftSubstring, DistinctTermsCount) {
    auto lex = SubstringLexicon::make(LexiconKind::soft, {"t1x", "t2y", "t3z"});
    EXPECT_EQ(lex.min_matches, 2u);
    EXPECT_TRUE(check_soft_substrings("http://x.com/t1x-t2y", lex).rejected());
    EXPECT_FALSE(check_soft_substrings("http://x.com/t1x", lex).rejected());
    EXPECT_FALSE(check_soft_substrings("http://x.com/t1x/t1x/t1x", lex).rejected());
    EXPECT_EQ(count_distinct_matches("t1x t1x t2y t3z", lex), 3u);
}

TEST(SoftSubstring, CountingOracle) {
    synth::Generator g(9);
    std::vector<std::string> terms = {"ka", "lo", "mer", "tin"};
    auto lex = SubstringLexicon::make(LexiconKind::soft, terms);
    for (int i = 0; i < 1000; ++i) {
        std::string url = "http://h.net/" + g.content_word() + "/" + g.content_word();
        std::size_t distinct = 0;
        for (const auto& t : terms) distinct += url.find(t) != std::string::npos;
        EXPECT_EQ(check_soft_substrings(url, lex).rejected(), distinct >= 2) << url;
    }
}

TEST(InlineUrls, Examples) {
    auto tlds = TldList::builtin();
    auto r = strip_inline_urls("see http://a.com now", tlds);
    EXPECT_EQ(r.text, "see now");
    EXPECT_EQ(r.tokens_removed, 1u);
    EXPECT_EQ(strip_inline_urls("visit example.org today", tlds).text, "visit today");
    auto plain = strip_inline_urls("nothing to see here.", tlds);
    EXPECT_EQ(plain.text, "nothing to see here.");
    EXPECT_EQ(plain.tokens_removed, 0u);
    EXPECT_EQ(strip_inline_urls("go to www.site.zz now", tlds).text, "go to now");
    EXPECT_FALSE(is_url_token("e.g.", tlds));
    EXPECT_FALSE(is_url_token("file.txt", tlds));
    EXPECT_TRUE(is_url_token("(https://x.io/a).", tlds));
}

TEST(InlineUrls, NeverAddsWordsOrChangesLineCount) {
    synth::Generator g(21);
    auto tlds = TldList::builtin();
    for (int i = 0; i < 500; ++i) {
        std::string t = g.web_text({.p_inline_url = 0.5});
        if (i % 4 == 0) t += "\nhttp://only.url.com\n\nend example.net";
        auto r = strip_inline_urls(t, tlds);
        EXPECT_LE(count_words(r.text), count_words(t));
        EXPECT_EQ(count_words(t) - count_words(r.text), r.tokens_removed);
        EXPECT_EQ(std::count(r.text.begin(), r.text.end(), '\n'), std::count(t.begin(), t.end(), '\n'));
    }
}

TEST(NewlineNormalization, Examples) {
    EXPECT_EQ(normalize_newlines("a\n\n\n\nb"), "a\n\nb");
    EXPECT_EQ(normalize_newlines("a\n\nb"), "a\n\nb");
    EXPECT_EQ(normalize_newlines("a\nb"), "a\nb");
    EXPECT_EQ(normalize_newlines(""), "");
    EXPECT_EQ(normalize_newlines("\n\n\n"), "\n\n");
}

TEST(NewlineNormalization, IdempotentAndNoLongRuns) {
    synth::Generator g(4);
    for (int i = 0; i < 1000; ++i) {
        std::string t;
        for (std::size_t n = g.between(0, 12); n > 0; --n) {
            t += g.chance(0.5) ? std::string(g.between(1, 6), '\n') : g.content_word();
        }
        auto once = normalize_newlines(t);
        EXPECT_EQ(normalize_newlines(once), once);
        EXPECT_EQ(once.find("\n\n\n"), std::string::npos);
    }
}

TEST(UrlParse, HostAndPath) {
    auto p = parse_url("HTTPS://user:pw@WWW.Example.COM:443/Path/To?q=1#frag");
    EXPECT_EQ(p.host, "www.example.com");
    EXPECT_EQ(p.path, "/path/to");
    EXPECT_EQ(parse_url("example.com/a").host, "example.com");
    EXPECT_EQ(parse_url("").host, "");
}
