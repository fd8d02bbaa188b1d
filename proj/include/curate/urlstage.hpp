#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::urlstage {

inline constexpr std::string_view kBlocklistStage = "ut1_blocklist";
inline constexpr std::string_view kStrictStage = "url_strict_substring";
inline constexpr std::string_view kHardStage = "url_hard_substring";
inline constexpr std::string_view kSoftStage = "url_soft_substring";
inline constexpr std::string_view kUrlRemovalStage = "url_token_removal";
inline constexpr std::string_view kNewlineStage = "newline_normalization";

/// Public-suffix table used to find the registered domain of a host.
class SuffixList {
public:
    SuffixList() = default;
    explicit SuffixList(std::vector<std::string> suffixes);

    static SuffixList builtin();
    static SuffixList load(const std::string& path);

    bool contains(std::string_view suffix) const { return suffixes_.count(std::string(suffix)) != 0; }

    /// Longest listed suffix plus one label. Unlisted TLDs behave as a
    /// one-label suffix. Returns the host itself when it has a single label
    /// or is an IPv4 literal.
    std::string registered_domain(std::string_view host) const;

private:
    std::unordered_set<std::string> suffixes_;
};

struct UrlParts {
    std::string host;  // lowercased, no port or userinfo
    std::string path;  // lowercased, from the first '/' after the host up to '?' or '#'
};

UrlParts parse_url(std::string_view url);

class DomainBlocklist {
public:
    DomainBlocklist() = default;
    explicit DomainBlocklist(std::vector<std::string> domains);
    static DomainBlocklist load(const std::string& path);

    bool contains(std::string_view registered_domain) const;
    std::size_t size() const { return domains_.size(); }

private:
    std::unordered_set<std::string> domains_;
};

enum class LexiconKind { strict, hard, soft };

struct SubstringLexicon {
    LexiconKind kind = LexiconKind::hard;
    std::vector<std::string> terms;  // lowercase, deduplicated, sorted
    std::size_t min_matches = 1;

    static SubstringLexicon make(LexiconKind kind, std::vector<std::string> terms);
    static SubstringLexicon load(LexiconKind kind, const std::string& path);
};

/// Reads a one-entry-per-line file; blank lines and '#' comments are skipped,
/// entries are trimmed and lowercased.
std::vector<std::string> load_list(const std::string& path);

Verdict check_blocklist(std::string_view url, const DomainBlocklist& blocklist, const SuffixList& suffixes);
Verdict check_strict_substrings(std::string_view url, const SubstringLexicon& lexicon);
Verdict check_hard_substrings(std::string_view url, const SubstringLexicon& lexicon);
Verdict check_soft_substrings(std::string_view url, const SubstringLexicon& lexicon);

/// Number of distinct lexicon terms found as substrings of the lowercased url.
std::size_t count_distinct_matches(std::string_view lowered_url, const SubstringLexicon& lexicon);

class TldList {
public:
    TldList() = default;
    explicit TldList(std::vector<std::string> tlds);
    static TldList builtin();
    static TldList load(const std::string& path);

    bool contains(std::string_view tld) const;

private:
    std::unordered_set<std::string> tlds_;
};

/// True when a whitespace-delimited token is a URL: scheme-prefixed,
/// "www."-prefixed, or a dotted host whose last label is a listed TLD.
/// Surrounding brackets/quotes and trailing sentence punctuation are ignored.
bool is_url_token(std::string_view token, const TldList& tlds);

struct StripResult {
    std::string text;
    std::size_t tokens_removed = 0;
};

/// Removes URL tokens without touching newlines; one adjacent separator is
/// dropped with each removed token.
StripResult strip_inline_urls(std::string_view text, const TldList& tlds);

/// Applies strip_inline_urls to the document; returns words removed.
std::size_t strip_inline_urls(Document& doc, const TldList& tlds, const WordCounter& counter = {});

/// Every run of three or more '\n' becomes "\n\n".
std::string normalize_newlines(std::string_view text);
void normalize_newlines(Document& doc);

}  // namespace curate::urlstage
