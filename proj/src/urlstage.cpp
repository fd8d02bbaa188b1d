#include "curate/urlstage.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

#include "curate/text.hpp"

namespace curate::urlstage {

namespace {

bool is_ipv4(std::string_view host) {
    if (host.empty()) return false;
    int dots = 0;
    for (char c : host) {
        if (c == '.') {
            ++dots;
        } else if (c < '0' || c > '9') {
            return false;
        }
    }
    return dots == 3;
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = host.find('.', start);
        if (pos == std::string_view::npos) {
            labels.push_back(host.substr(start));
            break;
        }
        labels.push_back(host.substr(start, pos - start));
        start = pos + 1;
    }
    return labels;
}

}  // namespace

SuffixList::SuffixList(std::vector<std::string> suffixes) {
    for (auto& s : suffixes) {
        std::string v = text::ascii_lower(text::trim(s));
        if (!v.empty() && v.front() == '.') v.erase(0, 1);
        if (!v.empty()) suffixes_.insert(std::move(v));
    }
}

SuffixList SuffixList::builtin() {
    return SuffixList({
        "com", "net", "org", "edu", "gov", "mil", "int", "info", "biz", "io", "co",
        "uk", "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk",
        "au", "com.au", "net.au", "org.au", "edu.au",
        "jp", "co.jp", "ne.jp", "or.jp", "ac.jp",
        "nz", "co.nz", "org.nz", "za", "co.za",
        "br", "com.br", "net.br", "in", "co.in", "cn", "com.cn", "net.cn",
        "kr", "co.kr", "tw", "com.tw", "hk", "com.hk", "sg", "com.sg",
        "mx", "com.mx", "ar", "com.ar", "tr", "com.tr",
        "de", "fr", "nl", "es", "it", "ru", "pl", "se", "no", "fi", "dk", "ch", "at", "be", "eu",
        "us", "ca", "tv", "cc", "me", "app", "dev", "xyz", "online", "site", "top", "blogspot.com",
    });
}

SuffixList SuffixList::load(const std::string& path) { return SuffixList(load_list(path)); }

std::string SuffixList::registered_domain(std::string_view host) const {
    if (host.empty() || is_ipv4(host)) return std::string(host);
    auto labels = split_labels(host);
    if (labels.size() == 1) return std::string(host);
    // Smallest start index whose suffix is listed = longest matching suffix.
    std::size_t suffix_start = labels.size() - 1;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (suffixes_.count(std::string(host.substr(offset)))) {
            suffix_start = i;
            break;
        }
        offset += labels[i].size() + 1;
    }
    if (suffix_start == 0) return std::string(host);
    std::size_t begin = 0;
    for (std::size_t i = 0; i + 1 < suffix_start; ++i) begin += labels[i].size() + 1;
    return std::string(host.substr(begin));
}

UrlParts parse_url(std::string_view raw) {
    UrlParts parts;
    std::string url = text::ascii_lower(text::trim(raw));
    std::string_view u(url);

    std::size_t auth_start = std::string_view::npos;
    if (auto scheme = u.find("://"); scheme != std::string_view::npos) {
        auth_start = scheme + 3;
    } else if (u.starts_with("//")) {
        auth_start = 2;
    } else {
        std::size_t end = u.find_first_of("/?#");
        std::string_view first = u.substr(0, end);
        if (first.find('.') != std::string_view::npos && first.find(' ') == std::string_view::npos) auth_start = 0;
    }

    std::size_t path_start = 0;
    if (auth_start != std::string_view::npos) {
        std::size_t auth_end = u.find_first_of("/?#", auth_start);
        if (auth_end == std::string_view::npos) auth_end = u.size();
        std::string_view authority = u.substr(auth_start, auth_end - auth_start);
        if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
        if (!authority.empty() && authority.front() == '[') {
            auto close = authority.find(']');
            authority = authority.substr(1, close == std::string_view::npos ? std::string_view::npos : close - 1);
        } else if (auto colon = authority.find(':'); colon != std::string_view::npos) {
            authority = authority.substr(0, colon);
        }
        while (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);
        parts.host = std::string(authority);
        path_start = auth_end;
    }

    std::size_t slash = u.find('/', path_start);
    if (slash != std::string_view::npos) {
        std::size_t q = u.find_first_of("?#", path_start);
        if (q == std::string_view::npos || slash < q) {
            parts.path = std::string(u.substr(slash, q == std::string_view::npos ? std::string_view::npos : q - slash));
        }
    }
    return parts;
}

DomainBlocklist::DomainBlocklist(std::vector<std::string> domains) {
    for (auto& d : domains) {
        std::string v = text::ascii_lower(text::trim(d));
        if (!v.empty()) domains_.insert(std::move(v));
    }
}

DomainBlocklist DomainBlocklist::load(const std::string& path) { return DomainBlocklist(load_list(path)); }

bool DomainBlocklist::contains(std::string_view registered_domain) const {
    return domains_.count(text::ascii_lower(registered_domain)) != 0;
}

SubstringLexicon SubstringLexicon::make(LexiconKind kind, std::vector<std::string> terms) {
    SubstringLexicon lex;
    lex.kind = kind;
    lex.min_matches = kind == LexiconKind::soft ? 2 : 1;
    for (auto& t : terms) {
        std::string v = text::ascii_lower(text::trim(t));
        if (!v.empty()) lex.terms.push_back(std::move(v));
    }
    std::sort(lex.terms.begin(), lex.terms.end());
    lex.terms.erase(std::unique(lex.terms.begin(), lex.terms.end()), lex.terms.end());
    return lex;
}

SubstringLexicon SubstringLexicon::load(LexiconKind kind, const std::string& path) {
    return make(kind, load_list(path));
}

std::vector<std::string> load_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open list file: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(text::ascii_lower(t));
    }
    return out;
}

Verdict check_blocklist(std::string_view url, const DomainBlocklist& blocklist, const SuffixList& suffixes) {
    const std::string stage(kBlocklistStage);
    UrlParts parts = parse_url(url);
    if (parts.host.empty()) {
        if (!url.empty()) spdlog::debug("blocklist: no host in url '{}'", url);
        return Verdict::keep(stage);
    }
    if (blocklist.contains(suffixes.registered_domain(parts.host))) return Verdict::reject(stage, "BlockedDomain");
    return Verdict::keep(stage);
}

namespace {

bool is_path_delimiter(char c) { return c == '-' || c == '.' || c == '/'; }

bool has_delimited_occurrence(std::string_view path, std::string_view term) {
    std::size_t pos = path.find(term);
    while (pos != std::string_view::npos) {
        bool left = pos == 0 || is_path_delimiter(path[pos - 1]);
        std::size_t end = pos + term.size();
        bool right = end == path.size() || is_path_delimiter(path[end]);
        if (left && right) return true;
        pos = path.find(term, pos + 1);
    }
    return false;
}

}  // namespace

Verdict check_strict_substrings(std::string_view url, const SubstringLexicon& lexicon) {
    const std::string stage(kStrictStage);
    if (lexicon.terms.empty()) return Verdict::keep(stage);
    UrlParts parts = parse_url(url);
    for (const auto& term : lexicon.terms) {
        if (has_delimited_occurrence(parts.path, term)) return Verdict::reject(stage, "StrictSubstring");
    }
    return Verdict::keep(stage);
}

Verdict check_hard_substrings(std::string_view url, const SubstringLexicon& lexicon) {
    const std::string stage(kHardStage);
    if (lexicon.terms.empty()) return Verdict::keep(stage);
    std::string lowered = text::ascii_lower(url);
    for (const auto& term : lexicon.terms) {
        if (lowered.find(term) != std::string::npos) return Verdict::reject(stage, "HardSubstring");
    }
    return Verdict::keep(stage);
}

std::size_t count_distinct_matches(std::string_view lowered_url, const SubstringLexicon& lexicon) {
    std::size_t n = 0;
    for (const auto& term : lexicon.terms) {
        if (lowered_url.find(term) != std::string_view::npos) ++n;
    }
    return n;
}

Verdict check_soft_substrings(std::string_view url, const SubstringLexicon& lexicon) {
    const std::string stage(kSoftStage);
    if (lexicon.terms.empty()) return Verdict::keep(stage);
    std::string lowered = text::ascii_lower(url);
    if (count_distinct_matches(lowered, lexicon) >= std::max<std::size_t>(lexicon.min_matches, 1)) {
        return Verdict::reject(stage, "SoftSubstring");
    }
    return Verdict::keep(stage);
}

TldList::TldList(std::vector<std::string> tlds) {
    for (auto& t : tlds) {
        std::string v = text::ascii_lower(text::trim(t));
        if (!v.empty() && v.front() == '.') v.erase(0, 1);
        if (!v.empty()) tlds_.insert(std::move(v));
    }
}

TldList TldList::builtin() {
    return TldList({
        "com", "net", "org", "edu", "gov", "mil", "int", "info", "biz", "io", "co", "uk", "us", "ca",
        "de", "fr", "jp", "cn", "ru", "br", "au", "in", "it", "es", "nl", "se", "no", "fi", "dk", "pl",
        "ch", "at", "be", "eu", "nz", "za", "mx", "kr", "tw", "hk", "sg", "ie", "tv", "cc", "ly", "app",
        "dev", "ai", "xyz", "online", "site", "top", "club", "shop", "blog", "news", "ws",
    });
}

TldList TldList::load(const std::string& path) { return TldList(load_list(path)); }

bool TldList::contains(std::string_view tld) const { return tlds_.count(std::string(tld)) != 0; }

bool is_url_token(std::string_view token, const TldList& tlds) {
    constexpr std::string_view kLeading = "([{<\"'";
    constexpr std::string_view kTrailing = ".,;:!?)]}>\"'";
    while (!token.empty() && kLeading.find(token.front()) != std::string_view::npos) token.remove_prefix(1);
    while (!token.empty() && kTrailing.find(token.back()) != std::string_view::npos) token.remove_suffix(1);
    if (token.empty()) return false;

    if (auto scheme = token.find("://"); scheme != std::string_view::npos && scheme > 0) {
        bool scheme_ok = true;
        for (std::size_t i = 0; i < scheme; ++i) {
            char c = token[i];
            bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '.' || c == '-'));
            if (!ok) scheme_ok = false;
        }
        if (scheme_ok && token.size() > scheme + 3) return true;
    }
    std::string_view lower_prefix = token.substr(0, 4);
    if ((lower_prefix == "www." || lower_prefix == "WWW.") && token.size() > 4) return true;

    std::string_view host = token.substr(0, token.find_first_of("/?#"));
    if (auto colon = host.find(':'); colon != std::string_view::npos) {
        std::string_view port = host.substr(colon + 1);
        if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return false;
        }
        host = host.substr(0, colon);
    }
    std::size_t last_dot = host.rfind('.');
    if (last_dot == std::string_view::npos || last_dot == 0) return false;
    for (char c : host) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
        if (!ok) return false;
    }
    if (host.find("..") != std::string_view::npos) return false;
    std::string_view tld = host.substr(last_dot + 1);
    if (tld.empty()) return false;
    // TLD label must be written lowercase so "end.It" style typos do not match.
    for (char c : tld) {
        if (c < 'a' || c > 'z') return false;
    }
    return tlds.contains(tld);
}

namespace {

std::size_t strip_line(std::string_view line, const TldList& tlds, std::string& out) {
    struct Span {
        std::size_t begin, end;
        bool removed;
    };
    std::vector<Span> tokens;
    std::size_t removed = 0;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && text::is_ascii_space(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size()) break;
        std::size_t b = i;
        while (i < line.size() && !text::is_ascii_space(static_cast<unsigned char>(line[i]))) ++i;
        bool url = is_url_token(line.substr(b, i - b), tlds);
        removed += url ? 1 : 0;
        tokens.push_back({b, i, url});
    }
    if (removed == 0) {
        out.append(line);
        return 0;
    }
    out.append(line.substr(0, tokens.front().begin));
    bool emitted = false;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (tokens[t].removed) continue;
        if (emitted) out.append(line.substr(tokens[t - 1].end, tokens[t].begin - tokens[t - 1].end));
        out.append(line.substr(tokens[t].begin, tokens[t].end - tokens[t].begin));
        emitted = true;
    }
    if (!tokens.back().removed) out.append(line.substr(tokens.back().end));
    return removed;
}

}  // namespace

StripResult strip_inline_urls(std::string_view input, const TldList& tlds) {
    StripResult result;
    result.text.reserve(input.size());
    std::size_t start = 0;
    while (true) {
        std::size_t pos = input.find('\n', start);
        std::string_view line = input.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        result.tokens_removed += strip_line(line, tlds, result.text);
        if (pos == std::string_view::npos) break;
        result.text.push_back('\n');
        start = pos + 1;
    }
    return result;
}

std::size_t strip_inline_urls(Document& doc, const TldList& tlds, const WordCounter& counter) {
    StripResult r = strip_inline_urls(doc.text, tlds);
    if (r.tokens_removed == 0) return 0;
    std::size_t removed = r.tokens_removed;
    if (!counter.is_whitespace()) {
        std::size_t before = counter(doc.text);
        std::size_t after = counter(r.text);
        removed = before > after ? before - after : 0;
    }
    doc.text = std::move(r.text);
    return removed;
}

std::string normalize_newlines(std::string_view input) {
    std::string out;
    out.reserve(input.size());
    std::size_t i = 0;
    while (i < input.size()) {
        if (input[i] != '\n') {
            out.push_back(input[i++]);
            continue;
        }
        std::size_t run = 0;
        while (i < input.size() && input[i] == '\n') {
            ++run;
            ++i;
        }
        out.append(run >= 3 ? 2 : run, '\n');
    }
    return out;
}

void normalize_newlines(Document& doc) {
    if (doc.text.find("\n\n\n") == std::string::npos) return;
    doc.text = normalize_newlines(doc.text);
}

}  // namespace curate::urlstage
