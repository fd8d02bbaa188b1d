#include "curate/stats.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace curate::stats {

std::string_view kind_name(StageKind kind) {
    switch (kind) {
        case StageKind::filter:
            return "filter";
        case StageKind::modifier:
            return "modifier";
        case StageKind::group:
            return "group";
        case StageKind::modifier_group:
            return "modifier_group";
    }
    return "filter";
}

StageKind kind_from_name(std::string_view name) {
    for (auto k : {StageKind::filter, StageKind::modifier, StageKind::group, StageKind::modifier_group}) {
        if (kind_name(k) == name) return k;
    }
    throw std::invalid_argument(fmt::format("unknown stage kind '{}'", name));
}

StageStats::StageStats(std::string n, std::string l, StageKind k, const std::vector<std::string>& criterion_names)
    : name(std::move(n)), label(std::move(l)), kind(k) {
    criteria.reserve(criterion_names.size());
    for (const auto& c : criterion_names) criteria.emplace_back(c, CriterionCount{});
}

const CriterionCount* StageStats::find(std::string_view criterion) const {
    for (const auto& [n, c] : criteria) {
        if (n == criterion) return &c;
    }
    return nullptr;
}

std::size_t StageStats::index_of(std::string_view criterion) const {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (criteria[i].first == criterion) return i;
    }
    throw std::out_of_range(fmt::format("stage {} has no criterion {}", name, criterion));
}

StageStats merge_stats(const StageStats& a, const StageStats& b) {
    if (a.name != b.name || a.kind != b.kind || a.criteria.size() != b.criteria.size()) {
        throw std::invalid_argument(fmt::format("cannot merge stats of '{}' and '{}'", a.name, b.name));
    }
    StageStats out = a;
    out.docs_in += b.docs_in;
    out.docs_out += b.docs_out;
    out.docs_removed += b.docs_removed;
    out.docs_modified += b.docs_modified;
    out.tokens_removed += b.tokens_removed;
    for (std::size_t i = 0; i < out.criteria.size(); ++i) {
        if (out.criteria[i].first != b.criteria[i].first) {
            throw std::invalid_argument(fmt::format("criterion mismatch in '{}': {} vs {}", a.name,
                                                    out.criteria[i].first, b.criteria[i].first));
        }
        out.criteria[i].second.docs += b.criteria[i].second.docs;
        out.criteria[i].second.tokens += b.criteria[i].second.tokens;
    }
    return out;
}

const StageStats* RunStats::find(std::string_view stage) const {
    for (const auto& s : stages) {
        if (s.name == stage) return &s;
    }
    return nullptr;
}

StageStats* RunStats::find(std::string_view stage) {
    for (auto& s : stages) {
        if (s.name == stage) return &s;
    }
    return nullptr;
}

bool RunStats::telescopes() const {
    std::uint64_t removed = 0;
    for (const auto& s : stages) removed += s.tokens_removed;
    return initial_tokens == tokens_kept + removed;
}

bool RunStats::conserves_documents() const {
    return records_in == docs_kept + docs_rejected + docs_multilingual + parse_failures;
}

void RunStats::merge(const RunStats& o) {
    if (stages.size() != o.stages.size()) throw std::invalid_argument("cannot merge runs with different stage sets");
    records_in += o.records_in;
    parse_failures += o.parse_failures;
    initial_tokens += o.initial_tokens;
    docs_kept += o.docs_kept;
    tokens_kept += o.tokens_kept;
    docs_rejected += o.docs_rejected;
    docs_multilingual += o.docs_multilingual;
    tokens_multilingual += o.tokens_multilingual;
    for (std::size_t i = 0; i < stages.size(); ++i) stages[i] = merge_stats(stages[i], o.stages[i]);
}

namespace {

double pct(std::uint64_t part, std::uint64_t whole) {
    return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

}  // namespace

Json RunStats::to_json() const {
    Json j;
    j["records_in"] = records_in;
    j["parse_failures"] = parse_failures;
    j["initial_tokens"] = initial_tokens;
    Json arr = Json::array();
    for (const auto& s : stages) {
        Json st;
        st["name"] = s.name;
        st["label"] = s.label;
        st["kind"] = kind_name(s.kind);
        st["docs_in"] = s.docs_in;
        st["docs_out"] = s.docs_out;
        st["docs_removed"] = s.docs_removed;
        st["docs_modified"] = s.docs_modified;
        st["tokens_removed"] = s.tokens_removed;
        st["tokens_pct"] = pct(s.tokens_removed, initial_tokens);
        Json crit = Json::object();
        for (const auto& [name, c] : s.criteria) {
            crit[name] = {{"docs", c.docs}, {"tokens", c.tokens}, {"tokens_pct", pct(c.tokens, initial_tokens)}};
        }
        st["criteria"] = std::move(crit);
        arr.push_back(std::move(st));
    }
    j["stages"] = std::move(arr);
    j["multilingual"] = {{"docs", docs_multilingual}, {"tokens", tokens_multilingual}};
    j["rejected_docs"] = docs_rejected;
    j["final"] = {{"docs", docs_kept}, {"tokens", tokens_kept}, {"tokens_pct", initial_tokens ? pct(tokens_kept, initial_tokens) : 100.0}};
    return j;
}

RunStats RunStats::from_json(const Json& j) {
    RunStats s;
    s.records_in = j.at("records_in").get<std::uint64_t>();
    s.parse_failures = j.at("parse_failures").get<std::uint64_t>();
    s.initial_tokens = j.at("initial_tokens").get<std::uint64_t>();
    s.docs_kept = j.at("final").at("docs").get<std::uint64_t>();
    s.tokens_kept = j.at("final").at("tokens").get<std::uint64_t>();
    s.docs_rejected = j.at("rejected_docs").get<std::uint64_t>();
    s.docs_multilingual = j.at("multilingual").at("docs").get<std::uint64_t>();
    s.tokens_multilingual = j.at("multilingual").at("tokens").get<std::uint64_t>();
    for (const auto& st : j.at("stages")) {
        StageStats x;
        x.name = st.at("name").get<std::string>();
        x.label = st.at("label").get<std::string>();
        x.kind = kind_from_name(st.at("kind").get<std::string>());
        x.docs_in = st.at("docs_in").get<std::uint64_t>();
        x.docs_out = st.at("docs_out").get<std::uint64_t>();
        x.docs_removed = st.at("docs_removed").get<std::uint64_t>();
        x.docs_modified = st.at("docs_modified").get<std::uint64_t>();
        x.tokens_removed = st.at("tokens_removed").get<std::uint64_t>();
        for (const auto& [name, c] : st.at("criteria").items()) {
            x.criteria.emplace_back(name, CriterionCount{c.at("docs").get<std::uint64_t>(),
                                                         c.at("tokens").get<std::uint64_t>()});
        }
        s.stages.push_back(std::move(x));
    }
    return s;
}

namespace {

std::string group_digits(std::uint64_t v) {
    std::string s = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i != 0 && (s.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(s[i]);
    }
    return out;
}

std::string format_pct(double p) {
    if (p > 0.0 && p < 0.005) return "<0.01%";
    return fmt::format("{:.2f}%", p);
}

struct Row {
    std::string stage, type, docs, tokens, share;
};

std::string bold(const std::string& s) { return "**" + s + "**"; }

}  // namespace

std::string render_stats_table(const RunStats& st) {
    std::vector<Row> rows;
    const auto total = st.initial_tokens;
    auto share = [&](std::uint64_t t) { return total ? format_pct(pct(t, total)) : format_pct(0.0); };

    rows.push_back({bold("Initial Input"), "---", "---", group_digits(total), "100.00%"});
    std::uint64_t running_docs = st.records_in - st.parse_failures;
    std::uint64_t running_tokens = total;
    for (const auto& s : st.stages) {
        if (s.name == "dedup") {
            const std::string t = total ? format_pct(pct(running_tokens, total)) : "100.00%";
            rows.push_back({bold("Retained (pre-dedup)"), bold("Output"), bold(group_digits(running_docs)),
                            bold(group_digits(running_tokens)), bold(t)});
        }
        running_docs -= s.docs_removed;
        running_tokens -= s.tokens_removed;
        switch (s.kind) {
            case StageKind::filter:
                rows.push_back({s.label, "Filter", group_digits(s.docs_removed), group_digits(s.tokens_removed),
                                share(s.tokens_removed)});
                break;
            case StageKind::modifier:
                rows.push_back({s.label, "Modifier", "--- (modifier)", group_digits(s.tokens_removed),
                                share(s.tokens_removed)});
                break;
            case StageKind::group:
            case StageKind::modifier_group: {
                const bool mod = s.kind == StageKind::modifier_group;
                rows.push_back({bold(s.label), bold(mod ? "Modifier" : "Group"), bold(group_digits(s.docs_removed)),
                                bold(group_digits(s.tokens_removed)), bold(share(s.tokens_removed))});
                for (const auto& [name, c] : s.criteria) {
                    std::string docs = (mod && c.docs == 0) ? "---" : group_digits(c.docs);
                    rows.push_back({"  " + name, "Sub-filter", docs, group_digits(c.tokens), share(c.tokens)});
                }
                break;
            }
        }
    }
    const std::string final_share = total ? format_pct(pct(st.tokens_kept, total)) : "100.00%";
    rows.push_back({bold("Final Retained Corpus"), bold("Output"), bold(group_digits(st.docs_kept)),
                    bold(group_digits(st.tokens_kept)), bold(final_share)});

    Row header{"Filter Stage", "Type", "Docs Removed", "Tokens Removed", "% Total"};
    std::size_t w[5] = {header.stage.size(), header.type.size(), header.docs.size(), header.tokens.size(),
                        header.share.size()};
    for (const auto& r : rows) {
        w[0] = std::max(w[0], r.stage.size());
        w[1] = std::max(w[1], r.type.size());
        w[2] = std::max(w[2], r.docs.size());
        w[3] = std::max(w[3], r.tokens.size());
        w[4] = std::max(w[4], r.share.size());
    }
    auto line = [&](const Row& r) {
        return fmt::format("| {:<{}} | {:<{}} | {:>{}} | {:>{}} | {:>{}} |\n", r.stage, w[0], r.type, w[1], r.docs,
                           w[2], r.tokens, w[3], r.share, w[4]);
    };
    std::string out = line(header);
    out += fmt::format("|{}|{}|{}|{}|{}|\n", std::string(w[0] + 2, '-'), std::string(w[1] + 2, '-'),
                       std::string(w[2] + 1, '-') + ":", std::string(w[3] + 1, '-') + ":",
                       std::string(w[4] + 1, '-') + ":");
    for (const auto& r : rows) out += line(r);
    out += fmt::format("\nParse failures: {}  Multilingual partition: {} docs, {} tokens\n",
                       group_digits(st.parse_failures), group_digits(st.docs_multilingual),
                       group_digits(st.tokens_multilingual));
    return out;
}

}  // namespace curate::stats
