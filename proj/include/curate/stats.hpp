#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::stats {

enum class StageKind {
    filter,          // removes whole documents
    modifier,        // edits text, never removes
    group,           // filter with attributed sub-criteria
    modifier_group,  // edits text with attributed sub-classes; may also remove documents
};

std::string_view kind_name(StageKind kind);
StageKind kind_from_name(std::string_view name);  // throws std::invalid_argument

struct CriterionCount {
    std::uint64_t docs = 0;
    std::uint64_t tokens = 0;

    bool operator==(const CriterionCount&) const = default;
};

struct StageStats {
    std::string name;
    std::string label;
    StageKind kind = StageKind::filter;
    std::uint64_t docs_in = 0;
    std::uint64_t docs_out = 0;
    std::uint64_t docs_removed = 0;
    std::uint64_t docs_modified = 0;
    std::uint64_t tokens_removed = 0;
    // Declared order is rendering order; merge requires identical names.
    std::vector<std::pair<std::string, CriterionCount>> criteria;

    StageStats() = default;
    StageStats(std::string name, std::string label, StageKind kind, const std::vector<std::string>& criterion_names);

    CriterionCount& criterion(std::size_t index) { return criteria.at(index).second; }
    const CriterionCount* find(std::string_view criterion) const;
    std::size_t index_of(std::string_view criterion) const;  // throws std::out_of_range

    bool operator==(const StageStats&) const = default;
};

/// Field-wise sum. Throws std::invalid_argument unless both sides share name,
/// kind and criterion list.
StageStats merge_stats(const StageStats& a, const StageStats& b);

struct RunStats {
    std::uint64_t records_in = 0;      // every input record, including unparseable ones
    std::uint64_t parse_failures = 0;
    std::uint64_t initial_tokens = 0;  // over parsed documents
    std::uint64_t docs_kept = 0;
    std::uint64_t tokens_kept = 0;
    std::uint64_t docs_rejected = 0;
    std::uint64_t docs_multilingual = 0;
    std::uint64_t tokens_multilingual = 0;
    std::vector<StageStats> stages;

    const StageStats* find(std::string_view stage) const;
    StageStats* find(std::string_view stage);

    /// initial_tokens == tokens_kept + sum of stage token removals.
    bool telescopes() const;
    /// records_in == kept + rejected + multilingual + parse failures.
    bool conserves_documents() const;

    void merge(const RunStats& other);

    Json to_json() const;
    /// Inverse of to_json(); derived percentage fields are ignored.
    static RunStats from_json(const Json& j);
    bool operator==(const RunStats&) const = default;
};

/// Per-filter table: stage rows, group rows marked "**...**" with indented
/// sub-rows, a "% Total" column relative to the initial token count, and a
/// final retained row.
std::string render_stats_table(const RunStats& stats);

}  // namespace curate::stats
