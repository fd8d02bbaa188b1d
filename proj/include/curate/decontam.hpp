#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::decontam {

inline constexpr std::string_view kStage = "decontamination";

struct DecontamConfig {
    std::size_t ngram_size = 8;
    std::size_t min_matches = 1;  // distinct matching n-grams needed to flag a document
};

struct BenchmarkItem {
    std::string benchmark;
    std::string instance_id;
    std::string text;
};

/// Lowercases, deletes punctuation and collapses whitespace runs to one space.
std::string normalize_text(std::string_view text);

/// Word n-grams of the normalized text joined by single spaces. Texts with
/// fewer than n words yield one n-gram holding all of them; empty text yields none.
std::vector<std::string> word_ngrams(std::string_view text, std::size_t n);

/// Reads {benchmark, instance_id, text} records. "question"/"answer" fields are
/// joined into the text when "text" is absent.
std::vector<BenchmarkItem> read_benchmark_items(std::istream& in);
std::vector<BenchmarkItem> load_benchmark_items(const std::string& path);

class ReferenceSet {
public:
    struct Instance {
        std::uint32_t benchmark = 0;
        std::string id;
    };

    ReferenceSet() = default;
    ReferenceSet(const std::vector<BenchmarkItem>& items, const DecontamConfig& config = {});

    const DecontamConfig& config() const { return config_; }
    /// Benchmark names in first-seen order.
    const std::vector<std::string>& benchmarks() const { return benchmarks_; }
    const std::vector<Instance>& instances() const { return instances_; }
    std::size_t ngram_count() const { return index_.size(); }

    /// Instance indices for an exact normalized n-gram, or nullptr.
    const std::vector<std::uint32_t>* lookup(const std::string& ngram) const;

private:
    DecontamConfig config_;
    std::vector<std::string> benchmarks_;
    std::vector<Instance> instances_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> index_;
};

struct ScreenResult {
    bool contaminated = false;
    std::size_t matched_ngrams = 0;          // distinct document n-grams found in the reference set
    std::vector<std::uint32_t> instances;    // sorted, unique indices into ReferenceSet::instances()
    std::string first_match;                 // one matching n-gram, kept for audit
};

ScreenResult screen(const Document& doc, const ReferenceSet& refset);
ScreenResult screen_text(std::string_view text, const ReferenceSet& refset);

Verdict screen_verdict(const Document& doc, const ReferenceSet& refset, ScreenResult* result = nullptr);

/// Per benchmark: distinct contaminated documents and distinct contaminated
/// instances. The total row counts each document once even when it hits
/// several benchmarks; the instance total is the column sum.
class ContaminationReport {
public:
    explicit ContaminationReport(const ReferenceSet& refset);

    void add(const std::string& doc_id, const ScreenResult& result);
    void merge(const ContaminationReport& other);

    struct Row {
        std::string benchmark;
        std::size_t documents = 0;
        std::size_t instances = 0;
    };
    std::vector<Row> rows() const;
    Row total() const;

    Json to_json() const;
    std::string render_table() const;

private:
    const ReferenceSet* refset_;
    std::vector<std::set<std::string>> docs_by_benchmark_;
    std::vector<std::set<std::uint32_t>> instances_by_benchmark_;
    std::set<std::string> all_docs_;
};

}  // namespace curate::decontam
