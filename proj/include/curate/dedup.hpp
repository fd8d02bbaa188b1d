#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::dedup {

inline constexpr std::string_view kStage = "dedup";

struct FilterSize {
    std::uint64_t m_bits = 0;
    std::uint32_t k = 0;

    double bytes() const { return static_cast<double>(m_bits) / 8.0; }
    double gigabytes() const { return bytes() / 1e9; }
    double gibibytes() const { return bytes() / (1024.0 * 1024.0 * 1024.0); }
};

/// m = ceil(-n ln p / (ln 2)^2), k = max(1, round(-ln p / ln 2)).
/// Throws std::invalid_argument unless 0 < p < 1 and n >= 1.
FilterSize size_filter(double fp_rate, double expected_items);

class MemoryCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bloom filter over 128-bit key hashes with double hashing. Membership tests
/// and insertions are safe to run concurrently; a racing insert may be seen
/// by a concurrent reader or not, but is never lost.
class BloomFilter {
public:
    BloomFilter(std::uint64_t m_bits, std::uint32_t k);

    /// Sized for `expected_items` at `fp_rate`. Throws MemoryCapExceeded when
    /// the bit array would exceed `max_bytes` (0 disables the check).
    static BloomFilter sized(double fp_rate, double expected_items, std::uint64_t max_bytes = 0);

    BloomFilter(BloomFilter&&) noexcept = default;
    BloomFilter& operator=(BloomFilter&&) noexcept = default;

    bool contains(std::string_view key) const;
    void insert(std::string_view key);

    bool contains_hash(std::pair<std::uint64_t, std::uint64_t> h) const;
    void insert_hash(std::pair<std::uint64_t, std::uint64_t> h);
    /// Hints the cache lines a later contains_hash/insert_hash will touch.
    void prefetch_hash(std::pair<std::uint64_t, std::uint64_t> h) const;

    /// Fraction of bits set.
    double sparsity() const;
    std::uint64_t set_bits() const;
    std::uint64_t inserted() const { return inserted_->load(std::memory_order_relaxed); }
    std::uint64_t m_bits() const { return m_bits_; }
    std::uint32_t k() const { return k_; }
    std::uint64_t bytes() const { return words_count_ * sizeof(std::uint64_t); }

    void clear();

private:
    std::uint64_t m_bits_;
    std::uint32_t k_;
    std::size_t words_count_;
    std::unique_ptr<std::atomic<std::uint64_t>[]> words_;
    std::unique_ptr<std::atomic<std::uint64_t>> inserted_;
};

struct ShingleConfig {
    std::size_t ngram_size = 13;
    double dup_shingle_threshold = 0.80;        // paragraph flagged when present share is strictly above
    double doc_fallback_para_threshold = 0.80;  // document dropped when flagged share reaches this
};

/// Lowercased, whitespace-collapsed word windows of `ngram_size` with stride 1.
/// A paragraph shorter than the window yields one shingle holding all of it.
std::vector<std::string> shingle(std::string_view paragraph, std::size_t ngram_size);

/// Hashes of shingle(paragraph, ngram_size), computed without materializing the strings.
void shingle_hashes(std::string_view paragraph, std::size_t ngram_size,
                    std::vector<std::pair<std::uint64_t, std::uint64_t>>& out);

/// Hash of one shingle string; equals the matching entry of shingle_hashes().
std::pair<std::uint64_t, std::uint64_t> shingle_hash(std::string_view shingle_text);

enum class Outcome { kept, modified, dropped };

struct DocumentResult {
    Outcome outcome = Outcome::kept;
    std::size_t paragraphs = 0;          // non-blank lines seen
    std::size_t paragraphs_flagged = 0;
    std::size_t shingles_inserted = 0;
    std::size_t words_removed = 0;
};

/// Flags paragraphs whose shingles are mostly present already, excises them,
/// and inserts only the shingles of novel paragraphs. Drops the whole
/// document when the flagged share of its paragraphs reaches the fallback
/// threshold; the text is left untouched in that case.
DocumentResult dedup_document(Document& doc, BloomFilter& filter, const ShingleConfig& config,
                              const WordCounter& counter = {});

struct DedupStats {
    std::uint64_t docs_in = 0;
    std::uint64_t docs_out = 0;
    std::uint64_t documents_dropped = 0;
    std::uint64_t documents_modified = 0;
    std::uint64_t paragraphs_in = 0;
    std::uint64_t paragraphs_flagged = 0;
    std::uint64_t shingles_inserted = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::uint64_t tokens_in = 0;
    std::uint64_t tokens_out = 0;
    std::uint64_t m_bits = 0;
    std::uint32_t k = 0;
    std::uint64_t inserted = 0;
    double sparsity = 0.0;

    void add(const DedupStats& other);
    void finish(const BloomFilter& filter);
    Json to_json() const;
};

/// Runs the documents through one shared filter. Deterministic mode walks
/// the input in order; otherwise documents are spread over `workers`
/// threads and which copy of a duplicate survives may vary.
std::vector<DocumentResult> run_dedup(std::vector<Document>& docs, BloomFilter& filter, const ShingleConfig& config,
                                      DedupStats& stats, bool deterministic = true, std::size_t workers = 1,
                                      const WordCounter& counter = {});

/// Expected shingle count guess for auto-sizing: about one shingle per four input bytes.
double auto_expected_ngrams(std::uint64_t input_bytes);

}  // namespace curate::dedup
