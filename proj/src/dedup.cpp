#include "curate/dedup.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "curate/parallel.hpp"
#include "curate/text.hpp"

namespace curate::dedup {

namespace {

constexpr std::uint64_t kShingleSeed = 0x5eed'b100'f11eULL;

}  // namespace

FilterSize size_filter(double p, double n) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(fmt::format("fp rate must be in (0,1), got {}", p));
    if (!(n >= 1.0)) throw std::invalid_argument(fmt::format("expected item count must be >= 1, got {}", n));
    const double ln2 = std::log(2.0);
    const double m = std::ceil(-n * std::log(p) / (ln2 * ln2));
    const double k = std::round(-std::log(p) / ln2);
    FilterSize size;
    size.m_bits = static_cast<std::uint64_t>(m);
    size.k = static_cast<std::uint32_t>(std::max(1.0, k));
    return size;
}

BloomFilter::BloomFilter(std::uint64_t m_bits, std::uint32_t k)
    : m_bits_(m_bits),
      k_(k),
      words_count_((m_bits + 63) / 64),
      words_(new std::atomic<std::uint64_t>[(m_bits + 63) / 64]()),
      inserted_(std::make_unique<std::atomic<std::uint64_t>>(0)) {
    if (m_bits == 0 || k == 0) throw std::invalid_argument("bloom filter needs m >= 1 and k >= 1");
}

BloomFilter BloomFilter::sized(double fp_rate, double expected_items, std::uint64_t max_bytes) {
    FilterSize size = size_filter(fp_rate, expected_items);
    const std::uint64_t bytes = (size.m_bits + 63) / 64 * 8;
    if (max_bytes != 0 && bytes > max_bytes) {
        throw MemoryCapExceeded(fmt::format("bloom filter needs {} bytes ({:.3f} GB / {:.3f} GiB), cap is {} bytes",
                                            bytes, size.gigabytes(), size.gibibytes(), max_bytes));
    }
    return BloomFilter(size.m_bits, size.k);
}

bool BloomFilter::contains_hash(std::pair<std::uint64_t, std::uint64_t> h) const {
    std::uint64_t g = h.first % m_bits_;
    std::uint64_t step = h.second % m_bits_;
    if (step == 0) step = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        std::uint64_t word = words_[g >> 6].load(std::memory_order_relaxed);
        if ((word & (std::uint64_t{1} << (g & 63))) == 0) return false;
        g += step;
        if (g >= m_bits_) g -= m_bits_;
    }
    return true;
}

void BloomFilter::insert_hash(std::pair<std::uint64_t, std::uint64_t> h) {
    std::uint64_t g = h.first % m_bits_;
    std::uint64_t step = h.second % m_bits_;
    if (step == 0) step = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        const std::uint64_t mask = std::uint64_t{1} << (g & 63);
        auto& word = words_[g >> 6];
        if ((word.load(std::memory_order_relaxed) & mask) == 0) word.fetch_or(mask, std::memory_order_relaxed);
        g += step;
        if (g >= m_bits_) g -= m_bits_;
    }
    inserted_->fetch_add(1, std::memory_order_relaxed);
}

void BloomFilter::prefetch_hash(std::pair<std::uint64_t, std::uint64_t> h) const {
    std::uint64_t g = h.first % m_bits_;
    std::uint64_t step = h.second % m_bits_;
    if (step == 0) step = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        __builtin_prefetch(&words_[g >> 6]);
        g += step;
        if (g >= m_bits_) g -= m_bits_;
    }
}

bool BloomFilter::contains(std::string_view key) const { return contains_hash(text::hash128(key, kShingleSeed)); }

void BloomFilter::insert(std::string_view key) { insert_hash(text::hash128(key, kShingleSeed)); }

std::uint64_t BloomFilter::set_bits() const {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < words_count_; ++i) n += std::popcount(words_[i].load(std::memory_order_relaxed));
    return n;
}

double BloomFilter::sparsity() const { return static_cast<double>(set_bits()) / static_cast<double>(m_bits_); }

void BloomFilter::clear() {
    for (std::size_t i = 0; i < words_count_; ++i) words_[i].store(0, std::memory_order_relaxed);
    inserted_->store(0, std::memory_order_relaxed);
}

namespace {

template <typename Fn>
void for_each_shingle(std::string_view paragraph, std::size_t n, std::string& buffer, Fn&& fn) {
    std::string lower = text::ascii_lower(paragraph);
    auto words = text::split_words(lower);
    if (words.empty()) return;
    if (n == 0) n = 1;
    auto emit = [&](std::size_t begin, std::size_t end) {
        buffer.clear();
        for (std::size_t i = begin; i < end; ++i) {
            if (i != begin) buffer.push_back(' ');
            buffer.append(words[i]);
        }
        fn(std::string_view(buffer));
    };
    if (words.size() < n) {
        emit(0, words.size());
        return;
    }
    for (std::size_t i = 0; i + n <= words.size(); ++i) emit(i, i + n);
}

}  // namespace

std::vector<std::string> shingle(std::string_view paragraph, std::size_t ngram_size) {
    std::vector<std::string> out;
    std::string buffer;
    for_each_shingle(paragraph, ngram_size, buffer, [&](std::string_view s) { out.emplace_back(s); });
    return out;
}

namespace {

// Shingle hashes are polynomial rolling sums over per-word hashes, one sum
// per half of the pair, finished with a mixer. A window moves in O(1).
constexpr std::uint64_t kBaseA = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kBaseB = 0xc2b2ae3d27d4eb4fULL;

std::uint64_t finish(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void window_hashes(std::string_view paragraph, std::size_t n, std::vector<std::pair<std::uint64_t, std::uint64_t>>& words,
                   std::vector<std::pair<std::uint64_t, std::uint64_t>>& out) {
    out.clear();
    words.clear();
    std::string lower = text::ascii_lower(paragraph);
    text::for_each_word(lower, [&](std::string_view w) { words.push_back(text::hash128(w, kShingleSeed)); });
    if (words.empty()) return;
    const std::size_t k = std::min(std::max<std::size_t>(n, 1), words.size());
    std::uint64_t top_a = 1, top_b = 1;  // base^(k-1)
    for (std::size_t i = 1; i < k; ++i) {
        top_a *= kBaseA;
        top_b *= kBaseB;
    }
    std::uint64_t ha = 0, hb = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i >= k) {
            ha -= words[i - k].first * top_a;
            hb -= words[i - k].second * top_b;
        }
        ha = ha * kBaseA + words[i].first;
        hb = hb * kBaseB + words[i].second;
        if (i + 1 >= k) out.emplace_back(finish(ha ^ k), finish(hb + k));
    }
}

}  // namespace

void shingle_hashes(std::string_view paragraph, std::size_t ngram_size,
                    std::vector<std::pair<std::uint64_t, std::uint64_t>>& out) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> words;
    window_hashes(paragraph, ngram_size, words, out);
}

std::pair<std::uint64_t, std::uint64_t> shingle_hash(std::string_view shingle_text) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> words, out;
    window_hashes(shingle_text, std::numeric_limits<std::size_t>::max(), words, out);
    return out.empty() ? std::pair<std::uint64_t, std::uint64_t>{0, 0} : out.front();
}

DocumentResult dedup_document(Document& doc, BloomFilter& filter, const ShingleConfig& config,
                              const WordCounter& counter) {
    DocumentResult result;
    auto lines = doc.lines();
    std::vector<bool> flagged(lines.size(), false);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> hashes;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::is_blank(lines[i])) continue;
        ++result.paragraphs;
        shingle_hashes(lines[i], config.ngram_size, hashes);
        // Bit lookups are cache misses on a large filter; issue them ahead of use.
        constexpr std::size_t kAhead = 8;
        for (std::size_t j = 0; j < std::min(kAhead, hashes.size()); ++j) filter.prefetch_hash(hashes[j]);
        std::size_t present = 0;
        for (std::size_t j = 0; j < hashes.size(); ++j) {
            if (j + kAhead < hashes.size()) filter.prefetch_hash(hashes[j + kAhead]);
            if (filter.contains_hash(hashes[j])) ++present;
        }
        const double share = static_cast<double>(present) / static_cast<double>(hashes.size());
        if (share > config.dup_shingle_threshold) {
            flagged[i] = true;
            ++result.paragraphs_flagged;
            continue;
        }
        for (const auto& h : hashes) filter.insert_hash(h);
        result.shingles_inserted += hashes.size();
    }

    if (result.paragraphs_flagged == 0) return result;

    const double flagged_share =
        static_cast<double>(result.paragraphs_flagged) / static_cast<double>(result.paragraphs);
    if (flagged_share >= config.doc_fallback_para_threshold) {
        result.outcome = Outcome::dropped;
        result.words_removed = counter(doc.text);
        return result;
    }

    std::vector<std::string_view> kept;
    kept.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (flagged[i]) {
            result.words_removed += counter(lines[i]);
        } else {
            kept.push_back(lines[i]);
        }
    }
    doc.set_lines(kept);
    result.outcome = Outcome::modified;
    return result;
}

void DedupStats::add(const DedupStats& o) {
    docs_in += o.docs_in;
    docs_out += o.docs_out;
    documents_dropped += o.documents_dropped;
    documents_modified += o.documents_modified;
    paragraphs_in += o.paragraphs_in;
    paragraphs_flagged += o.paragraphs_flagged;
    shingles_inserted += o.shingles_inserted;
    bytes_in += o.bytes_in;
    bytes_out += o.bytes_out;
    tokens_in += o.tokens_in;
    tokens_out += o.tokens_out;
}

void DedupStats::finish(const BloomFilter& filter) {
    m_bits = filter.m_bits();
    k = filter.k();
    inserted = filter.inserted();
    sparsity = filter.sparsity();
}

Json DedupStats::to_json() const {
    auto pct = [](std::uint64_t a, std::uint64_t b) { return b ? 100.0 * static_cast<double>(a) / static_cast<double>(b) : 100.0; };
    Json j;
    j["m_bits"] = m_bits;
    j["k"] = k;
    j["filter_gb"] = static_cast<double>(m_bits) / 8.0 / 1e9;
    j["filter_gib"] = static_cast<double>(m_bits) / 8.0 / (1024.0 * 1024.0 * 1024.0);
    j["inserted"] = inserted;
    j["sparsity"] = sparsity;
    j["docs_in"] = docs_in;
    j["docs_out"] = docs_out;
    j["documents_dropped"] = documents_dropped;
    j["documents_modified"] = documents_modified;
    j["paragraphs_in"] = paragraphs_in;
    j["paragraphs_flagged"] = paragraphs_flagged;
    j["bytes_in"] = bytes_in;
    j["bytes_out"] = bytes_out;
    j["tokens_in"] = tokens_in;
    j["tokens_out"] = tokens_out;
    j["retention_docs_pct"] = pct(docs_out, docs_in);
    j["retention_bytes_pct"] = pct(bytes_out, bytes_in);
    j["retention_tokens_pct"] = pct(tokens_out, tokens_in);
    return j;
}

std::vector<DocumentResult> run_dedup(std::vector<Document>& docs, BloomFilter& filter, const ShingleConfig& config,
                                      DedupStats& stats, bool deterministic, std::size_t workers,
                                      const WordCounter& counter) {
    std::vector<DocumentResult> results(docs.size());
    std::vector<std::uint64_t> bytes_before(docs.size());
    std::vector<std::uint64_t> tokens_before(docs.size());
    auto one = [&](std::size_t i) {
        bytes_before[i] = docs[i].text.size();
        tokens_before[i] = counter(docs[i].text);
        results[i] = dedup_document(docs[i], filter, config, counter);
    };
    parallel_for(docs.size(), deterministic ? 1 : workers, one);

    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& r = results[i];
        ++stats.docs_in;
        stats.bytes_in += bytes_before[i];
        stats.tokens_in += tokens_before[i];
        stats.paragraphs_in += r.paragraphs;
        stats.paragraphs_flagged += r.paragraphs_flagged;
        stats.shingles_inserted += r.shingles_inserted;
        if (r.outcome == Outcome::dropped) {
            ++stats.documents_dropped;
            continue;
        }
        if (r.outcome == Outcome::modified) ++stats.documents_modified;
        ++stats.docs_out;
        stats.bytes_out += docs[i].text.size();
        stats.tokens_out += tokens_before[i] - r.words_removed;
    }
    stats.finish(filter);
    return results;
}

double auto_expected_ngrams(std::uint64_t input_bytes) { return std::max(1.0, static_cast<double>(input_bytes) / 4.0); }

}  // namespace curate::dedup
