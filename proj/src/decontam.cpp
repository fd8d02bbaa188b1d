#include "curate/decontam.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <fmt/format.h>

#include "curate/text.hpp"

namespace curate::decontam {

std::string normalize_text(std::string_view input) {
    std::string out;
    out.reserve(input.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < input.size()) {
        char32_t c = text::next_code_point(input, i);
        if (text::is_whitespace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (text::is_punct(c)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        auto lower = static_cast<UChar32>(c < 0x80 ? (c >= 'A' && c <= 'Z' ? c + 32 : c) : u_tolower(static_cast<UChar32>(c)));
        char buf[4];
        std::size_t len = 0;
        UBool err = false;
        U8_APPEND(buf, len, 4, lower, err);
        if (!err) out.append(buf, len);
    }
    return out;
}

std::vector<std::string> word_ngrams(std::string_view input, std::size_t n) {
    std::string norm = normalize_text(input);
    auto words = text::split_words(norm);
    std::vector<std::string> out;
    if (words.empty()) return out;
    if (n == 0) n = 1;
    if (words.size() < n) {
        out.push_back(norm);
        return out;
    }
    out.reserve(words.size() - n + 1);
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
        std::string g;
        for (std::size_t j = i; j < i + n; ++j) {
            if (j != i) g.push_back(' ');
            g.append(words[j]);
        }
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

std::string field_as_string(const Json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (it->is_string()) return it->get<std::string>();
    if (it->is_array()) {
        std::string joined;
        for (const auto& e : *it) {
            if (!joined.empty()) joined.push_back(' ');
            joined += e.is_string() ? e.get<std::string>() : e.dump();
        }
        return joined;
    }
    return it->dump();
}

// Calls fn(ngram) for each distinct-position n-gram of the normalized text,
// reusing one buffer so lookups do not allocate per position.
template <typename Fn>
void for_each_ngram(std::string_view input, std::size_t n, Fn&& fn) {
    std::string norm = normalize_text(input);
    auto words = text::split_words(norm);
    if (words.empty()) return;
    if (n == 0) n = 1;
    if (words.size() < n) {
        fn(norm);
        return;
    }
    std::string buffer;
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
        buffer.clear();
        for (std::size_t j = i; j < i + n; ++j) {
            if (j != i) buffer.push_back(' ');
            buffer.append(words[j]);
        }
        fn(buffer);
    }
}

}  // namespace

std::vector<BenchmarkItem> read_benchmark_items(std::istream& in) {
    std::vector<BenchmarkItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        Json obj = Json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            spdlog::warn("benchmark line {} is not a JSON object; skipped", line_no);
            continue;
        }
        BenchmarkItem item;
        item.benchmark = field_as_string(obj, "benchmark");
        item.instance_id = field_as_string(obj, "instance_id");
        if (item.instance_id.empty()) item.instance_id = fmt::format("{}", line_no);
        item.text = field_as_string(obj, "text");
        if (item.text.empty()) {
            std::string q = field_as_string(obj, "question");
            std::string a = field_as_string(obj, "answer");
            item.text = q.empty() ? a : (a.empty() ? q : q + " " + a);
        }
        if (item.benchmark.empty()) item.benchmark = "unknown";
        items.push_back(std::move(item));
    }
    if (in.bad()) throw std::runtime_error("I/O error reading benchmark items");
    return items;
}

std::vector<BenchmarkItem> load_benchmark_items(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open benchmark file {}", path));
    auto items = read_benchmark_items(in);
    if (items.empty()) spdlog::warn("benchmark file {} holds no items", path);
    return items;
}

ReferenceSet::ReferenceSet(const std::vector<BenchmarkItem>& items, const DecontamConfig& config) : config_(config) {
    std::unordered_map<std::string, std::uint32_t> bench_ids;
    for (const auto& item : items) {
        auto [it, inserted] = bench_ids.emplace(item.benchmark, static_cast<std::uint32_t>(benchmarks_.size()));
        if (inserted) benchmarks_.push_back(item.benchmark);
        const auto inst = static_cast<std::uint32_t>(instances_.size());
        instances_.push_back({it->second, item.instance_id});
        for_each_ngram(item.text, config_.ngram_size, [&](const std::string& g) {
            auto& ids = index_[g];
            if (ids.empty() || ids.back() != inst) ids.push_back(inst);
        });
    }
}

const std::vector<std::uint32_t>* ReferenceSet::lookup(const std::string& ngram) const {
    auto it = index_.find(ngram);
    return it == index_.end() ? nullptr : &it->second;
}

ScreenResult screen_text(std::string_view input, const ReferenceSet& refset) {
    ScreenResult r;
    if (refset.ngram_count() == 0) return r;
    // Each indexed n-gram owns one posting list, so its address identifies the n-gram.
    std::vector<const std::vector<std::uint32_t>*> seen;
    for_each_ngram(input, refset.config().ngram_size, [&](const std::string& g) {
        const auto* ids = refset.lookup(g);
        if (!ids) return;
        if (r.first_match.empty()) r.first_match = g;
        r.instances.insert(r.instances.end(), ids->begin(), ids->end());
        seen.push_back(ids);
    });
    std::sort(seen.begin(), seen.end());
    r.matched_ngrams = static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
    std::sort(r.instances.begin(), r.instances.end());
    r.instances.erase(std::unique(r.instances.begin(), r.instances.end()), r.instances.end());
    r.contaminated = r.matched_ngrams >= std::max<std::size_t>(1, refset.config().min_matches);
    if (!r.contaminated) r.instances.clear();
    return r;
}

ScreenResult screen(const Document& doc, const ReferenceSet& refset) { return screen_text(doc.text, refset); }

Verdict screen_verdict(const Document& doc, const ReferenceSet& refset, ScreenResult* result) {
    ScreenResult r = screen(doc, refset);
    const bool hit = r.contaminated;
    if (result) *result = std::move(r);
    if (hit) return Verdict::reject(std::string(kStage), "BenchmarkOverlap");
    return Verdict::keep(std::string(kStage));
}

ContaminationReport::ContaminationReport(const ReferenceSet& refset)
    : refset_(&refset),
      docs_by_benchmark_(refset.benchmarks().size()),
      instances_by_benchmark_(refset.benchmarks().size()) {}

void ContaminationReport::add(const std::string& doc_id, const ScreenResult& result) {
    if (!result.contaminated) return;
    all_docs_.insert(doc_id);
    for (auto inst : result.instances) {
        auto b = refset_->instances()[inst].benchmark;
        docs_by_benchmark_[b].insert(doc_id);
        instances_by_benchmark_[b].insert(inst);
    }
}

void ContaminationReport::merge(const ContaminationReport& other) {
    if (other.refset_ != refset_) throw std::invalid_argument("cannot merge reports over different reference sets");
    for (std::size_t b = 0; b < docs_by_benchmark_.size(); ++b) {
        docs_by_benchmark_[b].insert(other.docs_by_benchmark_[b].begin(), other.docs_by_benchmark_[b].end());
        instances_by_benchmark_[b].insert(other.instances_by_benchmark_[b].begin(),
                                          other.instances_by_benchmark_[b].end());
    }
    all_docs_.insert(other.all_docs_.begin(), other.all_docs_.end());
}

std::vector<ContaminationReport::Row> ContaminationReport::rows() const {
    std::vector<Row> out;
    for (std::size_t b = 0; b < docs_by_benchmark_.size(); ++b) {
        out.push_back({refset_->benchmarks()[b], docs_by_benchmark_[b].size(), instances_by_benchmark_[b].size()});
    }
    return out;
}

ContaminationReport::Row ContaminationReport::total() const {
    Row t{"Total", all_docs_.size(), 0};
    for (const auto& s : instances_by_benchmark_) t.instances += s.size();
    return t;
}

Json ContaminationReport::to_json() const {
    Json j;
    j["ngram_size"] = refset_->config().ngram_size;
    j["min_matches"] = refset_->config().min_matches;
    Json rows_json = Json::array();
    for (const auto& r : rows()) {
        Json row;
        row["benchmark"] = r.benchmark;
        row["unique_contaminated_documents"] = r.documents;
        row["contaminated_evaluation_instances"] = r.instances;
        rows_json.push_back(std::move(row));
    }
    j["benchmarks"] = std::move(rows_json);
    auto t = total();
    j["total"] = {{"unique_contaminated_documents", t.documents}, {"contaminated_evaluation_instances", t.instances}};
    return j;
}

std::string ContaminationReport::render_table() const {
    const std::string h0 = "Benchmark";
    const std::string h1 = "Unique Contaminated Documents";
    const std::string h2 = "Contaminated Evaluation Instances";
    std::size_t w0 = std::max<std::size_t>(h0.size(), 5);
    for (const auto& b : refset_->benchmarks()) w0 = std::max(w0, b.size());
    auto line = [&](std::string_view a, const std::string& b, const std::string& c) {
        return fmt::format("{:<{}} | {:>{}} | {:>{}}\n", a, w0, b, h1.size(), c, h2.size());
    };
    std::string rule(w0 + h1.size() + h2.size() + 6, '-');
    std::string out = line(h0, h1, h2) + rule + "\n";
    for (const auto& r : rows()) out += line(r.benchmark, std::to_string(r.documents), std::to_string(r.instances));
    out += rule + "\n";
    auto t = total();
    out += line(t.benchmark, std::to_string(t.documents), std::to_string(t.instances));
    return out;
}

}  // namespace curate::decontam
