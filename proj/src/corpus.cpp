#include "curate/corpus.hpp"

#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include <fstream>

#include "curate/text.hpp"

namespace curate {

std::vector<std::string_view> Document::lines() const { return text::split_lines(text); }

void Document::set_lines(const std::vector<std::string_view>& lines) { text = text::join(lines, "\n"); }

Document make_document(std::string id, std::string url, std::string text) {
    Document doc;
    doc.id = std::move(id);
    doc.url = std::move(url);
    doc.text = std::move(text);
    doc.record = Json::object();
    doc.record["id"] = doc.id;
    if (!doc.url.empty()) doc.record["url"] = doc.url;
    doc.record["text"] = doc.text;
    return doc;
}

std::size_t WordCounter::operator()(std::string_view text) const {
    return fn_ ? fn_(text) : text::count_whitespace_words(text);
}

std::size_t count_words(std::string_view text) { return text::count_whitespace_words(text); }

namespace {

const char* kTargetUriKeys[] = {"WARC-Target-URI", "Target-URI", "warc_target_uri"};

std::optional<std::string> find_target_uri(const Json& obj) {
    for (const char* key : kTargetUriKeys) {
        auto it = obj.find(key);
        if (it != obj.end() && it->is_string() && !it->get_ref<const std::string&>().empty()) {
            return it->get<std::string>();
        }
    }
    return std::nullopt;
}

}  // namespace

ReadResult parse_record(std::string_view line, std::size_t line_number) {
    Json obj = Json::parse(line.begin(), line.end(), nullptr, false);
    if (obj.is_discarded()) return ParseFailure{line_number, "malformed JSON"};
    if (!obj.is_object()) return ParseFailure{line_number, "record is not a JSON object"};
    auto text_it = obj.find("text");
    if (text_it == obj.end() || !text_it->is_string()) {
        return ParseFailure{line_number, "missing string field 'text'"};
    }

    Document doc;
    doc.text = text_it->get<std::string>();

    auto id_it = obj.find("id");
    if (id_it != obj.end() && id_it->is_string()) {
        doc.id = id_it->get<std::string>();
    } else if (id_it != obj.end() && id_it->is_number()) {
        doc.id = id_it->dump();
    } else {
        doc.id = "doc-" + std::to_string(line_number);
    }

    std::optional<std::string> uri;
    auto meta_it = obj.find("metadata");
    if (meta_it != obj.end() && meta_it->is_object()) {
        for (auto& [key, value] : meta_it->items()) {
            if (value.is_string()) doc.meta.emplace(key, value.get<std::string>());
        }
        uri = find_target_uri(*meta_it);
    }
    if (!uri) uri = find_target_uri(obj);
    if (uri) {
        doc.url = std::move(*uri);
    } else if (auto url_it = obj.find("url"); url_it != obj.end() && url_it->is_string()) {
        doc.url = url_it->get<std::string>();
    }

    doc.record = std::move(obj);
    return doc;
}

bool JsonlReader::getline(std::string& line) {
    if (!std::getline(in_, line)) {
        if (in_.bad()) throw IoError("I/O failure while reading JSONL input", last_good_);
        return false;
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::optional<ReadResult> JsonlReader::next() {
    std::string line;
    while (getline(line)) {
        if (text::is_blank(line)) continue;
        ReadResult r = parse_record(line, line_no_);
        if (std::holds_alternative<Document>(r)) last_good_ = line_no_;
        return r;
    }
    return std::nullopt;
}

std::size_t JsonlReader::next_lines(std::vector<std::pair<std::size_t, std::string>>& out, std::size_t max) {
    out.clear();
    std::string line;
    while (out.size() < max && getline(line)) {
        if (text::is_blank(line)) continue;
        out.emplace_back(line_no_, std::move(line));
        last_good_ = line_no_;
        line.clear();
    }
    return out.size();
}

std::vector<ReadResult> read_jsonl(std::istream& in) {
    std::vector<ReadResult> out;
    JsonlReader reader(in);
    while (auto r = reader.next()) out.push_back(std::move(*r));
    return out;
}

namespace {

class GzipInput : public std::istream {
public:
    explicit GzipInput(const std::string& path)
        : std::istream(nullptr), file_(path, std::ios::binary) {
        if (!file_) return;
        buf_.push(boost::iostreams::gzip_decompressor());
        buf_.push(file_);
        rdbuf(&buf_);
    }

private:
    std::ifstream file_;
    boost::iostreams::filtering_streambuf<boost::iostreams::input> buf_;
};

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

}  // namespace

std::unique_ptr<std::istream> open_input(const std::string& path) {
    std::unique_ptr<std::istream> in;
    if (ends_with(path, ".gz")) {
        in = std::make_unique<GzipInput>(path);
    } else {
        in = std::make_unique<std::ifstream>(path, std::ios::binary);
    }
    if (!in->rdbuf() || !*in) throw IoError("cannot open input file: " + path, 0);
    return in;
}

std::string serialize_kept(const Document& doc) {
    Json out = Json::object();
    bool has_id = false;
    for (auto& [key, value] : doc.record.items()) {
        if (key == "text") {
            out["text"] = doc.text;
        } else {
            out[key] = value;
        }
        if (key == "id") has_id = true;
    }
    if (!doc.record.contains("text")) out["text"] = doc.text;
    if (!has_id) out["id"] = doc.id;
    return dump(out);
}

std::string serialize_rejected(const Document& doc, const Verdict& verdict) {
    Json out = doc.record.is_object() ? doc.record : Json::object();
    if (!out.contains("text")) out["text"] = doc.text;
    if (!out.contains("id")) out["id"] = doc.id;
    out["rejected_by"] = Json{{"stage", verdict.stage}, {"criterion", verdict.criterion}};
    return dump(out);
}

void JsonlWriter::write(const Document& doc, const Verdict& verdict) {
    if (verdict.rejected()) {
        rejected_ << serialize_rejected(doc, verdict) << '\n';
        if (!rejected_) throw IoError("I/O failure writing rejected stream", 0);
    } else {
        kept_ << serialize_kept(doc) << '\n';
        if (!kept_) throw IoError("I/O failure writing kept stream", 0);
    }
}

void write_jsonl(const std::vector<Document>& docs, const std::vector<Verdict>& verdicts,
                 std::ostream& kept, std::ostream& rejected) {
    if (docs.size() != verdicts.size()) {
        throw std::invalid_argument("write_jsonl: one verdict per document required");
    }
    JsonlWriter writer(kept, rejected);
    for (std::size_t i = 0; i < docs.size(); ++i) writer.write(docs[i], verdicts[i]);
}

}  // namespace curate
