#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace curate {

using Json = nlohmann::ordered_json;

/// One web record. `record` keeps the parsed input object so that unknown
/// fields (and the original text) survive to the output streams.
struct Document {
    std::string id;
    std::string url;
    std::string text;
    std::map<std::string, std::string> meta;
    Json record;

    /// Views into `text`, split on '\n'. Invalidated when text changes.
    std::vector<std::string_view> lines() const;
    void set_lines(const std::vector<std::string_view>& lines);
};

Document make_document(std::string id, std::string url, std::string text);

enum class VerdictKind { keep, reject, modified };

struct Verdict {
    VerdictKind kind = VerdictKind::keep;
    std::string stage;
    std::string criterion;
    std::size_t words_removed = 0;

    static Verdict keep(std::string stage) { return {VerdictKind::keep, std::move(stage), {}, 0}; }
    static Verdict reject(std::string stage, std::string criterion) {
        return {VerdictKind::reject, std::move(stage), std::move(criterion), 0};
    }
    static Verdict modified(std::string stage, std::size_t words_removed) {
        return {VerdictKind::modified, std::move(stage), {}, words_removed};
    }

    bool rejected() const { return kind == VerdictKind::reject; }
};

/// Counts "tokens" for accounting. Whitespace runs by default; any external
/// tokenizer can be plugged in.
class WordCounter {
public:
    using CountFn = std::function<std::size_t(std::string_view)>;

    WordCounter() = default;
    explicit WordCounter(CountFn fn) : fn_(std::move(fn)) {}

    std::size_t operator()(std::string_view text) const;
    bool is_whitespace() const { return !fn_; }

private:
    CountFn fn_;
};

std::size_t count_words(std::string_view text);

struct ParseFailure {
    std::size_t line_number = 0;
    std::string message;
};

using ReadResult = std::variant<Document, ParseFailure>;

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::size_t last_good_line)
        : std::runtime_error(what), last_good_line_(last_good_line) {}
    std::size_t last_good_line() const { return last_good_line_; }

private:
    std::size_t last_good_line_;
};

/// Parses one JSONL record. `line_number` is 1-based and used for default ids.
ReadResult parse_record(std::string_view line, std::size_t line_number);

/// Streaming reader over newline-delimited JSON. Blank lines are skipped.
class JsonlReader {
public:
    explicit JsonlReader(std::istream& in) : in_(in) {}

    /// Returns nullopt at end of stream; throws IoError on stream failure.
    std::optional<ReadResult> next();

    /// Reads up to max raw lines (non-blank) without parsing them.
    std::size_t next_lines(std::vector<std::pair<std::size_t, std::string>>& out, std::size_t max);

    std::size_t line_number() const { return line_no_; }

private:
    bool getline(std::string& line);

    std::istream& in_;
    std::size_t line_no_ = 0;
    std::size_t last_good_ = 0;
};

std::vector<ReadResult> read_jsonl(std::istream& in);

/// Opens a file for reading; ".gz" files are decompressed transparently.
std::unique_ptr<std::istream> open_input(const std::string& path);

std::string serialize_kept(const Document& doc);
std::string serialize_rejected(const Document& doc, const Verdict& verdict);

/// Writes kept documents to one stream and rejected originals (plus a
/// rejected_by object) to the other.
class JsonlWriter {
public:
    JsonlWriter(std::ostream& kept, std::ostream& rejected) : kept_(kept), rejected_(rejected) {}

    void write(const Document& doc, const Verdict& verdict);

private:
    std::ostream& kept_;
    std::ostream& rejected_;
};

void write_jsonl(const std::vector<Document>& docs, const std::vector<Verdict>& verdicts,
                 std::ostream& kept, std::ostream& rejected);

}  // namespace curate
