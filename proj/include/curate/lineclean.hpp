#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::lineclean {

inline constexpr std::string_view kStage = "line_clean";
inline constexpr std::string_view kWordRemovalStage = "word_removal_ratio";

// Evaluation order is also attribution order: the first matching class wins.
enum class LineClass : std::size_t {
    LineLength,
    UppercaseRatio,
    NumericLine,
    CounterLine,
    SubstringModifier,
    CodeArtifact,
    Navigation,
    CookieBanner,
    SocialCTA,
    FormElement,
    Timestamp,
};

inline constexpr std::size_t kLineClassCount = 11;

std::string_view line_class_name(LineClass c);
std::optional<LineClass> line_class_from_name(std::string_view name);

struct LineHeuristicConfig {
    std::array<bool, kLineClassCount> enabled{};

    std::size_t min_words_per_line = 2;
    double max_uppercase_ratio = 0.50;
    double max_numeric_ratio = 0.999999;

    std::size_t counter_max_words = 10;
    std::vector<std::string> engagement_words = {"likes",     "shares",  "comments",  "retweets",
                                                 "reposts",   "quotes",  "bookmarks", "upvotes",
                                                 "downvotes", "downloads", "views",   "followers"};

    std::size_t marker_max_words = 10;
    std::vector<std::string> boilerplate_markers = {
        "items in cart", "read more",   "sign-in",      "sign in",       "log in",
        "add to cart",   "view cart",   "shopping cart", "skip to content", "continue reading",
        "click here",    "back to top", "all rights reserved", "load more", "see more"};

    std::vector<std::string> code_start_tokens = {"function(", "function (", "var", "let", "const",
                                                  "$.",        "$(",         "@media", "=>"};

    std::vector<std::string> breadcrumb_separators = {">", "»", "/", "|"};
    std::size_t breadcrumb_min_segments = 2;
    std::size_t breadcrumb_max_words = 10;
    std::size_t breadcrumb_max_segment_words = 4;

    std::vector<std::string> cookie_phrases = {"cookie", "gdpr", "consent", "privacy policy",
                                               "accept all", "opt-out", "opt out"};
    std::size_t cookie_min_phrases = 2;

    std::vector<std::string> social_cta_prefixes = {"follow us", "subscribe now", "share this",
                                                    "like us on", "join us on", "subscribe to our"};

    std::vector<std::string> form_labels = {"username",        "password",       "email address",
                                            "submit",          "register",       "email",
                                            "confirm password", "remember me",   "forgot password?",
                                            "forgot your password?", "first name", "last name",
                                            "phone number",    "log in",         "sign up"};

    bool is_enabled(LineClass c) const { return enabled[static_cast<std::size_t>(c)]; }
    void set_enabled(LineClass c, bool on) { enabled[static_cast<std::size_t>(c)] = on; }

    /// The five classes shared by every preset that cleans lines.
    static LineHeuristicConfig core();
    /// Core classes plus code, navigation, cookie, social, form and timestamp lines.
    static LineHeuristicConfig full();
};

/// First enabled class that matches the line, or nullopt for a clean line.
/// Blank lines are never classified.
std::optional<LineClass> classify_line(std::string_view line, const LineHeuristicConfig& config);

// Individual detectors, exposed for testing.
bool is_counter_line(std::string_view line, const LineHeuristicConfig& config);
bool is_navigation_line(std::string_view line, const LineHeuristicConfig& config);
bool is_code_line(std::string_view line, const LineHeuristicConfig& config);
bool is_timestamp_line(std::string_view line);
double uppercase_ratio(std::string_view line);

struct CleanResult {
    bool rejected = false;
    std::size_t words_before = 0;
    std::size_t words_after = 0;
    std::array<std::size_t, kLineClassCount> lines_removed{};
    std::array<std::size_t, kLineClassCount> words_removed{};

    std::size_t total_lines_removed() const;
    std::size_t total_words_removed() const { return words_before - words_after; }
};

/// Deletes whole matching lines; retained lines keep their content and order.
/// Sets `rejected` when no non-blank line survives (criterion EmptyAfterClean).
CleanResult clean_lines(Document& doc, const LineHeuristicConfig& config, const WordCounter& counter = {});

/// Rejects when (w_pre - w_post) / w_pre exceeds max_ratio, or when w_pre is 0.
Verdict word_removal_gate(std::size_t w_pre, std::size_t w_post, double max_ratio = 0.05);

}  // namespace curate::lineclean
