#include <gtest/gtest.h>

#include "curate/lineclean.hpp"
#include "curate/text.hpp"
#include "support/line_fixtures.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::lineclean;

namespace {

// Plain ASCII reading of the uppercase share, for ASCII-only input.
double ascii_upper_share(std::string_view s) {
    std::size_t up = 0, low = 0;
    for (char c : s) {
        up += c >= 'A' && c <= 'Z';
        low += c >= 'a' && c <= 'z';
    }
    return up + low ? double(up) / double(up + low) : 0.0;
}

std::string random_doc(synth::Generator& g) {
    std::string t;
    for (std::size_t n = g.between(1, 10); n > 0; --n) {
        if (!t.empty()) t += g.chance(0.2) ? "\n\n" : "\n";
        t += g.chance(0.4) ? g.boilerplate_line(g.any_class()) : g.sentence(3, 25);
    }
    return t;
}

}  // namespace

TEST(LineFixtures, EveryClassHasThreePositivesAndNegatives) {
    ASSERT_EQ(fixtures::line_fixtures().size(), kLineClassCount);
    for (const auto& f : fixtures::line_fixtures()) {
        EXPECT_GE(f.positive.size(), 3u) << line_class_name(f.cls);
        EXPECT_GE(f.negative.size(), 3u) << line_class_name(f.cls);
    }
}

TEST(LineFixtures, PositivesAttributeToTheirClass) {
    auto full = LineHeuristicConfig::full();
    for (const auto& f : fixtures::line_fixtures()) {
        for (const auto& line : f.positive) {
            auto c = classify_line(line, full);
            ASSERT_TRUE(c.has_value()) << line;
            EXPECT_EQ(*c, f.cls) << line << " got " << line_class_name(*c);
            EXPECT_EQ(classify_line(line, fixtures::only(f.cls)), f.cls) << line;
        }
    }
}

TEST(LineFixtures, NegativesAreNotDetected) {
    for (const auto& f : fixtures::line_fixtures()) {
        for (const auto& line : f.negative) {
            EXPECT_FALSE(classify_line(line, fixtures::only(f.cls)).has_value())
                << line_class_name(f.cls) << ": " << line;
        }
    }
}

TEST(LineFixtures, GeneratorBoilerplateMatchesRequestedClass) {
    synth::Generator g(13);
    auto full = LineHeuristicConfig::full();
    for (int i = 0; i < 2000; ++i) {
        auto cls = g.any_class();
        auto line = g.boilerplate_line(cls);
        EXPECT_EQ(classify_line(line, full), cls) << line;
    }
}

TEST(ClassifyLine, FirstMatchingClassWins) {
    auto full = LineHeuristicConfig::full();
    // A counter line that also contains a boilerplate marker.
    EXPECT_EQ(classify_line("12 likes read more", full), LineClass::CounterLine);
    EXPECT_EQ(classify_line("READ MORE", full), LineClass::UppercaseRatio);
    auto no_upper = full;
    no_upper.set_enabled(LineClass::UppercaseRatio, false);
    EXPECT_EQ(classify_line("READ MORE", no_upper), LineClass::SubstringModifier);
    EXPECT_FALSE(classify_line("", full).has_value());
    EXPECT_FALSE(classify_line("   \t", full).has_value());
}

TEST(ClassifyLine, CoreSkipsExtendedClasses) {
    auto core = LineHeuristicConfig::core();
    EXPECT_FALSE(classify_line("Home > News > World", core).has_value());
    EXPECT_FALSE(classify_line("Follow us on Twitter for the latest updates", core).has_value());
    for (std::size_t i = 0; i < kLineClassCount; ++i) EXPECT_EQ(core.enabled[i], i < 5);
}

TEST(UppercaseRatio, MatchesAsciiOracle) {
    synth::Generator g(17);
    for (int i = 0; i < 2000; ++i) {
        std::string s = g.sentence(1, 8);
        for (auto& c : s) {
            if (g.chance(0.3)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        EXPECT_DOUBLE_EQ(uppercase_ratio(s), ascii_upper_share(s)) << s;
    }
    EXPECT_DOUBLE_EQ(uppercase_ratio("ÉCOLE été"), 5.0 / 8.0);
}

TEST(LineClassNames, RoundTrip) {
    for (std::size_t i = 0; i < kLineClassCount; ++i) {
        auto c = static_cast<LineClass>(i);
        EXPECT_EQ(line_class_from_name(line_class_name(c)), c);
    }
    EXPECT_FALSE(line_class_from_name("Nope").has_value());
}

TEST(CleanLines, RemovesExactlyClassifiedLinesAndKeepsOrder) {
    synth::Generator g(23);
    auto full = LineHeuristicConfig::full();
    for (int i = 0; i < 1000; ++i) {
        Document d = make_document("d", "", random_doc(g));
        std::vector<std::string> expected;
        std::size_t removed_words = 0;
        for (auto line : d.lines()) {
            if (classify_line(line, full)) {
                removed_words += count_words(line);
            } else {
                expected.emplace_back(line);
            }
        }
        std::string before = d.text;
        auto r = clean_lines(d, full);
        std::string joined;
        for (std::size_t k = 0; k < expected.size(); ++k) joined += (k ? "\n" : "") + expected[k];
        EXPECT_EQ(d.text, joined) << before;
        EXPECT_EQ(r.words_before, count_words(before));
        EXPECT_EQ(r.total_words_removed(), removed_words);
        std::size_t per_class = 0;
        for (auto w : r.words_removed) per_class += w;
        EXPECT_EQ(per_class, removed_words);
    }
}

TEST(CleanLines, IdempotentOnRandomDocuments) {
    synth::Generator g(29);
    auto full = LineHeuristicConfig::full();
    for (int i = 0; i < 10000; ++i) {
        Document d = make_document("d", "", random_doc(g));
        auto first = clean_lines(d, full);
        if (first.rejected) continue;
        std::string once = d.text;
        auto second = clean_lines(d, full);
        EXPECT_EQ(d.text, once);
        EXPECT_EQ(second.total_lines_removed(), 0u);
    }
}

TEST(CleanLines, EmptyAfterCleanRejects) {
    Document d = make_document("d", "", "Menu\n\nRead more\n345 comments");
    auto r = clean_lines(d, LineHeuristicConfig::core());
    EXPECT_TRUE(r.rejected);
    EXPECT_EQ(r.total_lines_removed(), 3u);
    Document empty = make_document("e", "", "");
    EXPECT_TRUE(clean_lines(empty, LineHeuristicConfig::core()).rejected);
}

TEST(WordRemovalGate, Boundary) {
    EXPECT_FALSE(word_removal_gate(1000000, 950000).rejected());
    EXPECT_TRUE(word_removal_gate(1000000, 949999).rejected());
    EXPECT_FALSE(word_removal_gate(20, 19).rejected());
    EXPECT_TRUE(word_removal_gate(20, 18).rejected());
    EXPECT_FALSE(word_removal_gate(10, 10).rejected());
    EXPECT_TRUE(word_removal_gate(0, 0).rejected());
    EXPECT_EQ(word_removal_gate(0, 0).criterion, "WordRemovalRatio");
    EXPECT_FALSE(word_removal_gate(100, 80, 0.2).rejected());
}
