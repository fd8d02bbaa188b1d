#include <gtest/gtest.h>

#include <sstream>

#include "curate/decontam.hpp"
#include "curate/text.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::decontam;

namespace {

std::vector<BenchmarkItem> items() {
    return {
        {"mmlu", "q1", "Which planet is known as the red planet in our solar system today?"},
        {"mmlu", "q2", "What is the boiling point of water at sea level in degrees celsius?"},
        {"gsm8k", "p1", "Tom has three apples and buys five more apples at the market on sunday."},
    };
}

}  // namespace

TEST(NormalizeText, LowercasesStripsPunctuationCollapsesSpace) {
    EXPECT_EQ(normalize_text("Hello,   World!\n\tIt's  FINE."), "hello world its fine");
    EXPECT_EQ(normalize_text("  ...  "), "");
}

TEST(WordNgrams, CountsAndShortTexts) {
    EXPECT_EQ(word_ngrams("a b c d e f g h i j", 8).size(), 3u);
    EXPECT_EQ(word_ngrams("a b c", 8), (std::vector<std::string>{"a b c"}));
    EXPECT_TRUE(word_ngrams("", 8).empty());
    synth::Generator g(2);
    for (int i = 0; i < 200; ++i) {
        std::string s = g.sentence(1, 30);
        std::string norm = normalize_text(s);
        auto words = text::split_words(norm);
        auto grams = word_ngrams(s, 8);
        ASSERT_EQ(grams.size(), words.size() < 8 ? 1 : words.size() - 7);
        if (words.size() >= 8) {
            std::string first;
            for (int k = 0; k < 8; ++k) first += (k ? " " : "") + std::string(words[k]);
            EXPECT_EQ(grams.front(), first);
        }
    }
}

TEST(Screen, PlantedOverlapIsFoundAcrossPunctuationAndCase) {
    ReferenceSet ref(items());
    EXPECT_EQ(ref.benchmarks(), (std::vector<std::string>{"mmlu", "gsm8k"}));
    auto r = screen_text("Quiz time: WHICH planet is known as the Red Planet, in our solar system?", ref);
    EXPECT_TRUE(r.contaminated);
    EXPECT_EQ(r.instances, (std::vector<std::uint32_t>{0}));
    EXPECT_FALSE(r.first_match.empty());
    EXPECT_FALSE(screen_text("A planet is a body orbiting a star in a system.", ref).contaminated);
}

TEST(Screen, OneDocumentHittingTwoInstances) {
    ReferenceSet ref(items());
    Document d = make_document("doc-7", "",
                               "Which planet is known as the red planet in our solar system today? Also, what is the "
                               "boiling point of water at sea level in degrees celsius?");
    ScreenResult r;
    auto v = screen_verdict(d, ref, &r);
    EXPECT_TRUE(v.rejected());
    EXPECT_EQ(v.criterion, "BenchmarkOverlap");
    ContaminationReport rep(ref);
    rep.add(d.id, r);
    auto rows = rep.rows();
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].documents, 1u);
    EXPECT_EQ(rows[0].instances, 2u);
    EXPECT_EQ(rows[1].documents, 0u);
    EXPECT_EQ(rep.total().documents, 1u);
    EXPECT_EQ(rep.total().instances, 2u);
}

TEST(Report, TotalCountsDocumentsOnceAcrossBenchmarks) {
    ReferenceSet ref(items());
    ContaminationReport a(ref), b(ref);
    auto both = screen_text(items()[0].text + " " + items()[2].text, ref);
    a.add("x", both);
    b.add("x", both);
    b.add("y", screen_text(items()[2].text, ref));
    a.merge(b);
    EXPECT_EQ(a.total().documents, 2u);
    EXPECT_EQ(a.total().instances, 2u);
    auto j = a.to_json();
    EXPECT_EQ(j["benchmarks"][1]["unique_contaminated_documents"], 2);
    EXPECT_EQ(j["total"]["contaminated_evaluation_instances"], 2);
    auto table = a.render_table();
    EXPECT_NE(table.find("Unique Contaminated Documents"), std::string::npos);
    EXPECT_NE(table.find("Contaminated Evaluation Instances"), std::string::npos);
}

TEST(Screen, MinMatchesRequiresDistinctNgrams) {
    DecontamConfig cfg;
    cfg.min_matches = 3;
    ReferenceSet ref(items(), cfg);
    // Exactly 8 shared words: one n-gram.
    auto one = screen_text("zz which planet is known as the red planet zz", ref);
    EXPECT_EQ(one.matched_ngrams, 1u);
    EXPECT_FALSE(one.contaminated);
    EXPECT_TRUE(screen_text(items()[0].text, ref).contaminated);
}

TEST(ReadBenchmarkItems, QuestionAnswerFallback) {
    std::istringstream in(R"({"benchmark":"arc","instance_id":"1","question":"Why is the sky blue?","answer":"Scattering"}
{"benchmark":"arc","instance_id":"2","text":"plain text"}
)");
    auto v = read_benchmark_items(in);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NE(v[0].text.find("Why is the sky blue?"), std::string::npos);
    EXPECT_NE(v[0].text.find("Scattering"), std::string::npos);
    EXPECT_EQ(v[1].text, "plain text");
}
