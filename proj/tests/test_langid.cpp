#include <gtest/gtest.h>

#include <map>
#include <stdexcept>

#include "curate/langid.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::langid;

namespace {

/// Returns a fixed English probability per exact line text.
class TableScorer : public LanguageScorer {
public:
    explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
    LanguageScore score(std::string_view text) const override {
        auto it = table_.find(std::string(text));
        double p = it == table_.end() ? 0.0 : it->second;
        return {"en", p, p};
    }

private:
    std::map<std::string, double> table_;
};

class ThrowingScorer : public LanguageScorer {
public:
    LanguageScore score(std::string_view) const override { throw std::runtime_error("model crashed"); }
};

}  // namespace

TEST(WeightedLineScore, HandComputedMeans) {
    std::vector<std::size_t> l1 = {800, 200};
    std::vector<double> p1 = {0.95, 0.10};
    EXPECT_NEAR(weighted_line_score(l1, p1), (800 * 0.95 + 200 * 0.10) / 1000.0, 1e-12);
    std::vector<std::size_t> l2 = {400, 600};
    std::vector<double> p2 = {0.80, 0.10};
    EXPECT_NEAR(weighted_line_score(l2, p2), (400 * 0.80 + 600 * 0.10) / 1000.0, 1e-12);
}

TEST(WeightedLineScore, EdgeCases) {
    EXPECT_EQ(weighted_line_score({}, {}), 0.0);
    std::vector<std::size_t> one = {5};
    std::vector<double> none;
    EXPECT_THROW(weighted_line_score(one, none), std::invalid_argument);
}

TEST(WeightedLineScore, MatchesLinesThroughScorer) {
    std::string a(800, 'a'), b(200, 'b');
    TableScorer scorer({{a, 0.95}, {b, 0.10}});
    Document d = make_document("x", "", a + "\n" + b);
    EXPECT_NEAR(score_weighted_lines(d, scorer), 0.78, 1e-9);
    Document with_blank = make_document("x", "", a + "\n\n" + b + "\n");
    EXPECT_NEAR(score_weighted_lines(with_blank, scorer), 0.78, 1e-9);
}

TEST(Route, ThresholdIsInclusive) {
    std::string a(100, 'a');
    Document d = make_document("x", "", a);
    LidConfig cfg{Strategy::weighted_line, 0.65};
    EXPECT_EQ(route(d, cfg, TableScorer({{a, 0.65}})).partition, Partition::english);
    EXPECT_EQ(route(d, cfg, TableScorer({{a, 0.6499}})).partition, Partition::multilingual);
}

TEST(Route, ScorerFailureRoutesToMultilingual) {
    Document d = make_document("x", "", "some english text here");
    auto r = route(d, {}, ThrowingScorer{});
    EXPECT_EQ(r.partition, Partition::multilingual);
    EXPECT_EQ(r.score, 0.0);
}

TEST(EnglishConfidence, Fallbacks) {
    EXPECT_EQ(english_confidence({"en", 0.9, std::nullopt}), 0.9);
    EXPECT_EQ(english_confidence({"fr", 0.9, std::nullopt}), 0.0);
    EXPECT_EQ(english_confidence({"fr", 0.9, 0.2}), 0.2);
    EXPECT_EQ(english_confidence({"en", 0.9, 1.5}), 1.0);
}

TEST(FunctionWordScorer, SeparatesSyntheticEnglishFromForeign) {
    synth::Generator g(12);
    FunctionWordScorer scorer;
    for (int i = 0; i < 200; ++i) {
        Document en = make_document("e", "", g.paragraph(60, 120));
        Document fr = make_document("f", "", g.foreign_paragraph(g.between(60, 120)));
        EXPECT_GE(score_whole_document(en, scorer), 0.65);
        EXPECT_LT(score_whole_document(fr, scorer), 0.65);
    }
    EXPECT_EQ(score_whole_document(make_document("z", "", ""), scorer), 0.0);
    EXPECT_LT(english_confidence(scorer.score("Это пример текста на русском и в нём нет английских слов")), 0.1);
}
