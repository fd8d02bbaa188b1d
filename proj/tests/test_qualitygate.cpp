#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "curate/qualitygate.hpp"
#include "support/synth.hpp"

using namespace curate;
using namespace curate::qualitygate;

namespace {

class ConstScorer : public QualityScorer {
public:
    explicit ConstScorer(double v) : v_(v) {}
    double score(const Document&) const override { return v_; }

private:
    double v_;
};

class BrokenScorer : public QualityScorer {
public:
    double score(const Document&) const override { throw std::runtime_error("no model"); }
};

double naive_cosine(const Embedding& u, const Embedding& v) {
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return dot / std::sqrt(nu * nv);
}

std::vector<LabeledText> separable(synth::Generator& g, std::size_t n) {
    const auto& words = synth::content_words();
    std::vector<LabeledText> out;
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(i % 2);
        std::string t;
        for (std::size_t w = g.between(20, 40); w > 0; --w) {
            // Even-indexed vocabulary for positives, odd for negatives, plus shared function words.
            std::size_t k = 2 * g.uniform(words.size() / 2) + (label ? 0 : 1);
            t += (t.empty() ? "" : " ") + (g.chance(0.4) ? g.function_word() : words[k]);
        }
        out.push_back({t, label});
    }
    return out;
}

}  // namespace

TEST(Decide, TruthTable) {
    const BinThresholds t{0.5, 0.7};
    const double dclm[] = {0.4, 0.5, 0.6};
    const double betr[] = {0.6, 0.7, 0.8};
    for (double a : dclm) {
        for (double b : betr) {
            auto d = decide(a, b, t);
            EXPECT_EQ(d.accepted(), a >= t.tau_dclm || b >= t.tau_betr) << a << "," << b;
            EXPECT_EQ(d.via_dclm, a >= t.tau_dclm);
            EXPECT_EQ(d.via_betr, b >= t.tau_betr);
        }
    }
    EXPECT_EQ(decide(0.9, 0.9, t).bins(), (std::vector<std::string>{"dclm", "betr"}));
    EXPECT_TRUE(decide(0.0, 0.0, t).bins().empty());
}

TEST(Decide, RaisingAScoreNeverRejects) {
    synth::Generator g(5);
    for (int i = 0; i < 10000; ++i) {
        BinThresholds t{g.real(), g.real()};
        double a = g.real(), b = g.real();
        bool base = decide(a, b, t).accepted();
        if (base) {
            EXPECT_TRUE(decide(std::min(1.0, a + g.real()), b, t).accepted());
            EXPECT_TRUE(decide(a, std::min(1.0, b + g.real()), t).accepted());
        }
    }
}

TEST(GateVerdict, ReasonsAndDecision) {
    Document d = make_document("x", "", "text");
    GateDecision dec;
    auto v = gate_verdict(d, ConstScorer(0.1), ConstScorer(0.2), {0.5, 0.5}, &dec);
    EXPECT_EQ(v.criterion, "BelowThreshold");
    EXPECT_DOUBLE_EQ(dec.s_dclm, 0.1);
    EXPECT_DOUBLE_EQ(dec.s_betr, 0.2);
    EXPECT_FALSE(gate_verdict(d, ConstScorer(0.5), ConstScorer(0.0), {0.5, 0.5}).rejected());
    EXPECT_EQ(gate_verdict(d, BrokenScorer{}, ConstScorer(1.0), {0.5, 0.5}).criterion, "ScorerError");
    EXPECT_THROW(gate(d, ConstScorer(1.0), BrokenScorer{}, {0.5, 0.5}), std::runtime_error);
}

TEST(FieldScorer, TopLevelThenMetadata) {
    auto r = parse_record(R"({"text":"x","q":0.25,"metadata":{"b":0.75}})", 1);
    const auto& d = std::get<Document>(r);
    EXPECT_DOUBLE_EQ(FieldScorer("q").score(d), 0.25);
    EXPECT_DOUBLE_EQ(FieldScorer("b").score(d), 0.75);
    EXPECT_THROW(FieldScorer("missing").score(d), std::exception);
}

TEST(Cosine, ExamplesAndErrors) {
    std::vector<double> a = {1, 2}, b = {2, 1}, z = {0, 0}, c = {1, 2, 3};
    EXPECT_NEAR(cosine(a, b), 0.8, 1e-12);
    EXPECT_NEAR(cosine(a, a), 1.0, 1e-12);
    EXPECT_THROW(cosine(a, z), std::invalid_argument);
    EXPECT_THROW(cosine(a, c), std::invalid_argument);
}

TEST(Cosine, MaxMatchesBruteForce) {
    synth::Generator g(8);
    std::vector<Embedding> docs(100), ex(10);
    for (auto* set : {&docs, &ex}) {
        for (auto& e : *set) {
            e.resize(16);
            for (auto& x : e) x = g.real() * 2 - 1;
        }
    }
    auto s = max_cosine_scores(docs, ex);
    ASSERT_EQ(s.size(), docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double best = -2;
        for (const auto& e : ex) best = std::max(best, naive_cosine(docs[i], e));
        EXPECT_NEAR(s[i], best, 1e-9);
    }
}

TEST(HashedBagEmbedder, SimilarTextsAreCloser) {
    HashedBagEmbedder emb(256);
    auto a = emb.embed("the river flooded the valley after the storm");
    auto b = emb.embed("after the storm the valley was flooded by the river");
    auto c = emb.embed("quarterly revenue exceeded analyst expectations");
    EXPECT_EQ(a.size(), 256u);
    EXPECT_GT(cosine(a, b), cosine(a, c));
}

TEST(BetrTrainingSet, BalancedTopFractionAndSeeded) {
    synth::Generator g(9);
    std::vector<BetrScore> scores;
    for (int i = 0; i < 10000; ++i) scores.push_back({"d" + std::to_string(i), g.real()});
    auto set = build_betr_training_set(scores, 2000, 42, 0.10);
    ASSERT_EQ(set.positives.size(), 1000u);
    ASSERT_EQ(set.negatives.size(), 1000u);
    EXPECT_FALSE(set.short_of_target);
    std::vector<double> sorted;
    for (const auto& s : scores) sorted.push_back(s.max_cosine);
    std::sort(sorted.rbegin(), sorted.rend());
    const double cut = sorted[999];
    std::set<std::size_t> pos(set.positives.begin(), set.positives.end());
    for (auto i : set.positives) EXPECT_GE(scores[i].max_cosine, cut);
    for (auto i : set.negatives) {
        EXPECT_LT(scores[i].max_cosine, cut);
        EXPECT_FALSE(pos.count(i));
    }
    auto again = build_betr_training_set(scores, 2000, 42, 0.10);
    EXPECT_EQ(again.negatives, set.negatives);
    EXPECT_NE(build_betr_training_set(scores, 2000, 7, 0.10).negatives, set.negatives);
}

TEST(BetrTrainingSet, ShortOfTargetAndTies) {
    std::vector<BetrScore> scores = {{"b", 0.5}, {"a", 0.5}, {"c", 0.1}, {"d", 0.0}};
    auto set = build_betr_training_set(scores, 100, 1, 0.5);
    EXPECT_TRUE(set.short_of_target);
    EXPECT_EQ(set.positives, (std::vector<std::size_t>{1, 0}));
    EXPECT_EQ(set.negatives.size(), 2u);
}

TEST(NgramModel, LearnsSeparableSetAndRetrainsIdentically) {
    synth::Generator g(21);
    auto train = separable(g, 2000);
    auto held = separable(g, 1000);
    TrainConfig cfg;
    cfg.buckets = 1u << 16;
    auto m = NgramModel::train(train, cfg);
    std::size_t right = 0;
    for (const auto& ex : held) right += (m.score(ex.text) >= 0.5) == (ex.label == 1);
    EXPECT_GE(static_cast<double>(right) / held.size(), 0.99);
    EXPECT_EQ(NgramModel::train(train, cfg).serialize(), m.serialize());
}

TEST(NgramModel, SerializationRoundTripAndErrors) {
    synth::Generator g(22);
    TrainConfig cfg;
    cfg.buckets = 1u << 12;
    cfg.epochs = 2;
    auto m = NgramModel::train(separable(g, 200), cfg);
    auto bytes = m.serialize();
    auto back = NgramModel::deserialize(bytes);
    EXPECT_EQ(back.serialize(), bytes);
    EXPECT_DOUBLE_EQ(back.score("some words here"), m.score("some words here"));
    EXPECT_THROW(NgramModel::deserialize("garbage"), std::runtime_error);
    EXPECT_THROW(NgramModel::deserialize(bytes + "x"), std::runtime_error);
    std::vector<LabeledText> one_class = {{"a b", 1}, {"c d", 1}};
    EXPECT_THROW(NgramModel::train(one_class, cfg), std::invalid_argument);
    auto f = m.features("alpha beta alpha");
    double norm = 0;
    for (const auto& x : f) norm += double(x.value) * x.value;
    EXPECT_NEAR(norm, 1.0, 1e-5);
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end(), [](auto& a, auto& b) { return a.index < b.index; }));
}

TEST(Sweep, MatchesDirectCount) {
    synth::Generator g(30);
    std::vector<ScoredDocument> docs;
    for (int i = 0; i < 1000; ++i) docs.push_back({g.real() * 0.1, g.real(), g.between(1, 500)});
    auto pairs = default_sweep_pairs();
    EXPECT_EQ(pairs.size(), 5u);
    auto pts = sweep(docs, pairs);
    ASSERT_EQ(pts.size(), pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        std::uint64_t tok = 0, tok_ok = 0, n_ok = 0;
        for (const auto& d : docs) {
            tok += d.tokens;
            if (d.s_dclm >= pairs[k].tau_dclm || d.s_betr >= pairs[k].tau_betr) {
                tok_ok += d.tokens;
                ++n_ok;
            }
        }
        EXPECT_EQ(pts[k].docs_accepted, n_ok);
        EXPECT_EQ(pts[k].tokens_total, tok);
        EXPECT_NEAR(pts[k].retention_pct(), 100.0 * tok_ok / tok, 1e-9);
    }
    EXPECT_EQ(sweep_to_json(pts).size(), pairs.size());
    EXPECT_NE(render_sweep_table(pts).find("Retention %"), std::string::npos);
}
