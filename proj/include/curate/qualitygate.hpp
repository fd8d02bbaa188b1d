#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curate/corpus.hpp"

namespace curate::qualitygate {

inline constexpr std::string_view kStage = "quality_gate";

struct BinThresholds {
    double tau_dclm = 0.025119;
    double tau_betr = 0.76;
};

/// Document-level quality score in [0, 1]. Implementations must be safe for
/// concurrent const use and may throw on failure.
class QualityScorer {
public:
    virtual ~QualityScorer() = default;
    virtual double score(const Document& doc) const = 0;
};

struct GateDecision {
    double s_dclm = 0.0;
    double s_betr = 0.0;
    bool via_dclm = false;
    bool via_betr = false;

    bool accepted() const { return via_dclm || via_betr; }
    std::vector<std::string> bins() const;
};

/// Logical-OR rule; equality with a threshold accepts.
GateDecision decide(double s_dclm, double s_betr, const BinThresholds& thresholds);

/// Scores with both scorers (both always evaluated) and applies decide().
/// Scorer exceptions propagate.
GateDecision gate(const Document& doc, const QualityScorer& dclm, const QualityScorer& betr,
                  const BinThresholds& thresholds);

/// gate() as a pipeline verdict. A scorer failure rejects with criterion
/// "ScorerError"; a document below both thresholds with "BelowThreshold".
Verdict gate_verdict(const Document& doc, const QualityScorer& dclm, const QualityScorer& betr,
                     const BinThresholds& thresholds, GateDecision* decision = nullptr);

/// Reads a numeric field of the input record (top level, then "metadata").
class FieldScorer : public QualityScorer {
public:
    explicit FieldScorer(std::string field) : field_(std::move(field)) {}
    double score(const Document& doc) const override;

private:
    std::string field_;
};

// ---- BETR-style benchmark proximity ------------------------------------------------------------

using Embedding = std::vector<double>;

/// dot(u, v) / (|u| |v|). Throws std::invalid_argument on a size mismatch or a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

struct BetrScore {
    std::string id;
    double max_cosine = 0.0;
};

/// Maximum cosine of each document against every benchmark example.
std::vector<double> max_cosine_scores(const std::vector<Embedding>& docs, const std::vector<Embedding>& examples);

std::vector<BetrScore> betr_score_corpus(const std::vector<std::string>& ids, const std::vector<Embedding>& docs,
                                         const std::vector<Embedding>& examples);

/// Text to dense vector. The built-in provider hashes normalized unigrams
/// into a fixed number of dimensions; external embedding models plug in here.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual Embedding embed(std::string_view text) const = 0;
};

class HashedBagEmbedder : public EmbeddingProvider {
public:
    explicit HashedBagEmbedder(std::size_t dimensions = 512) : dims_(dimensions) {}
    Embedding embed(std::string_view text) const override;

private:
    std::size_t dims_;
};

struct BetrTrainingSet {
    std::vector<std::size_t> positives;  // indices into the scored corpus, best first
    std::vector<std::size_t> negatives;
    bool short_of_target = false;
};

/// Positives come from the top `top_fraction` by score (ties broken by id
/// ascending), negatives are a seeded uniform sample from the rest. Both
/// classes get min(target/2, |top|, |rest|) members.
BetrTrainingSet build_betr_training_set(const std::vector<BetrScore>& scores, std::size_t target_size,
                                        std::uint64_t seed = 42, double top_fraction = 0.10);

// ---- Hashed n-gram linear scorer ---------------------------------------------------------------

struct LabeledText {
    std::string text;
    int label = 0;  // 1 positive, 0 negative
};

struct TrainConfig {
    double learning_rate = 1.0;  // inputs are L2-normalized, so steps need to be large
    std::size_t epochs = 10;
    std::size_t min_count = 1;
    std::uint64_t seed = 42;
    std::uint32_t buckets = 1u << 21;
    bool bigrams = true;
};

/// Logistic model over L2-normalized hashed unigram (and optionally bigram) counts.
class NgramModel {
public:
    static constexpr std::uint32_t kMagic = 0x4E47524Du;  // "NGRM"
    static constexpr std::uint32_t kVersion = 1;

    NgramModel() = default;
    NgramModel(std::uint32_t buckets, std::uint64_t seed, bool bigrams);

    /// Seeded SGD; identical input and config give identical bytes.
    /// Throws std::invalid_argument unless both classes are present.
    static NgramModel train(const std::vector<LabeledText>& data, const TrainConfig& config = {});

    double score(std::string_view text) const;
    double linear(std::string_view text) const;

    std::string serialize() const;
    static NgramModel deserialize(std::string_view bytes);
    void save(const std::string& path) const;
    static NgramModel load(const std::string& path);

    std::uint32_t buckets() const { return buckets_; }
    std::uint64_t seed() const { return seed_; }
    bool bigrams() const { return bigrams_; }
    float bias() const { return bias_; }
    const std::vector<float>& weights() const { return weights_; }

    struct Feature {
        std::uint32_t index;
        float value;
    };
    /// Sorted, L2-normalized sparse feature vector of a text.
    std::vector<Feature> features(std::string_view text) const;

private:
    std::uint32_t buckets_ = 1u << 21;
    std::uint64_t seed_ = 42;
    bool bigrams_ = true;
    float bias_ = 0.0f;
    std::vector<float> weights_;
};

class ModelScorer : public QualityScorer {
public:
    explicit ModelScorer(std::shared_ptr<const NgramModel> model) : model_(std::move(model)) {}
    double score(const Document& doc) const override { return model_->score(doc.text); }

private:
    std::shared_ptr<const NgramModel> model_;
};

// ---- Threshold sweep ---------------------------------------------------------------------------

struct ScoredDocument {
    double s_dclm = 0.0;
    double s_betr = 0.0;
    std::size_t tokens = 0;
};

struct SweepPoint {
    BinThresholds thresholds;
    std::uint64_t docs_total = 0;
    std::uint64_t docs_accepted = 0;
    std::uint64_t tokens_total = 0;
    std::uint64_t tokens_accepted = 0;

    double retention_pct() const;  // token retention
};

std::vector<BinThresholds> default_sweep_pairs();

std::vector<SweepPoint> sweep(const std::vector<ScoredDocument>& docs, const std::vector<BinThresholds>& pairs);

Json sweep_to_json(const std::vector<SweepPoint>& points);
std::string render_sweep_table(const std::vector<SweepPoint>& points);

}  // namespace curate::qualitygate
