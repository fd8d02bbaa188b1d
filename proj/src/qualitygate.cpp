#include "curate/qualitygate.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "curate/rng.hpp"
#include "curate/text.hpp"

namespace curate::qualitygate {

std::vector<std::string> GateDecision::bins() const {
    std::vector<std::string> out;
    if (via_dclm) out.emplace_back("dclm");
    if (via_betr) out.emplace_back("betr");
    return out;
}

GateDecision decide(double s_dclm, double s_betr, const BinThresholds& t) {
    GateDecision d;
    d.s_dclm = s_dclm;
    d.s_betr = s_betr;
    d.via_dclm = s_dclm >= t.tau_dclm;
    d.via_betr = s_betr >= t.tau_betr;
    return d;
}

namespace {

double checked(double s, const char* which) {
    if (!std::isfinite(s)) throw std::runtime_error(fmt::format("{} scorer returned a non-finite score", which));
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace

GateDecision gate(const Document& doc, const QualityScorer& dclm, const QualityScorer& betr,
                  const BinThresholds& thresholds) {
    double s_dclm = checked(dclm.score(doc), "dclm");
    double s_betr = checked(betr.score(doc), "betr");
    return decide(s_dclm, s_betr, thresholds);
}

Verdict gate_verdict(const Document& doc, const QualityScorer& dclm, const QualityScorer& betr,
                     const BinThresholds& thresholds, GateDecision* decision) {
    const std::string stage(kStage);
    GateDecision d;
    try {
        d = gate(doc, dclm, betr, thresholds);
    } catch (const std::exception& e) {
        spdlog::warn("quality scorer failed on document {}: {}", doc.id, e.what());
        return Verdict::reject(stage, "ScorerError");
    }
    if (decision) *decision = d;
    if (!d.accepted()) return Verdict::reject(stage, "BelowThreshold");
    return Verdict::keep(stage);
}

double FieldScorer::score(const Document& doc) const {
    const Json* value = nullptr;
    if (doc.record.is_object()) {
        auto it = doc.record.find(field_);
        if (it != doc.record.end()) {
            value = &*it;
        } else {
            auto meta = doc.record.find("metadata");
            if (meta != doc.record.end() && meta->is_object()) {
                auto inner = meta->find(field_);
                if (inner != meta->end()) value = &*inner;
            }
        }
    }
    if (!value || !value->is_number()) throw std::runtime_error(fmt::format("score field '{}' missing", field_));
    return value->get<double>();
}

// ---- BETR ------------------------------------------------------------------------------------

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument(fmt::format("cosine: dimension mismatch {} vs {}", u.size(), v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

namespace {

double norm(const Embedding& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::vector<double> max_cosine_scores(const std::vector<Embedding>& docs, const std::vector<Embedding>& examples) {
    if (examples.empty()) throw std::invalid_argument("betr scoring needs at least one benchmark example");
    const std::size_t dim = examples.front().size();
    std::vector<Embedding> unit;
    unit.reserve(examples.size());
    for (const auto& e : examples) {
        if (e.size() != dim) throw std::invalid_argument("benchmark embeddings have mixed dimensions");
        double n = norm(e);
        if (n == 0.0) continue;  // an empty example cannot be near anything
        Embedding u(e);
        for (double& x : u) x /= n;
        unit.push_back(std::move(u));
    }

    std::vector<double> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        if (d.size() != dim) {
            throw std::invalid_argument(fmt::format("document embedding has dimension {}, expected {}", d.size(), dim));
        }
        double n = norm(d);
        if (n == 0.0 || unit.empty()) {
            out.push_back(0.0);
            continue;
        }
        double best = -1.0;
        for (const auto& u : unit) {
            double dot = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dot += d[i] * u[i];
            best = std::max(best, dot / n);
        }
        out.push_back(std::clamp(best, -1.0, 1.0));
    }
    return out;
}

std::vector<BetrScore> betr_score_corpus(const std::vector<std::string>& ids, const std::vector<Embedding>& docs,
                                         const std::vector<Embedding>& examples) {
    if (ids.size() != docs.size()) throw std::invalid_argument("betr_score_corpus: ids and embeddings differ in size");
    auto scores = max_cosine_scores(docs, examples);
    std::vector<BetrScore> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = {ids[i], scores[i]};
    return out;
}

Embedding HashedBagEmbedder::embed(std::string_view input) const {
    Embedding v(dims_, 0.0);
    text::for_each_word(input, [&](std::string_view w) {
        std::string tok = text::normalize_token(w);
        if (tok.empty()) return;
        v[text::hash64(tok, 0xbe7a) % dims_] += 1.0;
    });
    return v;
}

BetrTrainingSet build_betr_training_set(const std::vector<BetrScore>& scores, std::size_t target_size,
                                        std::uint64_t seed, double top_fraction) {
    BetrTrainingSet set;
    const std::size_t n = scores.size();
    const std::size_t half = target_size / 2;
    if (half == 0 || n == 0) return set;
    if (target_size % 2 != 0) spdlog::warn("odd BETR target size {}; using {} per class", target_size, half);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a].max_cosine != scores[b].max_cosine) return scores[a].max_cosine > scores[b].max_cosine;
        return scores[a].id < scores[b].id;
    });

    const auto top = static_cast<std::size_t>(std::floor(static_cast<double>(n) * top_fraction));
    const std::size_t rest = n - top;
    const std::size_t per_class = std::min({half, top, rest});
    if (per_class < half) {
        set.short_of_target = true;
        spdlog::warn("BETR training set short of target: {} per class requested, {} available", half, per_class);
    }

    set.positives.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(per_class));
    std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    rng::Engine eng(seed);
    rng::sample_prefix(pool, per_class, eng);
    set.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_class));
    return set;
}

// ---- NgramModel ------------------------------------------------------------------------------

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
}

class ByteReader {
public:
    explicit ByteReader(std::string_view b) : b_(b) {}
    std::uint64_t get(int bytes) {
        if (pos_ + static_cast<std::size_t>(bytes) > b_.size()) throw std::runtime_error("model file truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }
    float get_f32() {
        auto bits = static_cast<std::uint32_t>(get(4));
        float f;
        std::memcpy(&f, &bits, sizeof f);
        return f;
    }
    bool done() const { return pos_ == b_.size(); }

private:
    std::string_view b_;
    std::size_t pos_ = 0;
};

}  // namespace

NgramModel::NgramModel(std::uint32_t buckets, std::uint64_t seed, bool bigrams)
    : buckets_(buckets), seed_(seed), bigrams_(bigrams), weights_(buckets, 0.0f) {
    if (buckets == 0) throw std::invalid_argument("bucket count must be positive");
}

std::vector<NgramModel::Feature> NgramModel::features(std::string_view input) const {
    std::vector<std::uint32_t> idx;
    std::uint64_t prev = 0;
    bool have_prev = false;
    text::for_each_word(input, [&](std::string_view w) {
        std::string tok = text::normalize_token(w);
        if (tok.empty()) return;
        std::uint64_t h = text::hash64(tok, seed_);
        idx.push_back(static_cast<std::uint32_t>(h % buckets_));
        if (bigrams_ && have_prev) idx.push_back(static_cast<std::uint32_t>(mix(prev, h) % buckets_));
        prev = h;
        have_prev = true;
    });
    std::sort(idx.begin(), idx.end());
    std::vector<Feature> out;
    double sq = 0.0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && idx[j] == idx[i]) ++j;
        auto count = static_cast<float>(j - i);
        out.push_back({idx[i], count});
        sq += static_cast<double>(count) * count;
        i = j;
    }
    if (sq > 0.0) {
        auto inv = static_cast<float>(1.0 / std::sqrt(sq));
        for (auto& f : out) f.value *= inv;
    }
    return out;
}

double NgramModel::linear(std::string_view input) const {
    double z = bias_;
    for (const auto& f : features(input)) z += static_cast<double>(weights_[f.index]) * f.value;
    return z;
}

double NgramModel::score(std::string_view input) const { return sigmoid(linear(input)); }

NgramModel NgramModel::train(const std::vector<LabeledText>& data, const TrainConfig& config) {
    std::size_t pos = 0, neg = 0;
    for (const auto& d : data) (d.label ? pos : neg)++;
    if (pos == 0 || neg == 0) throw std::invalid_argument("training needs at least one example of each class");

    NgramModel model(config.buckets, config.seed, config.bigrams);
    std::vector<std::vector<Feature>> feats;
    feats.reserve(data.size());
    for (const auto& d : data) feats.push_back(model.features(d.text));

    if (config.min_count > 1) {
        std::vector<std::uint32_t> seen(config.buckets, 0);
        for (const auto& fs : feats) {
            for (const auto& f : fs) ++seen[f.index];
        }
        for (auto& fs : feats) {
            std::erase_if(fs, [&](const Feature& f) { return seen[f.index] < config.min_count; });
        }
    }

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::Engine eng(config.seed);
    const double lr = config.learning_rate;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng::shuffle(order, eng);
        for (std::size_t i : order) {
            double z = model.bias_;
            for (const auto& f : feats[i]) z += static_cast<double>(model.weights_[f.index]) * f.value;
            double g = lr * (static_cast<double>(data[i].label != 0) - sigmoid(z));
            for (const auto& f : feats[i]) {
                model.weights_[f.index] = static_cast<float>(model.weights_[f.index] + g * f.value);
            }
            model.bias_ = static_cast<float>(model.bias_ + g);
        }
    }
    return model;
}

std::string NgramModel::serialize() const {
    std::string out;
    out.reserve(28 + weights_.size() * 4);
    put_u32(out, kMagic);
    put_u32(out, kVersion);
    put_u32(out, buckets_);
    put_u32(out, bigrams_ ? 1u : 0u);
    put_u64(out, seed_);
    put_f32(out, bias_);
    for (float w : weights_) put_f32(out, w);
    return out;
}

NgramModel NgramModel::deserialize(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.get(4) != kMagic) throw std::runtime_error("not an n-gram model file (bad magic)");
    auto version = r.get(4);
    if (version != kVersion) throw std::runtime_error(fmt::format("unsupported model version {}", version));
    auto buckets = static_cast<std::uint32_t>(r.get(4));
    auto flags = static_cast<std::uint32_t>(r.get(4));
    auto seed = r.get(8);
    NgramModel m(buckets, seed, (flags & 1u) != 0);
    m.bias_ = r.get_f32();
    for (auto& w : m.weights_) w = r.get_f32();
    if (!r.done()) throw std::runtime_error("trailing bytes after model weights");
    return m;
}

void NgramModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write model file {}", path));
    auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(fmt::format("failed writing model file {}", path));
}

NgramModel NgramModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open model file {}", path));
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

// ---- Sweep -----------------------------------------------------------------------------------

double SweepPoint::retention_pct() const {
    return tokens_total ? 100.0 * static_cast<double>(tokens_accepted) / static_cast<double>(tokens_total) : 0.0;
}

std::vector<BinThresholds> default_sweep_pairs() {
    return {{0.2, 0.635}, {0.025119, 0.76}, {0.09, 0.635}, {0.018112, 0.7347}, {0.018112, 0.70}};
}

std::vector<SweepPoint> sweep(const std::vector<ScoredDocument>& docs, const std::vector<BinThresholds>& pairs) {
    std::vector<SweepPoint> points(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto& pt = points[p];
        pt.thresholds = pairs[p];
        for (const auto& d : docs) {
            ++pt.docs_total;
            pt.tokens_total += d.tokens;
            if (decide(d.s_dclm, d.s_betr, pairs[p]).accepted()) {
                ++pt.docs_accepted;
                pt.tokens_accepted += d.tokens;
            }
        }
    }
    return points;
}

Json sweep_to_json(const std::vector<SweepPoint>& points) {
    Json arr = Json::array();
    for (const auto& p : points) {
        Json j;
        j["tau_dclm"] = p.thresholds.tau_dclm;
        j["tau_betr"] = p.thresholds.tau_betr;
        j["docs_total"] = p.docs_total;
        j["docs_accepted"] = p.docs_accepted;
        j["tokens_total"] = p.tokens_total;
        j["tokens_accepted"] = p.tokens_accepted;
        j["retention_pct"] = p.retention_pct();
        arr.push_back(std::move(j));
    }
    return arr;
}

std::string render_sweep_table(const std::vector<SweepPoint>& points) {
    std::string out = fmt::format("{:>10}  {:>10}  {:>12}  {:>10}\n", "tau_dclm", "tau_betr", "Retention %", "Docs");
    for (const auto& p : points) {
        out += fmt::format("{:>10}  {:>10}  {:>11.2f}%  {:>10}\n", fmt::format("{:g}", p.thresholds.tau_dclm),
                           fmt::format("{:g}", p.thresholds.tau_betr), p.retention_pct(), p.docs_accepted);
    }
    return out;
}

}  // namespace curate::qualitygate
