#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ckt/encoder.hpp"
#include "ckt/sample.hpp"
#include "ckt/tensor.hpp"
#include "ckt/vocab.hpp"

namespace ckt {

class Rng;

/// One commonsense sentence attached to an object category.
struct Fact {
    int fact_id = -1;
    int category_id = -1;
    std::string text;
    TextSequence tokens;
};

/// Facts keyed by category, in a stable insertion order.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    int add_category(const std::string& name);
    void add_fact(int fact_id, int category_id, const std::string& text,
                  const Vocabulary& vocab);

    /// Full fact list of a category, insertion order; unknown id is an error.
    const std::vector<Fact>& retrieve_by_category(int category_id) const;
    const Fact& fact_by_id(int fact_id) const;
    bool has_category(int category_id) const;

    std::size_t category_count() const { return category_names_.size(); }
    const std::string& category_name(int category_id) const;
    const std::vector<std::string>& category_names() const { return category_names_; }
    std::size_t fact_count() const { return fact_order_.size(); }
    /// All fact ids in insertion order (the uniform-random-draw pool).
    const std::vector<int>& fact_ids() const { return fact_order_; }

    void save(const std::string& path) const;
    static KnowledgeBase load(const std::string& path, const Vocabulary& vocab);

private:
    std::vector<std::string> category_names_;
    std::vector<std::vector<Fact>> facts_by_category_;
    std::map<int, std::pair<int, std::size_t>> fact_index_;  // fact_id -> (category, slot)
    std::vector<int> fact_order_;
};

struct TopKEntry {
    int fact_id = -1;
    double similarity = 0.0;
};

/// Top facts for one candidate: similarities non-increasing, ties broken by
/// ascending fact_id, never longer than the candidate category's fact list.
struct TopKResult {
    int candidate_index = -1;
    std::vector<TopKEntry> entries;
};

/// Expression-vs-fact scorer. begin() fixes the (image, expression) context
/// so implementations can precompute expression features and cache repeated
/// fact texts within a sample.
class FactScorer {
public:
    virtual ~FactScorer() = default;

    class Session {
    public:
        virtual ~Session() = default;
        virtual double score(const Fact& fact) = 0;
    };

    virtual std::unique_ptr<Session> begin(const std::vector<RegionCandidate>& regions,
                                           const TextSequence& expression) const = 0;
    virtual std::string name() const = 0;
};

/// cosine(cross(I,e), cross(I,f)) from a trained bi-modal extractor.
class MultimodalScorer : public FactScorer {
public:
    explicit MultimodalScorer(const BimodalModel& model) : model_(model) {}
    std::unique_ptr<Session> begin(const std::vector<RegionCandidate>& regions,
                                   const TextSequence& expression) const override;
    std::string name() const override { return "multimodal"; }

private:
    const BimodalModel& model_;
};

/// Same extractor, but every candidate feature is replaced by the mean
/// visual feature over the image before embedding (image-blinded variant).
class TextOnlyScorer : public FactScorer {
public:
    explicit TextOnlyScorer(const BimodalModel& model) : model_(model) {}
    std::unique_ptr<Session> begin(const std::vector<RegionCandidate>& regions,
                                   const TextSequence& expression) const override;
    std::string name() const override { return "text-only"; }

private:
    const BimodalModel& model_;
};

/// Frozen static token table: cosine of mean token vectors, image-blind.
class StaticEmbeddingScorer : public FactScorer {
public:
    /// Seed-initialized table of shape [vocab, dim].
    StaticEmbeddingScorer(std::size_t vocab_size, std::size_t dim, Rng rng);
    explicit StaticEmbeddingScorer(Tensor table);
    std::unique_ptr<Session> begin(const std::vector<RegionCandidate>& regions,
                                   const TextSequence& expression) const override;
    std::string name() const override { return "static"; }
    const Tensor& table() const { return table_; }

private:
    Tensor table_;
};

/// cosine(cross(I,e), cross(I,f)) as a one-off call.
double multimodal_similarity(const std::vector<RegionCandidate>& regions,
                             const TextSequence& expression, const TextSequence& fact,
                             const BimodalModel& extractor);

/// Mean-token-vector cosine against a static table; image-independent.
double static_embedding_similarity(const TextSequence& expression, const TextSequence& fact,
                                   const Tensor& table);

/// multimodal_similarity with every candidate feature replaced by the mean.
double text_only_similarity(const std::vector<RegionCandidate>& regions,
                            const TextSequence& expression, const TextSequence& fact,
                            const BimodalModel& extractor);

/// Score all facts of `category_id` and keep the best k (fewer when the
/// category is small).
TopKResult top_k_facts(const std::vector<RegionCandidate>& regions,
                       const TextSequence& expression, int category_id,
                       const KnowledgeBase& kb, std::size_t k, FactScorer::Session& session);

/// Per-candidate top-k for a whole sample (one scorer session, shared fact
/// scores across same-category candidates).
std::vector<TopKResult> search_sample(const std::vector<RegionCandidate>& regions,
                                      const TextSequence& expression, const KnowledgeBase& kb,
                                      std::size_t k, const FactScorer& scorer);

/// Precomputed fact search keyed by (sample_id, candidate_index).
class TopKCache {
public:
    void put(std::int64_t sample_id, int candidate_index, std::vector<TopKEntry> entries);
    const std::vector<TopKEntry>& get(std::int64_t sample_id, int candidate_index) const;
    bool has(std::int64_t sample_id, int candidate_index) const;
    std::size_t size() const { return entries_.size(); }

    /// Copy with per-candidate lists cut to at most k entries.
    TopKCache truncated(std::size_t k) const;
    void merge(const TopKCache& other);

    void save(const std::string& path, std::size_t k, const std::string& scorer_name) const;
    static TopKCache load(const std::string& path);

private:
    std::map<std::pair<std::int64_t, int>, std::vector<TopKEntry>> entries_;
};

/// Build the cache for a list of samples. Candidate scoring within a sample
/// shares one session; samples may be scored on several threads, results
/// assembled in sample order.
TopKCache build_top_k_cache(const std::vector<Sample>& samples, const KnowledgeBase& kb,
                            std::size_t k, const FactScorer& scorer, std::size_t threads = 1);

struct SimTrainConfig {
    std::size_t steps = 300;
    std::size_t batch_size = 16;
    double learning_rate = 6e-5;
    double weight_decay = 0.01;
    double replace_prob = 0.5;  // ground-truth fact swapped for a random one
    std::uint64_t seed = 1;
    ModelConfig model;

    void validate() const;
};

struct SimTrainResult {
    BimodalModel model;
    std::vector<double> loss_curve;  // mean squared error per step
};

/// Train the multimodal similarity extractor: with probability replace_prob
/// the ground-truth fact is swapped for a uniform random KB fact with target
/// similarity 0 (otherwise target 1); squared error on the cosine.
SimTrainResult train_similarity_extractor(const std::vector<Sample>& train,
                                          const KnowledgeBase& kb,
                                          const SimTrainConfig& config);

}  // namespace ckt
