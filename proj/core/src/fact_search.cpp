#include "ckt/fact_search.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ckt/errors.hpp"
#include "ckt/jsonl.hpp"
#include "ckt/ops.hpp"
#include "ckt/optim.hpp"
#include "ckt/parallel.hpp"
#include "ckt/rng.hpp"

namespace ckt {

using nlohmann::json;

int KnowledgeBase::add_category(const std::string& name) {
    category_names_.push_back(name);
    facts_by_category_.emplace_back();
    return static_cast<int>(category_names_.size()) - 1;
}

void KnowledgeBase::add_fact(int fact_id, int category_id, const std::string& text,
                             const Vocabulary& vocab) {
    if (category_id < 0 || static_cast<std::size_t>(category_id) >= category_names_.size()) {
        throw LookupError("kb: unknown category id " + std::to_string(category_id));
    }
    if (fact_index_.count(fact_id)) {
        throw ValidationError("kb: duplicate fact id " + std::to_string(fact_id));
    }
    Fact f;
    f.fact_id = fact_id;
    f.category_id = category_id;
    f.text = text;
    f.tokens = tokenize(vocab, text, TextKind::fact);
    auto& list = facts_by_category_[static_cast<std::size_t>(category_id)];
    fact_index_[fact_id] = {category_id, list.size()};
    list.push_back(std::move(f));
    fact_order_.push_back(fact_id);
}

const std::vector<Fact>& KnowledgeBase::retrieve_by_category(int category_id) const {
    if (category_id < 0 || static_cast<std::size_t>(category_id) >= facts_by_category_.size()) {
        throw LookupError("kb: unknown category id " + std::to_string(category_id));
    }
    return facts_by_category_[static_cast<std::size_t>(category_id)];
}

const Fact& KnowledgeBase::fact_by_id(int fact_id) const {
    const auto it = fact_index_.find(fact_id);
    if (it == fact_index_.end()) {
        throw LookupError("kb: unknown fact id " + std::to_string(fact_id));
    }
    return facts_by_category_[static_cast<std::size_t>(it->second.first)][it->second.second];
}

bool KnowledgeBase::has_category(int category_id) const {
    return category_id >= 0 &&
           static_cast<std::size_t>(category_id) < facts_by_category_.size();
}

const std::string& KnowledgeBase::category_name(int category_id) const {
    if (!has_category(category_id)) {
        throw LookupError("kb: unknown category id " + std::to_string(category_id));
    }
    return category_names_[static_cast<std::size_t>(category_id)];
}

void KnowledgeBase::save(const std::string& path) const {
    json header{{"format", "ckt.kb.v1"}, {"categories", category_names_}};
    std::vector<json> records;
    records.reserve(fact_order_.size());
    for (int id : fact_order_) {
        const Fact& f = fact_by_id(id);
        records.push_back(json{{"fact_id", f.fact_id},
                               {"category", category_name(f.category_id)},
                               {"text", f.text}});
    }
    write_jsonl(path, header, records);
}

KnowledgeBase KnowledgeBase::load(const std::string& path, const Vocabulary& vocab) {
    const JsonlFile file = read_jsonl(path, "ckt.kb.v1");
    KnowledgeBase kb;
    std::map<std::string, int> ids;
    for (const auto& name : file.header.at("categories").get<std::vector<std::string>>()) {
        ids[name] = kb.add_category(name);
    }
    std::size_t line_no = 1;
    for (const auto& rec : file.records) {
        ++line_no;
        try {
            const std::string category = rec.at("category").get<std::string>();
            const auto it = ids.find(category);
            if (it == ids.end()) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": category '" + category + "' not in header");
            }
            kb.add_fact(rec.at("fact_id").get<int>(), it->second,
                        rec.at("text").get<std::string>(), vocab);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return kb;
}

namespace {

std::vector<double> tensor_to_vector(const Tensor& t) {
    return {t.values().begin(), t.values().end()};
}

double cosine_of_values(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const double na = std::max(std::sqrt(na2), kCosineEps);
    const double nb = std::max(std::sqrt(nb2), kCosineEps);
    return dot / (na * nb);
}

/// Shared session for the two encoder-backed scorers: fixes the candidate
/// set, caches the expression cross feature and one cross feature per
/// distinct fact text.
class EncoderSession : public FactScorer::Session {
public:
    EncoderSession(const BimodalModel& model, std::vector<RegionCandidate> regions,
                   const TextSequence& expression)
        : model_(model), regions_(std::move(regions)) {
        NoGradGuard no_grad;
        expression_feature_ = tensor_to_vector(
            model_.cross_modality_feature(regions_, expression));
    }

    double score(const Fact& fact) override {
        auto it = fact_features_.find(fact.tokens.token_ids);
        if (it == fact_features_.end()) {
            NoGradGuard no_grad;
            auto feature = tensor_to_vector(
                model_.cross_modality_feature(regions_, fact.tokens));
            it = fact_features_.emplace(fact.tokens.token_ids, std::move(feature)).first;
        }
        return cosine_of_values(expression_feature_, it->second);
    }

private:
    const BimodalModel& model_;
    std::vector<RegionCandidate> regions_;
    std::vector<double> expression_feature_;
    std::map<std::vector<int>, std::vector<double>> fact_features_;
};

std::vector<RegionCandidate> mean_blinded_regions(const std::vector<RegionCandidate>& regions) {
    if (regions.empty()) throw DimensionError("text-only scorer: no regions");
    const std::size_t d_v = regions[0].visual_feature.size();
    std::vector<double> mean(d_v, 0.0);
    for (const auto& r : regions) {
        if (r.visual_feature.size() != d_v) {
            throw DimensionError("text-only scorer: inconsistent feature lengths");
        }
        for (std::size_t j = 0; j < d_v; ++j) mean[j] += r.visual_feature[j];
    }
    for (auto& v : mean) v /= static_cast<double>(regions.size());
    std::vector<RegionCandidate> blinded = regions;
    for (auto& r : blinded) r.visual_feature = mean;
    return blinded;
}

}  // namespace

std::unique_ptr<FactScorer::Session> MultimodalScorer::begin(
    const std::vector<RegionCandidate>& regions, const TextSequence& expression) const {
    return std::make_unique<EncoderSession>(model_, regions, expression);
}

std::unique_ptr<FactScorer::Session> TextOnlyScorer::begin(
    const std::vector<RegionCandidate>& regions, const TextSequence& expression) const {
    return std::make_unique<EncoderSession>(model_, mean_blinded_regions(regions), expression);
}

StaticEmbeddingScorer::StaticEmbeddingScorer(std::size_t vocab_size, std::size_t dim, Rng rng)
    : table_(Tensor({vocab_size, dim}, rng.normal_vector(vocab_size * dim, 0.0, 1.0))) {}

StaticEmbeddingScorer::StaticEmbeddingScorer(Tensor table) : table_(std::move(table)) {}

namespace {

class StaticSession : public FactScorer::Session {
public:
    StaticSession(const Tensor& table, const TextSequence& expression) : table_(table) {
        expression_mean_ = mean_tokens(expression);
    }

    double score(const Fact& fact) override {
        const auto mean = mean_tokens(fact.tokens);
        return cosine_of_values(expression_mean_, mean);
    }

private:
    std::vector<double> mean_tokens(const TextSequence& text) const {
        if (text.token_ids.empty()) throw ValidationError("static scorer: empty text");
        const std::size_t d = table_.dim(1);
        std::vector<double> mean(d, 0.0);
        const auto tv = table_.values();
        for (int id : text.token_ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= table_.dim(0)) {
                throw IndexError("static scorer: token id " + std::to_string(id) +
                                 " outside table");
            }
            for (std::size_t j = 0; j < d; ++j) {
                mean[j] += tv[static_cast<std::size_t>(id) * d + j];
            }
        }
        for (auto& v : mean) v /= static_cast<double>(text.token_ids.size());
        return mean;
    }

    const Tensor& table_;
    std::vector<double> expression_mean_;
};

}  // namespace

std::unique_ptr<FactScorer::Session> StaticEmbeddingScorer::begin(
    const std::vector<RegionCandidate>&, const TextSequence& expression) const {
    return std::make_unique<StaticSession>(table_, expression);
}

double multimodal_similarity(const std::vector<RegionCandidate>& regions,
                             const TextSequence& expression, const TextSequence& fact,
                             const BimodalModel& extractor) {
    NoGradGuard no_grad;
    const Tensor e = extractor.cross_modality_feature(regions, expression);
    const Tensor f = extractor.cross_modality_feature(regions, fact);
    return cosine_similarity(e, f).item();
}

double static_embedding_similarity(const TextSequence& expression, const TextSequence& fact,
                                   const Tensor& table) {
    StaticEmbeddingScorer scorer(table);
    const auto session = scorer.begin({}, expression);
    Fact f;
    f.tokens = fact;
    return session->score(f);
}

double text_only_similarity(const std::vector<RegionCandidate>& regions,
                            const TextSequence& expression, const TextSequence& fact,
                            const BimodalModel& extractor) {
    return multimodal_similarity(mean_blinded_regions(regions), expression, fact, extractor);
}

TopKResult top_k_facts(const std::vector<RegionCandidate>&, const TextSequence&,
                       int category_id, const KnowledgeBase& kb, std::size_t k,
                       FactScorer::Session& session) {
    if (k == 0) throw ValidationError("top_k_facts: k must be >= 1");
    const auto& facts = kb.retrieve_by_category(category_id);
    TopKResult out;
    out.entries.reserve(facts.size());
    for (const auto& f : facts) out.entries.push_back({f.fact_id, session.score(f)});
    std::sort(out.entries.begin(), out.entries.end(), [](const TopKEntry& a, const TopKEntry& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.fact_id < b.fact_id;
    });
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

std::vector<TopKResult> search_sample(const std::vector<RegionCandidate>& regions,
                                      const TextSequence& expression, const KnowledgeBase& kb,
                                      std::size_t k, const FactScorer& scorer) {
    const auto session = scorer.begin(regions, expression);
    std::vector<TopKResult> out;
    out.reserve(regions.size());
    // Same-category candidates share the same fact list and hence the same
    // top-k; compute once per category.
    std::map<int, std::vector<TopKEntry>> by_category;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const int cat = regions[i].category_id;
        auto it = by_category.find(cat);
        if (it == by_category.end()) {
            TopKResult r = top_k_facts(regions, expression, cat, kb, k, *session);
            it = by_category.emplace(cat, std::move(r.entries)).first;
        }
        TopKResult r;
        r.candidate_index = static_cast<int>(i);
        r.entries = it->second;
        out.push_back(std::move(r));
    }
    return out;
}

void TopKCache::put(std::int64_t sample_id, int candidate_index,
                    std::vector<TopKEntry> entries) {
    entries_[{sample_id, candidate_index}] = std::move(entries);
}

const std::vector<TopKEntry>& TopKCache::get(std::int64_t sample_id, int candidate_index) const {
    const auto it = entries_.find({sample_id, candidate_index});
    if (it == entries_.end()) {
        throw LookupError("top-k cache: no entry for sample " + std::to_string(sample_id) +
                          " candidate " + std::to_string(candidate_index));
    }
    return it->second;
}

bool TopKCache::has(std::int64_t sample_id, int candidate_index) const {
    return entries_.count({sample_id, candidate_index}) > 0;
}

TopKCache TopKCache::truncated(std::size_t k) const {
    TopKCache out;
    for (const auto& [key, entries] : entries_) {
        auto copy = entries;
        if (copy.size() > k) copy.resize(k);
        out.entries_[key] = std::move(copy);
    }
    return out;
}

void TopKCache::merge(const TopKCache& other) {
    for (const auto& [key, entries] : other.entries_) entries_[key] = entries;
}

void TopKCache::save(const std::string& path, std::size_t k,
                     const std::string& scorer_name) const {
    json header{{"format", "ckt.topk.v1"}, {"k", k}, {"scorer", scorer_name}};
    std::vector<json> records;
    records.reserve(entries_.size());
    for (const auto& [key, entries] : entries_) {
        std::vector<int> ids;
        std::vector<double> sims;
        for (const auto& e : entries) {
            ids.push_back(e.fact_id);
            sims.push_back(e.similarity);
        }
        records.push_back(json{{"sample_id", key.first},
                               {"candidate", key.second},
                               {"fact_ids", ids},
                               {"similarities", sims}});
    }
    write_jsonl(path, header, records);
}

TopKCache TopKCache::load(const std::string& path) {
    const JsonlFile file = read_jsonl(path, "ckt.topk.v1");
    TopKCache cache;
    std::size_t line_no = 1;
    for (const auto& rec : file.records) {
        ++line_no;
        try {
            const auto ids = rec.at("fact_ids").get<std::vector<int>>();
            const auto sims = rec.at("similarities").get<std::vector<double>>();
            if (ids.size() != sims.size()) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": fact_ids/similarities length mismatch");
            }
            std::vector<TopKEntry> entries(ids.size());
            for (std::size_t i = 0; i < ids.size(); ++i) entries[i] = {ids[i], sims[i]};
            cache.put(rec.at("sample_id").get<std::int64_t>(), rec.at("candidate").get<int>(),
                      std::move(entries));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cache;
}

TopKCache build_top_k_cache(const std::vector<Sample>& samples, const KnowledgeBase& kb,
                            std::size_t k, const FactScorer& scorer, std::size_t threads) {
    std::vector<std::vector<TopKResult>> results(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t i, std::size_t) {
        results[i] = search_sample(samples[i].regions, samples[i].expression, kb, k, scorer);
    });
    TopKCache cache;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (const auto& r : results[i]) {
            cache.put(samples[i].sample_id, r.candidate_index, r.entries);
        }
    }
    return cache;
}

void SimTrainConfig::validate() const {
    if (steps == 0) throw ConfigError("sim train: steps must be positive");
    if (batch_size == 0) throw ConfigError("sim train: batch_size must be positive");
    if (learning_rate <= 0.0) throw ConfigError("sim train: learning_rate must be positive");
    if (replace_prob < 0.0 || replace_prob > 1.0) {
        throw ConfigError("sim train: replace_prob must be in [0,1]");
    }
    model.encoder.validate();
}

SimTrainResult train_similarity_extractor(const std::vector<Sample>& train,
                                          const KnowledgeBase& kb,
                                          const SimTrainConfig& config) {
    if (train.empty()) throw ValidationError("sim train: empty dataset");
    if (kb.fact_count() == 0) throw ValidationError("sim train: empty knowledge base");
    config.validate();

    Rng root(config.seed);
    BimodalModel model = BimodalModel::init(config.model, root.substream("init"));
    std::vector<Tensor> params;
    for (auto& [name, t] : model.named_parameters("")) params.push_back(t);
    AdamW optimizer(params, AdamWConfig{config.learning_rate, 0.9, 0.999, 1e-8,
                                        config.weight_decay});

    Rng order_rng = root.substream("order");
    Rng replace_rng = root.substream("replace");
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    order_rng.shuffle(order);
    std::size_t cursor = 0;

    SimTrainResult result{std::move(model), {}};
    result.loss_curve.reserve(config.steps);
    const auto& fact_pool = kb.fact_ids();

    for (std::size_t step = 0; step < config.steps; ++step) {
        optimizer.zero_grad();
        double batch_loss = 0.0;
        for (std::size_t bi = 0; bi < config.batch_size; ++bi) {
            if (cursor == order.size()) {
                order_rng.shuffle(order);
                cursor = 0;
            }
            const Sample& sample = train[order[cursor++]];
            const bool replace = replace_rng.bernoulli(config.replace_prob);
            double target = 1.0;
            const Fact* fact = &kb.fact_by_id(sample.gt_fact_id);
            if (replace) {
                const std::size_t pick = static_cast<std::size_t>(replace_rng.uniform_int(
                    0, static_cast<std::int64_t>(fact_pool.size()) - 1));
                fact = &kb.fact_by_id(fact_pool[pick]);
                target = 0.0;
            }
            const Tensor e =
                result.model.cross_modality_feature(sample.regions, sample.expression);
            const Tensor f = result.model.cross_modality_feature(sample.regions, fact->tokens);
            const Tensor diff = add_scalar(cosine_similarity(e, f), -target);
            const Tensor loss =
                scale(mul(diff, diff), 1.0 / static_cast<double>(config.batch_size));
            loss.backward();
            batch_loss += loss.item();
        }
        optimizer.step();
        result.loss_curve.push_back(batch_loss);
    }
    return result;
}

}  // namespace ckt
