#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckt/embedding.hpp"
#include "ckt/tensor.hpp"

namespace ckt {

class Rng;

/// One pre-norm transformer layer: self-attention then feed-forward, each
/// wrapped in residual connections.
struct EncoderLayerParams {
    Tensor ln1_gain, ln1_bias;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln2_gain, ln2_bias;
    Tensor ff1_w, ff1_b;  // [d, ffn]
    Tensor ff2_w, ff2_b;  // [ffn, d]
};

struct EncoderParams {
    std::vector<EncoderLayerParams> layers;

    static EncoderParams init(const EncoderConfig& config, Rng rng);
    std::vector<std::pair<std::string, Tensor>> named_parameters(const std::string& prefix) const;
};

/// Encoder outputs split back into the input segments. visual row i stays
/// aligned with candidate i of the input region list.
struct EncoderOutput {
    Tensor cross_modality;  // [d]
    Tensor visual_outputs;  // [n, d]
    Tensor text_outputs;    // [u, d]
};

/// Multi-head self-attention over all rows of x. When valid_rows is set,
/// rows at index >= valid_rows are padding: no row attends to them, so they
/// cannot influence the outputs of valid rows.
Tensor multi_head_self_attention(const Tensor& x, const EncoderLayerParams& layer,
                                 std::size_t n_heads,
                                 std::optional<std::size_t> valid_rows = std::nullopt);

/// Run the transformer stack over an InputEmbedding and split the result.
/// An empty layer stack is the identity. Dropout draws from rng when the
/// config rate is nonzero; pass nullptr at rate 0.
EncoderOutput encode(const InputEmbedding& emb, const EncoderConfig& config,
                     const EncoderParams& params, Rng* dropout_rng = nullptr,
                     std::optional<std::size_t> valid_rows = std::nullopt);

/// Embedding plus encoder: the bi-modal backbone. The similarity extractor
/// is exactly this model; CK-T wraps one alongside a fusion classifier.
struct BimodalModel {
    ModelConfig config;
    EmbeddingParams embedding;
    EncoderParams encoder;

    static BimodalModel init(const ModelConfig& config, Rng rng);
    std::vector<std::pair<std::string, Tensor>> named_parameters(const std::string& prefix) const;

    EncoderOutput encode_pair(const std::vector<RegionCandidate>& regions,
                              const TextSequence& text, Rng* dropout_rng = nullptr) const;

    /// f_i^e for all candidates: visual outputs with the expression as text.
    Tensor expression_aware_features(const std::vector<RegionCandidate>& regions,
                                     const TextSequence& expression) const;
    /// f_i^f for all candidates: visual outputs with a fact as text.
    Tensor fact_aware_features(const std::vector<RegionCandidate>& regions,
                               const TextSequence& fact) const;
    /// Whole-input summary at the leading classification position.
    Tensor cross_modality_feature(const std::vector<RegionCandidate>& regions,
                                  const TextSequence& text) const;
};

}  // namespace ckt
