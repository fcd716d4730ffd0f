#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ckt/tensor.hpp"
#include "ckt/vocab.hpp"

namespace ckt {

class Rng;

/// Normalized box, all coordinates in [0,1] with x1<=x2, y1<=y2.
struct Box {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

/// [x1, y1, x2, y2, w, h, w*h]; validates the box.
std::array<double, 7> geometry_vector(const Box& box);

/// One image region competing to be the referred target.
struct RegionCandidate {
    std::vector<double> visual_feature;
    Box box;
    std::array<double, 7> geometry{};  // derived from box at construction
    int category_id = -1;

    RegionCandidate() = default;
    RegionCandidate(std::vector<double> feature, Box b, int category);
};

struct EncoderConfig {
    std::size_t n_layers = 2;
    std::size_t hidden_dim = 64;
    std::size_t n_heads = 4;
    std::size_t ffn_dim = 256;
    double dropout_rate = 0.0;

    /// Training-facing invariants (n_layers >= 1, hidden divisible by heads).
    void validate() const;
};

/// Paper-scale preset; expressible but far too slow for CPU training.
EncoderConfig paper_scale_encoder_config();

struct ModelConfig {
    EncoderConfig encoder;
    std::size_t vocab_size = 0;
    std::size_t visual_dim = 32;
    std::size_t max_text_len = kMaxTextTokens;
};

/// Learned tables for the joint input embedding: token/position tables for
/// text, linear maps for visual features and box geometry, the two modality
/// vectors, the leading classification row, and the two layer norms.
struct EmbeddingParams {
    Tensor token_table;    // [V, d]
    Tensor position_table; // [max_text_len, d]
    Tensor cls;            // [d]
    Tensor visual_w;       // [d_v, d]
    Tensor visual_b;       // [d]
    Tensor geometry_w;     // [7, d]
    Tensor geometry_b;     // [d]
    Tensor modality_image; // [d]
    Tensor modality_text;  // [d]
    Tensor image_ln_gain, image_ln_bias;  // [d]
    Tensor text_ln_gain, text_ln_bias;    // [d]

    static EmbeddingParams init(const ModelConfig& config, Rng rng);
    std::vector<std::pair<std::string, Tensor>> named_parameters(const std::string& prefix) const;
};

/// Rows [cls ; image rows ; text rows] with the segment boundaries kept.
struct InputEmbedding {
    Tensor rows;  // [(1 + n_regions + n_tokens), d]
    std::size_t n_regions = 0;
    std::size_t n_tokens = 0;

    std::size_t row_count() const { return 1 + n_regions + n_tokens; }
};

/// LN(fc(V) + fc(G) + M_I), one row per region, no position term.
Tensor image_embedding(const std::vector<RegionCandidate>& regions,
                       const EmbeddingParams& params);

/// LN(T + P + M_T) with learned absolute positions.
Tensor text_embedding(const TextSequence& text, const EmbeddingParams& params);

InputEmbedding input_embedding(const std::vector<RegionCandidate>& regions,
                               const TextSequence& text, const EmbeddingParams& params);

}  // namespace ckt
