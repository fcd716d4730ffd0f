#include "ckt/embedding.hpp"

#include <cmath>

#include "ckt/errors.hpp"
#include "ckt/ops.hpp"
#include "ckt/rng.hpp"

namespace ckt {

namespace {
// Initialization scale for all learned tables and maps (scaled-normal init).
constexpr double kInitStddev = 0.02;
}  // namespace

std::array<double, 7> geometry_vector(const Box& box) {
    const double coords[4] = {box.x1, box.y1, box.x2, box.y2};
    for (double c : coords) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw ValidationError("geometry_vector: coordinate " + std::to_string(c) +
                                  " outside [0,1]");
        }
    }
    if (box.x1 > box.x2 || box.y1 > box.y2) {
        throw ValidationError("geometry_vector: inverted box");
    }
    const double w = box.x2 - box.x1;
    const double h = box.y2 - box.y1;
    return {box.x1, box.y1, box.x2, box.y2, w, h, w * h};
}

RegionCandidate::RegionCandidate(std::vector<double> feature, Box b, int category)
    : visual_feature(std::move(feature)), box(b), geometry(geometry_vector(b)),
      category_id(category) {}

void EncoderConfig::validate() const {
    if (n_layers < 1) throw ConfigError("encoder config: n_layers must be >= 1");
    if (n_heads == 0 || hidden_dim % n_heads != 0) {
        throw ConfigError("encoder config: hidden_dim " + std::to_string(hidden_dim) +
                          " not divisible by n_heads " + std::to_string(n_heads));
    }
    if (ffn_dim == 0) throw ConfigError("encoder config: ffn_dim must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw ConfigError("encoder config: dropout_rate must be in [0,1)");
    }
}

EncoderConfig paper_scale_encoder_config() {
    return EncoderConfig{12, 768, 12, 4 * 768, 0.0};
}

EmbeddingParams EmbeddingParams::init(const ModelConfig& config, Rng rng) {
    const std::size_t d = config.encoder.hidden_dim;
    if (config.vocab_size == 0) throw ConfigError("embedding init: vocab_size is zero");
    if (config.visual_dim == 0) throw ConfigError("embedding init: visual_dim is zero");
    EmbeddingParams p;
    // Each parameter draws from its own named substream, so the values do
    // not depend on initialization order.
    auto draw = [&](const char* name, std::vector<std::size_t> shape) {
        Rng sub = rng.substream(name);
        return Tensor::randn_param(std::move(shape), sub, kInitStddev);
    };
    p.token_table = draw("token_table", {config.vocab_size, d});
    p.position_table = draw("position_table", {config.max_text_len, d});
    p.cls = draw("cls", {d});
    p.visual_w = draw("visual_w", {config.visual_dim, d});
    p.visual_b = Tensor::param({d}, std::vector<double>(d, 0.0));
    p.geometry_w = draw("geometry_w", {7, d});
    p.geometry_b = Tensor::param({d}, std::vector<double>(d, 0.0));
    p.modality_image = draw("modality_image", {d});
    p.modality_text = draw("modality_text", {d});
    p.image_ln_gain = Tensor::param({d}, std::vector<double>(d, 1.0));
    p.image_ln_bias = Tensor::param({d}, std::vector<double>(d, 0.0));
    p.text_ln_gain = Tensor::param({d}, std::vector<double>(d, 1.0));
    p.text_ln_bias = Tensor::param({d}, std::vector<double>(d, 0.0));
    return p;
}

std::vector<std::pair<std::string, Tensor>> EmbeddingParams::named_parameters(
    const std::string& prefix) const {
    return {
        {prefix + "token_table", token_table},
        {prefix + "position_table", position_table},
        {prefix + "cls", cls},
        {prefix + "visual_w", visual_w},
        {prefix + "visual_b", visual_b},
        {prefix + "geometry_w", geometry_w},
        {prefix + "geometry_b", geometry_b},
        {prefix + "modality_image", modality_image},
        {prefix + "modality_text", modality_text},
        {prefix + "image_ln_gain", image_ln_gain},
        {prefix + "image_ln_bias", image_ln_bias},
        {prefix + "text_ln_gain", text_ln_gain},
        {prefix + "text_ln_bias", text_ln_bias},
    };
}

Tensor image_embedding(const std::vector<RegionCandidate>& regions,
                       const EmbeddingParams& params) {
    if (regions.empty()) throw DimensionError("image_embedding: no regions");
    const std::size_t n = regions.size();
    const std::size_t d_v = params.visual_w.dim(0);
    std::vector<double> feats;
    feats.reserve(n * d_v);
    std::vector<double> geoms;
    geoms.reserve(n * 7);
    for (const auto& r : regions) {
        if (r.visual_feature.size() != d_v) {
            throw DimensionError("image_embedding: visual feature of length " +
                                 std::to_string(r.visual_feature.size()) + ", expected " +
                                 std::to_string(d_v));
        }
        feats.insert(feats.end(), r.visual_feature.begin(), r.visual_feature.end());
        geoms.insert(geoms.end(), r.geometry.begin(), r.geometry.end());
    }
    const Tensor v({n, d_v}, std::move(feats));
    const Tensor g({n, 7}, std::move(geoms));
    Tensor proj = add(add_rowvec(matmul(v, params.visual_w), params.visual_b),
                      add_rowvec(matmul(g, params.geometry_w), params.geometry_b));
    proj = add_rowvec(proj, params.modality_image);
    return layer_norm(proj, params.image_ln_gain, params.image_ln_bias);
}

Tensor text_embedding(const TextSequence& text, const EmbeddingParams& params) {
    if (text.token_ids.empty()) throw ValidationError("text_embedding: empty sequence");
    const std::size_t u = text.token_ids.size();
    if (u > params.position_table.dim(0)) {
        throw ValidationError("text_embedding: sequence of " + std::to_string(u) +
                              " tokens exceeds the position table");
    }
    Tensor tok = embedding_lookup(params.token_table, text.token_ids);
    Tensor pos = slice_rows(params.position_table, 0, u);
    Tensor x = add_rowvec(add(tok, pos), params.modality_text);
    return layer_norm(x, params.text_ln_gain, params.text_ln_bias);
}

InputEmbedding input_embedding(const std::vector<RegionCandidate>& regions,
                               const TextSequence& text, const EmbeddingParams& params) {
    const std::size_t d = params.cls.dim(0);
    Tensor image = image_embedding(regions, params);
    Tensor txt = text_embedding(text, params);
    const Tensor parts[] = {reshape(params.cls, {1, d}), image, txt};
    InputEmbedding out;
    out.rows = concat_rows(parts);
    out.n_regions = regions.size();
    out.n_tokens = text.token_ids.size();
    return out;
}

}  // namespace ckt
