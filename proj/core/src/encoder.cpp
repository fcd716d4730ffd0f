#include "ckt/encoder.hpp"

#include <cmath>

#include "ckt/errors.hpp"
#include "ckt/ops.hpp"
#include "ckt/rng.hpp"

namespace ckt {

namespace {
constexpr double kInitStddev = 0.02;
constexpr double kMaskBias = -1e30;
}  // namespace

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng rng) {
    const std::size_t d = config.hidden_dim;
    const std::size_t f = config.ffn_dim;
    EncoderParams p;
    p.layers.resize(config.n_layers);
    for (std::size_t li = 0; li < config.n_layers; ++li) {
        Rng layer_rng = rng.substream("layer").substream(li);
        auto draw = [&](const char* name, std::vector<std::size_t> shape) {
            Rng sub = layer_rng.substream(name);
            return Tensor::randn_param(std::move(shape), sub, kInitStddev);
        };
        auto zeros = [&](std::size_t len) {
            return Tensor::param({len}, std::vector<double>(len, 0.0));
        };
        auto ones = [&](std::size_t len) {
            return Tensor::param({len}, std::vector<double>(len, 1.0));
        };
        EncoderLayerParams& l = p.layers[li];
        l.ln1_gain = ones(d);
        l.ln1_bias = zeros(d);
        l.wq = draw("wq", {d, d});
        l.bq = zeros(d);
        l.wk = draw("wk", {d, d});
        l.bk = zeros(d);
        l.wv = draw("wv", {d, d});
        l.bv = zeros(d);
        l.wo = draw("wo", {d, d});
        l.bo = zeros(d);
        l.ln2_gain = ones(d);
        l.ln2_bias = zeros(d);
        l.ff1_w = draw("ff1_w", {d, f});
        l.ff1_b = zeros(f);
        l.ff2_w = draw("ff2_w", {f, d});
        l.ff2_b = zeros(d);
    }
    return p;
}

std::vector<std::pair<std::string, Tensor>> EncoderParams::named_parameters(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const std::string lp = prefix + "layer" + std::to_string(li) + ".";
        const EncoderLayerParams& l = layers[li];
        out.insert(out.end(), {
            {lp + "ln1_gain", l.ln1_gain}, {lp + "ln1_bias", l.ln1_bias},
            {lp + "wq", l.wq}, {lp + "bq", l.bq},
            {lp + "wk", l.wk}, {lp + "bk", l.bk},
            {lp + "wv", l.wv}, {lp + "bv", l.bv},
            {lp + "wo", l.wo}, {lp + "bo", l.bo},
            {lp + "ln2_gain", l.ln2_gain}, {lp + "ln2_bias", l.ln2_bias},
            {lp + "ff1_w", l.ff1_w}, {lp + "ff1_b", l.ff1_b},
            {lp + "ff2_w", l.ff2_w}, {lp + "ff2_b", l.ff2_b},
        });
    }
    return out;
}

Tensor multi_head_self_attention(const Tensor& x, const EncoderLayerParams& layer,
                                 std::size_t n_heads, std::optional<std::size_t> valid_rows) {
    const std::size_t rows = x.dim(0);
    const std::size_t d = x.dim(1);
    if (layer.wq.dim(0) != d) {
        throw DimensionError("attention: input width " + std::to_string(d) +
                             " does not match parameters of width " +
                             std::to_string(layer.wq.dim(0)));
    }
    if (n_heads == 0 || d % n_heads != 0) {
        throw DimensionError("attention: width " + std::to_string(d) +
                             " not divisible by " + std::to_string(n_heads) + " heads");
    }
    const std::size_t head_dim = d / n_heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Tensor q = add_rowvec(matmul(x, layer.wq), layer.bq);
    Tensor k = add_rowvec(matmul(x, layer.wk), layer.bk);
    Tensor v = add_rowvec(matmul(x, layer.wv), layer.bv);
    const auto qs = split_cols(q, n_heads);
    const auto ks = split_cols(k, n_heads);
    const auto vs = split_cols(v, n_heads);

    Tensor mask_bias;
    if (valid_rows && *valid_rows < rows) {
        std::vector<double> bias(rows * rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = *valid_rows; j < rows; ++j) bias[i * rows + j] = kMaskBias;
        mask_bias = Tensor({rows, rows}, std::move(bias));
    }

    std::vector<Tensor> contexts;
    contexts.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h) {
        Tensor scores = scale(matmul_nt(qs[h], ks[h]), inv_sqrt);
        if (mask_bias.defined()) scores = add(scores, mask_bias);
        contexts.push_back(matmul(softmax(scores, -1), vs[h]));
    }
    return add_rowvec(matmul(concat_cols(contexts), layer.wo), layer.bo);
}

EncoderOutput encode(const InputEmbedding& emb, const EncoderConfig& config,
                     const EncoderParams& params, Rng* dropout_rng,
                     std::optional<std::size_t> valid_rows) {
    if (!emb.rows.defined() || emb.rows.rank() != 2) {
        throw DimensionError("encode: malformed input embedding");
    }
    if (emb.rows.dim(0) < emb.row_count()) {
        throw DimensionError("encode: row count below 1 + regions + tokens");
    }
    if (config.dropout_rate > 0.0 && dropout_rng == nullptr) {
        throw ConfigError("encode: dropout enabled but no rng supplied");
    }
    Tensor x = emb.rows;
    for (const auto& layer : params.layers) {
        if (layer.wq.dim(0) != x.dim(1)) {
            throw DimensionError("encode: parameter width " + std::to_string(layer.wq.dim(0)) +
                                 " does not match input width " + std::to_string(x.dim(1)));
        }
        Tensor attn = multi_head_self_attention(layer_norm(x, layer.ln1_gain, layer.ln1_bias),
                                                layer, config.n_heads, valid_rows);
        if (config.dropout_rate > 0.0) attn = dropout(attn, config.dropout_rate, *dropout_rng);
        x = add(x, attn);
        Tensor ff_in = layer_norm(x, layer.ln2_gain, layer.ln2_bias);
        Tensor ff = add_rowvec(
            matmul(gelu(add_rowvec(matmul(ff_in, layer.ff1_w), layer.ff1_b)), layer.ff2_w),
            layer.ff2_b);
        if (config.dropout_rate > 0.0) ff = dropout(ff, config.dropout_rate, *dropout_rng);
        x = add(x, ff);
    }
    EncoderOutput out;
    out.cross_modality = row(x, 0);
    out.visual_outputs = slice_rows(x, 1, 1 + emb.n_regions);
    out.text_outputs = slice_rows(x, 1 + emb.n_regions, emb.row_count());
    return out;
}

BimodalModel BimodalModel::init(const ModelConfig& config, Rng rng) {
    if (config.encoder.n_heads == 0 || config.encoder.hidden_dim % config.encoder.n_heads != 0) {
        throw ConfigError("bimodal model: hidden_dim not divisible by n_heads");
    }
    BimodalModel m;
    m.config = config;
    m.embedding = EmbeddingParams::init(config, rng.substream("embedding"));
    m.encoder = EncoderParams::init(config.encoder, rng.substream("encoder"));
    return m;
}

std::vector<std::pair<std::string, Tensor>> BimodalModel::named_parameters(
    const std::string& prefix) const {
    auto out = embedding.named_parameters(prefix + "embedding.");
    auto enc = encoder.named_parameters(prefix + "encoder.");
    out.insert(out.end(), enc.begin(), enc.end());
    return out;
}

EncoderOutput BimodalModel::encode_pair(const std::vector<RegionCandidate>& regions,
                                        const TextSequence& text, Rng* dropout_rng) const {
    return encode(input_embedding(regions, text, embedding), config.encoder, encoder,
                  dropout_rng);
}

Tensor BimodalModel::expression_aware_features(const std::vector<RegionCandidate>& regions,
                                               const TextSequence& expression) const {
    return encode_pair(regions, expression).visual_outputs;
}

Tensor BimodalModel::fact_aware_features(const std::vector<RegionCandidate>& regions,
                                         const TextSequence& fact) const {
    return encode_pair(regions, fact).visual_outputs;
}

Tensor BimodalModel::cross_modality_feature(const std::vector<RegionCandidate>& regions,
                                            const TextSequence& text) const {
    return encode_pair(regions, text).cross_modality;
}

}  // namespace ckt
