#pragma once

#include <span>
#include <vector>

#include "ckt/tensor.hpp"

namespace ckt {

class Rng;

// Documented numeric constants of the artifact.
inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kCosineEps = 1e-12;
// gelu tanh approximation: 0.5*x*(1 + tanh(c0*(x + c1*x^3)))
inline constexpr double kGeluC0 = 0.7978845608028654;  // sqrt(2/pi)
inline constexpr double kGeluC1 = 0.044715;

// Elementwise / broadcast arithmetic.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double constant);
/// [n,d] + [d], the bias/broadcast pattern.
Tensor add_rowvec(const Tensor& a, const Tensor& v);

// Matrix products ([m,k] x [k,n] -> [m,n]).
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T without materializing the transpose ([m,k] x [n,k] -> [m,n]).
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Numerically stable softmax along `axis` (negative counts from the back).
Tensor softmax(const Tensor& x, int axis = -1);

/// Standardize over the last axis, then apply gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

Tensor gelu(const Tensor& x);

/// Inverted dropout; rate 0 is the identity (and records no node).
Tensor dropout(const Tensor& x, double rate, Rng& rng);

/// -log(softmax(scores)[target]) for a rank-1 score vector.
Tensor cross_entropy(const Tensor& scores, std::size_t target);

/// a.b / (max(|a|,eps) * max(|b|,eps)); zero vectors score ~0 by the eps guard.
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = kCosineEps);

// Reductions.
Tensor sum(const Tensor& x);
Tensor mean_rows(const Tensor& x);

// Shape plumbing.
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor row(const Tensor& x, std::size_t i);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
std::vector<Tensor> split_cols(const Tensor& x, std::size_t parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor stack_scalars(std::span<const Tensor> scalars);

/// Gather rows of `table` ([V,d]) by id; backward scatter-adds.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

}  // namespace ckt
