#include "ckt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ckt/errors.hpp"
#include "ckt/rng.hpp"

namespace ckt {

namespace {

using detail::TensorNode;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
    }
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                             shape_to_string(t.shape()));
    }
}

// C[m,n] += A[m,k] * B[k,n]
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C[k,n] += A[m,k]^T * B[m,n]
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void scatter_grad(TensorNode& parent, const std::vector<double>& contribution) {
    accumulate_grad(parent, contribution);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    return make_op_result(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        accumulate_grad(*self.parents[0], self.grad);
        accumulate_grad(*self.parents[1], self.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.size());
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    return make_op_result(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        accumulate_grad(*self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            std::vector<double> neg(self.grad.size());
            for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -self.grad[i];
            scatter_grad(*self.parents[1], neg);
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return make_op_result(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        const auto& av = self.parents[0]->values;
        const auto& bv = self.parents[1]->values;
        if (self.parents[0]->requires_grad) {
            std::vector<double> ga(self.grad.size());
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = self.grad[i] * bv[i];
            scatter_grad(*self.parents[0], ga);
        }
        if (self.parents[1]->requires_grad) {
            std::vector<double> gb(self.grad.size());
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] = self.grad[i] * av[i];
            scatter_grad(*self.parents[1], gb);
        }
    });
}

Tensor scale(const Tensor& a, double factor) {
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
    return make_op_result(a.shape(), std::move(out), {a}, [factor](TensorNode& self) {
        std::vector<double> g(self.grad.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * factor;
        scatter_grad(*self.parents[0], g);
    });
}

Tensor add_scalar(const Tensor& a, double constant) {
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + constant;
    return make_op_result(a.shape(), std::move(out), {a}, [](TensorNode& self) {
        accumulate_grad(*self.parents[0], self.grad);
    });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
    require_rank2(a, "add_rowvec");
    if (v.rank() != 1 || v.dim(0) != a.dim(1)) {
        throw DimensionError("add_rowvec: " + shape_to_string(a.shape()) + " + " +
                             shape_to_string(v.shape()));
    }
    const std::size_t n = a.dim(0), d = a.dim(1);
    std::vector<double> out(a.size());
    const auto av = a.values();
    const auto vv = v.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = av[i * d + j] + vv[j];
    return make_op_result(a.shape(), std::move(out), {a, v}, [n, d](TensorNode& self) {
        accumulate_grad(*self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            std::vector<double> gv(d, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) gv[j] += self.grad[i * d + j];
            scatter_grad(*self.parents[1], gv);
        }
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: inner dimensions disagree: " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(m * n, 0.0);
    gemm_acc(a.values().data(), b.values().data(), out.data(), m, k, n);
    return make_op_result({m, n}, std::move(out), {a, b}, [m, k, n](TensorNode& self) {
        const double* g = self.grad.data();
        TensorNode& pa = *self.parents[0];
        TensorNode& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();  // dA += dC * B^T
            gemm_nt_acc(g, pb.values.data(), pa.grad.data(), m, n, k);
        }
        if (pb.requires_grad) {
            pb.ensure_grad();  // dB += A^T * dC
            gemm_tn_acc(pa.values.data(), g, pb.grad.data(), m, k, n);
        }
    });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul_nt");
    require_rank2(b, "matmul_nt");
    if (a.dim(1) != b.dim(1)) {
        throw DimensionError("matmul_nt: inner dimensions disagree: " +
                             shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    std::vector<double> out(m * n, 0.0);
    gemm_nt_acc(a.values().data(), b.values().data(), out.data(), m, k, n);
    return make_op_result({m, n}, std::move(out), {a, b}, [m, k, n](TensorNode& self) {
        const double* g = self.grad.data();
        TensorNode& pa = *self.parents[0];
        TensorNode& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();  // dA += dC * B
            gemm_acc(g, pb.values.data(), pa.grad.data(), m, n, k);
        }
        if (pb.requires_grad) {
            pb.ensure_grad();  // dB += dC^T * A
            gemm_tn_acc(g, pa.values.data(), pb.grad.data(), m, n, k);
        }
    });
}

Tensor softmax(const Tensor& x, int axis) {
    const std::size_t r = x.rank();
    if (r == 0) throw DimensionError("softmax: rank-0 tensor has no axis");
    const int ax_signed = axis < 0 ? axis + static_cast<int>(r) : axis;
    if (ax_signed < 0 || ax_signed >= static_cast<int>(r)) {
        throw DimensionError("softmax: axis out of range for " + shape_to_string(x.shape()));
    }
    const std::size_t ax = static_cast<std::size_t>(ax_signed);
    const std::size_t n = x.shape()[ax];
    if (n == 0) throw DimensionError("softmax: empty axis");
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= x.shape()[i];
    for (std::size_t i = ax + 1; i < r; ++i) inner *= x.shape()[i];

    std::vector<double> out(x.size());
    const auto xv = x.values();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double mx = xv[base];
            for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, xv[base + i * inner]);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = std::exp(xv[base + i * inner] - mx);
                out[base + i * inner] = e;
                total += e;
            }
            const double inv = 1.0 / total;
            for (std::size_t i = 0; i < n; ++i) out[base + i * inner] *= inv;
        }
    }
    return make_op_result(x.shape(), std::move(out), {x},
                          [outer, n, inner](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        std::vector<double> gx(self.values.size());
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = o * n * inner + in;
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t idx = base + i * inner;
                    dot += self.grad[idx] * self.values[idx];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t idx = base + i * inner;
                    gx[idx] = self.values[idx] * (self.grad[idx] - dot);
                }
            }
        }
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    if (x.rank() == 0) throw DimensionError("layer_norm: rank-0 input");
    const std::size_t d = x.shape().back();
    if (gain.rank() != 1 || gain.dim(0) != d || bias.rank() != 1 || bias.dim(0) != d) {
        throw DimensionError("layer_norm: gain/bias must be [" + std::to_string(d) + "], got " +
                             shape_to_string(gain.shape()) + " and " +
                             shape_to_string(bias.shape()));
    }
    const std::size_t rows = x.size() / d;
    std::vector<double> out(x.size());
    const auto xv = x.values();
    const auto gv = gain.values();
    const auto bv = bias.values();
    for (std::size_t rix = 0; rix < rows; ++rix) {
        const double* xr = xv.data() + rix * d;
        double* yr = out.data() + rix * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += xr[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = xr[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            yr[j] = (xr[j] - mean) * inv_std * gv[j] + bv[j];
        }
    }
    return make_op_result(x.shape(), std::move(out), {x, gain, bias},
                          [rows, d, eps](TensorNode& self) {
        const auto& xv = self.parents[0]->values;
        const auto& gv = self.parents[1]->values;
        const bool need_x = self.parents[0]->requires_grad;
        const bool need_g = self.parents[1]->requires_grad;
        const bool need_b = self.parents[2]->requires_grad;
        std::vector<double> gx(need_x ? xv.size() : 0);
        std::vector<double> gg(need_g ? d : 0, 0.0);
        std::vector<double> gb(need_b ? d : 0, 0.0);
        std::vector<double> xhat(d);
        for (std::size_t rix = 0; rix < rows; ++rix) {
            const double* xr = xv.data() + rix * d;
            const double* dy = self.grad.data() + rix * d;
            double mean = 0.0;
            for (std::size_t j = 0; j < d; ++j) mean += xr[j];
            mean /= static_cast<double>(d);
            double var = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double c = xr[j] - mean;
                var += c * c;
            }
            var /= static_cast<double>(d);
            const double inv_std = 1.0 / std::sqrt(var + eps);
            for (std::size_t j = 0; j < d; ++j) xhat[j] = (xr[j] - mean) * inv_std;
            if (need_g)
                for (std::size_t j = 0; j < d; ++j) gg[j] += dy[j] * xhat[j];
            if (need_b)
                for (std::size_t j = 0; j < d; ++j) gb[j] += dy[j];
            if (need_x) {
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dxhat = dy[j] * gv[j];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * xhat[j];
                }
                mean_dxhat /= static_cast<double>(d);
                mean_dxhat_xhat /= static_cast<double>(d);
                double* gxr = gx.data() + rix * d;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dxhat = dy[j] * gv[j];
                    gxr[j] = (dxhat - mean_dxhat - xhat[j] * mean_dxhat_xhat) * inv_std;
                }
            }
        }
        if (need_x) scatter_grad(*self.parents[0], gx);
        if (need_g) scatter_grad(*self.parents[1], gg);
        if (need_b) scatter_grad(*self.parents[2], gb);
    });
}

Tensor gelu(const Tensor& x) {
    std::vector<double> out(x.size());
    const auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = xv[i];
        const double u = kGeluC0 * (v + kGeluC1 * v * v * v);
        out[i] = 0.5 * v * (1.0 + std::tanh(u));
    }
    return make_op_result(x.shape(), std::move(out), {x}, [](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        const auto& xv = self.parents[0]->values;
        std::vector<double> gx(xv.size());
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double v = xv[i];
            const double u = kGeluC0 * (v + kGeluC1 * v * v * v);
            const double t = std::tanh(u);
            const double du = kGeluC0 * (1.0 + 3.0 * kGeluC1 * v * v);
            gx[i] = self.grad[i] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du);
        }
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    }
    if (rate == 0.0) return x;
    const double keep = 1.0 - rate;
    const double inv_keep = 1.0 / keep;
    std::vector<double> mask(x.size());
    for (auto& m : mask) m = rng.bernoulli(keep) ? inv_keep : 0.0;
    std::vector<double> out(x.size());
    const auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
    return make_op_result(x.shape(), std::move(out), {x},
                          [mask = std::move(mask)](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        std::vector<double> gx(mask.size());
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = self.grad[i] * mask[i];
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor cross_entropy(const Tensor& scores, std::size_t target) {
    if (scores.rank() != 1) {
        throw DimensionError("cross_entropy: expected rank-1 scores, got " +
                             shape_to_string(scores.shape()));
    }
    const std::size_t n = scores.dim(0);
    if (target >= n) {
        throw IndexError("cross_entropy: target " + std::to_string(target) +
                         " out of range for " + std::to_string(n) + " scores");
    }
    const auto sv = scores.values();
    double mx = sv[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, sv[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::exp(sv[i] - mx);
    const double lse = mx + std::log(total);
    const double loss = lse - sv[target];
    return make_op_result({}, {loss}, {scores}, [n, target, mx, total](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        const double g = self.grad[0];
        const auto& sv = self.parents[0]->values;
        std::vector<double> gx(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = std::exp(sv[i] - mx) / total;
            gx[i] = g * (p - (i == target ? 1.0 : 0.0));
        }
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
    if (a.rank() != 1 || b.rank() != 1 || a.dim(0) != b.dim(0)) {
        throw DimensionError("cosine_similarity: expected matching vectors, got " +
                             shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
    }
    const std::size_t d = a.dim(0);
    const auto av = a.values();
    const auto bv = b.values();
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        dot += av[i] * bv[i];
        na2 += av[i] * av[i];
        nb2 += bv[i] * bv[i];
    }
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    const double na_c = std::max(na, eps), nb_c = std::max(nb, eps);
    const double inv = 1.0 / (na_c * nb_c);
    const double c = dot * inv;
    return make_op_result({}, {c}, {a, b}, [d, eps](TensorNode& self) {
        const auto& av = self.parents[0]->values;
        const auto& bv = self.parents[1]->values;
        double dot = 0.0, na2 = 0.0, nb2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            dot += av[i] * bv[i];
            na2 += av[i] * av[i];
            nb2 += bv[i] * bv[i];
        }
        const double na = std::sqrt(na2), nb = std::sqrt(nb2);
        const double na_c = std::max(na, eps), nb_c = std::max(nb, eps);
        const double inv = 1.0 / (na_c * nb_c);
        const double c = dot * inv;
        const double g = self.grad[0];
        if (self.parents[0]->requires_grad) {
            std::vector<double> ga(d);
            // norm term vanishes inside the eps guard (clamped norm is constant)
            const double norm_coef = na > eps ? c / (na_c * na) : 0.0;
            for (std::size_t i = 0; i < d; ++i) ga[i] = g * (bv[i] * inv - norm_coef * av[i]);
            scatter_grad(*self.parents[0], ga);
        }
        if (self.parents[1]->requires_grad) {
            std::vector<double> gb(d);
            const double norm_coef = nb > eps ? c / (nb_c * nb) : 0.0;
            for (std::size_t i = 0; i < d; ++i) gb[i] = g * (av[i] * inv - norm_coef * bv[i]);
            scatter_grad(*self.parents[1], gb);
        }
    });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    return make_op_result({}, {total}, {x}, [](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        std::vector<double> gx(self.parents[0]->values.size(), self.grad[0]);
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor mean_rows(const Tensor& x) {
    require_rank2(x, "mean_rows");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (n == 0) throw DimensionError("mean_rows: no rows");
    std::vector<double> out(d, 0.0);
    const auto xv = x.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[j] += xv[i * d + j];
    for (auto& v : out) v /= static_cast<double>(n);
    return make_op_result({d}, std::move(out), {x}, [n, d](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        std::vector<double> gx(n * d);
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) gx[i * d + j] = self.grad[j] * inv;
        scatter_grad(*self.parents[0], gx);
    });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (auto dsz : shape) n *= dsz;
    if (n != x.size()) {
        throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                             shape_to_string(shape));
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    return make_op_result(std::move(shape), std::move(out), {x}, [](TensorNode& self) {
        accumulate_grad(*self.parents[0], self.grad);
    });
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: no parts");
    const std::size_t d = parts[0].rank() == 2 ? parts[0].dim(1) : 0;
    std::size_t total = 0;
    for (const auto& p : parts) {
        require_rank2(p, "concat_rows");
        if (p.dim(1) != d) {
            throw DimensionError("concat_rows: width mismatch " + shape_to_string(p.shape()));
        }
        total += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(total * d);
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return make_op_result({total, d}, std::move(out), std::move(inputs), [](TensorNode& self) {
        std::size_t offset = 0;
        for (auto& parent : self.parents) {
            const std::size_t len = parent->values.size();
            if (parent->requires_grad) {
                std::vector<double> g(self.grad.begin() + offset,
                                      self.grad.begin() + offset + len);
                scatter_grad(*parent, g);
            }
            offset += len;
        }
    });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
    require_rank2(x, "slice_rows");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (begin > end || end > n) {
        throw IndexError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + std::to_string(n) + " rows");
    }
    std::vector<double> out(x.values().begin() + begin * d, x.values().begin() + end * d);
    return make_op_result({end - begin, d}, std::move(out), {x}, [begin, d](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        TensorNode& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[begin * d + i] += self.grad[i];
    });
}

Tensor row(const Tensor& x, std::size_t i) {
    require_rank2(x, "row");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (i >= n) {
        throw IndexError("row: index " + std::to_string(i) + " out of range for " +
                         std::to_string(n) + " rows");
    }
    std::vector<double> out(x.values().begin() + i * d, x.values().begin() + (i + 1) * d);
    return make_op_result({d}, std::move(out), {x}, [i, d](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        TensorNode& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t j = 0; j < d; ++j) p.grad[i * d + j] += self.grad[j];
    });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
    require_rank2(x, "slice_cols");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (begin > end || end > d) {
        throw IndexError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + std::to_string(d) + " cols");
    }
    const std::size_t w = end - begin;
    std::vector<double> out(n * w);
    const auto xv = x.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) out[i * w + j] = xv[i * d + begin + j];
    return make_op_result({n, w}, std::move(out), {x}, [n, d, begin, w](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        TensorNode& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j)
                p.grad[i * d + begin + j] += self.grad[i * w + j];
    });
}

std::vector<Tensor> split_cols(const Tensor& x, std::size_t parts) {
    require_rank2(x, "split_cols");
    const std::size_t d = x.dim(1);
    if (parts == 0 || d % parts != 0) {
        throw DimensionError("split_cols: cannot split width " + std::to_string(d) + " into " +
                             std::to_string(parts) + " parts");
    }
    const std::size_t w = d / parts;
    std::vector<Tensor> out;
    out.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) out.push_back(slice_cols(x, p * w, (p + 1) * w));
    return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const std::size_t n = parts[0].rank() == 2 ? parts[0].dim(0) : 0;
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        require_rank2(p, "concat_cols");
        if (p.dim(0) != n) {
            throw DimensionError("concat_cols: row mismatch " + shape_to_string(p.shape()));
        }
        widths.push_back(p.dim(1));
        total += p.dim(1);
    }
    std::vector<double> out(n * total);
    std::size_t col = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const auto pv = parts[pi].values();
        const std::size_t w = widths[pi];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) out[i * total + col + j] = pv[i * w + j];
        col += w;
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return make_op_result({n, total}, std::move(out), std::move(inputs),
                          [n, total, widths](TensorNode& self) {
        std::size_t col = 0;
        for (std::size_t pi = 0; pi < self.parents.size(); ++pi) {
            const std::size_t w = widths[pi];
            if (self.parents[pi]->requires_grad) {
                std::vector<double> g(n * w);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < w; ++j)
                        g[i * w + j] = self.grad[i * total + col + j];
                scatter_grad(*self.parents[pi], g);
            }
            col += w;
        }
    });
}

Tensor stack_scalars(std::span<const Tensor> scalars) {
    if (scalars.empty()) throw DimensionError("stack_scalars: no inputs");
    std::vector<double> out;
    out.reserve(scalars.size());
    for (const auto& s : scalars) {
        if (s.size() != 1) {
            throw DimensionError("stack_scalars: non-scalar input of shape " +
                                 shape_to_string(s.shape()));
        }
        out.push_back(s.values()[0]);
    }
    std::vector<Tensor> inputs(scalars.begin(), scalars.end());
    return make_op_result({scalars.size()}, std::move(out), std::move(inputs),
                          [](TensorNode& self) {
        for (std::size_t i = 0; i < self.parents.size(); ++i) {
            if (!self.parents[i]->requires_grad) continue;
            TensorNode& p = *self.parents[i];
            p.ensure_grad();
            p.grad[0] += self.grad[i];
        }
    });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
    require_rank2(table, "embedding_lookup");
    const std::size_t v = table.dim(0), d = table.dim(1);
    std::vector<double> out;
    out.reserve(ids.size() * d);
    const auto tv = table.values();
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= v) {
            throw IndexError("embedding_lookup: id " + std::to_string(id) +
                             " out of vocabulary of size " + std::to_string(v));
        }
        const std::size_t off = static_cast<std::size_t>(id) * d;
        out.insert(out.end(), tv.begin() + off, tv.begin() + off + d);
    }
    std::vector<int> ids_copy(ids.begin(), ids.end());
    return make_op_result({ids.size(), d}, std::move(out), {table},
                          [ids = std::move(ids_copy), d](TensorNode& self) {
        if (!self.parents[0]->requires_grad) return;
        TensorNode& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const std::size_t off = static_cast<std::size_t>(ids[i]) * d;
            for (std::size_t j = 0; j < d; ++j) p.grad[off + j] += self.grad[i * d + j];
        }
    });
}

}  // namespace ckt
