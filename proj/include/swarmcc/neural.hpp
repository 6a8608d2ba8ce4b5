#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmcc/cmdp_env.hpp"
#include "swarmcc/rng.hpp"

namespace swarmcc {

// Hyperparameters of the Q-network: node encoder, two multi-head
// dot-product graph-attention layers, and a dense head fed with the
// concatenated per-stage features of the agent's own node.
struct NetConfig {
    int in_dim = Observation::kFeatDim;
    int feat = 32;        // F, width of every node embedding
    int heads = 8;        // M
    int head_hidden = 64; // dense-head hidden width
    int actions = 2;
    bool scale_sqrt_dk = false;  // attention scale: sqrt(dk) instead of 1/sqrt(dk)

    int head_dim() const { return feat / heads; }
    double attn_scale() const {
        const double dk = static_cast<double>(head_dim());
        return scale_sqrt_dk ? std::sqrt(dk) : 1.0 / std::sqrt(dk);
    }
    void validate() const {
        if (feat <= 0 || heads <= 0 || head_hidden <= 0 || actions <= 0 || in_dim <= 0)
            throw std::invalid_argument("net: dimensions must be positive");
        if (feat % heads != 0)
            throw std::invalid_argument("net: feat must be divisible by heads");
    }
};

// Offsets of every weight tensor inside the flat parameter buffer. A single
// contiguous buffer keeps Adam, soft updates, checkpoints and the
// finite-difference checks trivial.
struct ParamLayout {
    struct GatOffsets {
        std::size_t wq, wk, wv, wp, bp;
    };
    std::size_t enc_w1, enc_b1, enc_w2, enc_b2;
    GatOffsets gat[2];
    std::size_t head_w1, head_b1, head_w2, head_b2;
    std::size_t total;

    static ParamLayout make(const NetConfig& cfg) {
        const std::size_t in = cfg.in_dim, f = cfg.feat, proj = cfg.feat;
        const std::size_t hh = cfg.head_hidden, a = cfg.actions;
        ParamLayout l{};
        std::size_t off = 0;
        auto take = [&off](std::size_t n) { std::size_t o = off; off += n; return o; };
        l.enc_w1 = take(f * in);
        l.enc_b1 = take(f);
        l.enc_w2 = take(f * f);
        l.enc_b2 = take(f);
        for (auto& g : l.gat) {
            g.wq = take(proj * f);
            g.wk = take(proj * f);
            g.wv = take(proj * f);
            g.wp = take(f * f);
            g.bp = take(f);
        }
        l.head_w1 = take(hh * 3 * f);
        l.head_b1 = take(hh);
        l.head_w2 = take(a * hh);
        l.head_b2 = take(a);
        l.total = off;
        return l;
    }
};

struct QNetworkParams {
    NetConfig cfg;
    ParamLayout layout;
    std::vector<double> data;

    QNetworkParams() = default;
    explicit QNetworkParams(const NetConfig& c) : cfg(c), layout(ParamLayout::make(c)) {
        cfg.validate();
        data.assign(layout.total, 0.0);
    }

    // Uniform fan-in init: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    void init_uniform_fan_in(RandomStream& rng) {
        auto fill = [&](std::size_t w_off, std::size_t b_off, int rows, int cols) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
            for (int i = 0; i < rows * cols; ++i) data[w_off + i] = rng.uniform(-bound, bound);
            if (b_off != static_cast<std::size_t>(-1))
                for (int i = 0; i < rows; ++i) data[b_off + i] = rng.uniform(-bound, bound);
        };
        constexpr std::size_t kNoBias = static_cast<std::size_t>(-1);
        const int f = cfg.feat;
        fill(layout.enc_w1, layout.enc_b1, f, cfg.in_dim);
        fill(layout.enc_w2, layout.enc_b2, f, f);
        for (const auto& g : layout.gat) {
            fill(g.wq, kNoBias, f, f);
            fill(g.wk, kNoBias, f, f);
            fill(g.wv, kNoBias, f, f);
            fill(g.wp, g.bp, f, f);
        }
        fill(layout.head_w1, layout.head_b1, cfg.head_hidden, 3 * f);
        fill(layout.head_w2, layout.head_b2, cfg.actions, cfg.head_hidden);
    }
};

namespace detail {

// y = W x + b, W row-major (rows x cols).
inline void affine(const double* w, const double* b, const double* x, double* y, int rows,
                   int cols) {
    for (int r = 0; r < rows; ++r) {
        double acc = b ? b[r] : 0.0;
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

// Accumulate dW += dy x^T, db += dy, dx += W^T dy.
inline void affine_backward(const double* w, const double* x, const double* dy, double* dw,
                            double* db, double* dx, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        double* dwr = dw + static_cast<std::size_t>(r) * cols;
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) {
            dwr[c] += g * x[c];
            if (dx) dx[c] += wr[c] * g;
        }
        if (db) db[r] += g;
    }
}

inline void relu(const double* z, double* a, int n) {
    for (int i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

inline void relu_backward(const double* z, const double* da, double* dz, int n) {
    for (int i = 0; i < n; ++i) dz[i] = z[i] > 0.0 ? da[i] : 0.0;
}

}  // namespace detail

// All intermediate activations of one forward pass, kept for the backward
// pass. Reused across calls to avoid reallocation in the training loop.
struct NetWorkspace {
    int n = 0;
    std::vector<double> x;                    // n x in
    std::vector<double> enc_z1, enc_a1, enc_z2, h0;  // n x F
    struct GatBuffers {
        std::vector<double> q, k, v;          // n x F (heads concatenated)
        std::vector<double> logits, alpha;    // heads x n x n
        std::vector<double> msg;              // n x F
        std::vector<double> z, h;             // n x F
    } gat[2];
    std::vector<double> cat, head_z1, head_a1, q_values;
    // backward scratch
    std::vector<double> d_h0, d_gat0_h, d_gat1_h, d_cat, d_head_z1, d_msg, d_q, d_k, d_v,
        d_alpha, d_z;

    void resize(const NetConfig& cfg, int n_nodes) {
        n = n_nodes;
        const std::size_t nf = static_cast<std::size_t>(n) * cfg.feat;
        x.resize(static_cast<std::size_t>(n) * cfg.in_dim);
        enc_z1.resize(nf);
        enc_a1.resize(nf);
        enc_z2.resize(nf);
        h0.resize(nf);
        for (auto& g : gat) {
            g.q.resize(nf);
            g.k.resize(nf);
            g.v.resize(nf);
            g.logits.resize(static_cast<std::size_t>(cfg.heads) * n * n);
            g.alpha.resize(static_cast<std::size_t>(cfg.heads) * n * n);
            g.msg.resize(nf);
            g.z.resize(nf);
            g.h.resize(nf);
        }
        cat.resize(3 * static_cast<std::size_t>(cfg.feat));
        head_z1.resize(cfg.head_hidden);
        head_a1.resize(cfg.head_hidden);
        q_values.resize(cfg.actions);
        d_h0.resize(nf);
        d_gat0_h.resize(nf);
        d_gat1_h.resize(nf);
        d_cat.resize(3 * static_cast<std::size_t>(cfg.feat));
        d_head_z1.resize(cfg.head_hidden);
        d_msg.resize(nf);
        d_q.resize(nf);
        d_k.resize(nf);
        d_v.resize(nf);
        d_alpha.resize(static_cast<std::size_t>(n) * n);
        d_z.resize(nf);
    }
};

namespace detail {

inline void gat_forward(const QNetworkParams& p, const ParamLayout::GatOffsets& off,
                        const std::vector<double>& hin, NetWorkspace::GatBuffers& g, int n) {
    const NetConfig& cfg = p.cfg;
    const int f = cfg.feat, heads = cfg.heads, dk = cfg.head_dim();
    const double psi = cfg.attn_scale();
    const double* wq = p.data.data() + off.wq;
    const double* wk = p.data.data() + off.wk;
    const double* wv = p.data.data() + off.wv;
    for (int i = 0; i < n; ++i) {
        const double* hi = hin.data() + static_cast<std::size_t>(i) * f;
        affine(wq, nullptr, hi, g.q.data() + static_cast<std::size_t>(i) * f, f, f);
        affine(wk, nullptr, hi, g.k.data() + static_cast<std::size_t>(i) * f, f, f);
        affine(wv, nullptr, hi, g.v.data() + static_cast<std::size_t>(i) * f, f, f);
    }
    for (int m = 0; m < heads; ++m) {
        const int base = m * dk;
        double* logits = g.logits.data() + static_cast<std::size_t>(m) * n * n;
        double* alpha = g.alpha.data() + static_cast<std::size_t>(m) * n * n;
        for (int i = 0; i < n; ++i) {
            const double* qi = g.q.data() + static_cast<std::size_t>(i) * f + base;
            double row_max = -1e300;
            for (int j = 0; j < n; ++j) {
                const double* kj = g.k.data() + static_cast<std::size_t>(j) * f + base;
                double s = 0.0;
                for (int d = 0; d < dk; ++d) s += qi[d] * kj[d];
                s *= psi;
                logits[i * n + j] = s;
                row_max = std::max(row_max, s);
            }
            double denom = 0.0;
            for (int j = 0; j < n; ++j) {
                const double e = std::exp(logits[i * n + j] - row_max);
                alpha[i * n + j] = e;
                denom += e;
            }
            for (int j = 0; j < n; ++j) alpha[i * n + j] /= denom;
        }
    }
    // Per-head messages, heads concatenated along the feature axis.
    for (int i = 0; i < n; ++i) {
        double* mi = g.msg.data() + static_cast<std::size_t>(i) * f;
        for (int c = 0; c < f; ++c) mi[c] = 0.0;
        for (int m = 0; m < heads; ++m) {
            const int base = m * dk;
            const double* alpha = g.alpha.data() + static_cast<std::size_t>(m) * n * n + i * n;
            for (int j = 0; j < n; ++j) {
                const double a = alpha[j];
                const double* vj = g.v.data() + static_cast<std::size_t>(j) * f + base;
                for (int d = 0; d < dk; ++d) mi[base + d] += a * vj[d];
            }
        }
    }
    const double* wp = p.data.data() + off.wp;
    const double* bp = p.data.data() + off.bp;
    for (int i = 0; i < n; ++i) {
        affine(wp, bp, g.msg.data() + static_cast<std::size_t>(i) * f,
               g.z.data() + static_cast<std::size_t>(i) * f, f, f);
        relu(g.z.data() + static_cast<std::size_t>(i) * f,
             g.h.data() + static_cast<std::size_t>(i) * f, f);
    }
}

// dh: gradient on this layer's output, accumulates gradient on hin into dhin.
inline void gat_backward(const QNetworkParams& p, const ParamLayout::GatOffsets& off,
                         const std::vector<double>& hin, const NetWorkspace::GatBuffers& g,
                         const std::vector<double>& dh, std::vector<double>& dhin,
                         std::vector<double>& grad, NetWorkspace& ws) {
    const NetConfig& cfg = p.cfg;
    const int n = ws.n, f = cfg.feat, heads = cfg.heads, dk = cfg.head_dim();
    const double psi = cfg.attn_scale();

    std::fill(ws.d_msg.begin(), ws.d_msg.end(), 0.0);
    std::fill(ws.d_q.begin(), ws.d_q.end(), 0.0);
    std::fill(ws.d_k.begin(), ws.d_k.end(), 0.0);
    std::fill(ws.d_v.begin(), ws.d_v.end(), 0.0);

    const double* wp = p.data.data() + off.wp;
    double* dwp = grad.data() + off.wp;
    double* dbp = grad.data() + off.bp;
    for (int i = 0; i < n; ++i) {
        relu_backward(g.z.data() + static_cast<std::size_t>(i) * f,
                      dh.data() + static_cast<std::size_t>(i) * f, ws.d_z.data(), f);
        affine_backward(wp, g.msg.data() + static_cast<std::size_t>(i) * f, ws.d_z.data(), dwp,
                        dbp, ws.d_msg.data() + static_cast<std::size_t>(i) * f, f, f);
    }

    for (int m = 0; m < heads; ++m) {
        const int base = m * dk;
        const double* alpha = g.alpha.data() + static_cast<std::size_t>(m) * n * n;
        for (int i = 0; i < n; ++i) {
            const double* dmi = ws.d_msg.data() + static_cast<std::size_t>(i) * f + base;
            // d_alpha and softmax jacobian, one attention row at a time
            double inner = 0.0;
            for (int j = 0; j < n; ++j) {
                const double* vj = g.v.data() + static_cast<std::size_t>(j) * f + base;
                double da = 0.0;
                for (int d = 0; d < dk; ++d) da += dmi[d] * vj[d];
                ws.d_alpha[j] = da;
                inner += alpha[i * n + j] * da;
                // v accumulates alpha-weighted message gradient
                double* dvj = ws.d_v.data() + static_cast<std::size_t>(j) * f + base;
                const double a = alpha[i * n + j];
                for (int d = 0; d < dk; ++d) dvj[d] += a * dmi[d];
            }
            for (int j = 0; j < n; ++j) {
                const double ds = alpha[i * n + j] * (ws.d_alpha[j] - inner);
                if (ds == 0.0) continue;
                const double* kj = g.k.data() + static_cast<std::size_t>(j) * f + base;
                const double* qi = g.q.data() + static_cast<std::size_t>(i) * f + base;
                double* dqi = ws.d_q.data() + static_cast<std::size_t>(i) * f + base;
                double* dkj = ws.d_k.data() + static_cast<std::size_t>(j) * f + base;
                for (int d = 0; d < dk; ++d) {
                    dqi[d] += psi * ds * kj[d];
                    dkj[d] += psi * ds * qi[d];
                }
            }
        }
    }

    const double* wq = p.data.data() + off.wq;
    const double* wk = p.data.data() + off.wk;
    const double* wv = p.data.data() + off.wv;
    double* dwq = grad.data() + off.wq;
    double* dwk = grad.data() + off.wk;
    double* dwv = grad.data() + off.wv;
    for (int i = 0; i < n; ++i) {
        const double* hi = hin.data() + static_cast<std::size_t>(i) * f;
        double* dhi = dhin.data() + static_cast<std::size_t>(i) * f;
        affine_backward(wq, hi, ws.d_q.data() + static_cast<std::size_t>(i) * f, dwq, nullptr,
                        dhi, f, f);
        affine_backward(wk, hi, ws.d_k.data() + static_cast<std::size_t>(i) * f, dwk, nullptr,
                        dhi, f, f);
        affine_backward(wv, hi, ws.d_v.data() + static_cast<std::size_t>(i) * f, dwv, nullptr,
                        dhi, f, f);
    }
}

}  // namespace detail

// Per-node encoder MLP. Exposed separately for tests; q_forward uses it.
inline void encode_nodes(const QNetworkParams& p, const Observation& obs, NetWorkspace& ws) {
    const NetConfig& cfg = p.cfg;
    if (obs.n_nodes <= 0) throw std::invalid_argument("encode_nodes: empty observation");
    if (static_cast<int>(obs.node_features.size()) != obs.n_nodes * cfg.in_dim)
        throw std::invalid_argument("encode_nodes: feature dimension mismatch");
    ws.resize(cfg, obs.n_nodes);
    ws.x = obs.node_features;
    const int f = cfg.feat, in = cfg.in_dim;
    for (int i = 0; i < obs.n_nodes; ++i) {
        detail::affine(p.data.data() + p.layout.enc_w1, p.data.data() + p.layout.enc_b1,
                       ws.x.data() + static_cast<std::size_t>(i) * in,
                       ws.enc_z1.data() + static_cast<std::size_t>(i) * f, f, in);
        detail::relu(ws.enc_z1.data() + static_cast<std::size_t>(i) * f,
                     ws.enc_a1.data() + static_cast<std::size_t>(i) * f, f);
        detail::affine(p.data.data() + p.layout.enc_w2, p.data.data() + p.layout.enc_b2,
                       ws.enc_a1.data() + static_cast<std::size_t>(i) * f,
                       ws.enc_z2.data() + static_cast<std::size_t>(i) * f, f, f);
        detail::relu(ws.enc_z2.data() + static_cast<std::size_t>(i) * f,
                     ws.h0.data() + static_cast<std::size_t>(i) * f, f);
    }
}

// Full forward pass; Q-values land in ws.q_values.
inline const std::vector<double>& q_forward(const QNetworkParams& p, const Observation& obs,
                                            int self, NetWorkspace& ws) {
    const NetConfig& cfg = p.cfg;
    if (self < 0 || self >= obs.n_nodes) throw std::out_of_range("q_forward: bad self index");
    encode_nodes(p, obs, ws);
    detail::gat_forward(p, p.layout.gat[0], ws.h0, ws.gat[0], ws.n);
    detail::gat_forward(p, p.layout.gat[1], ws.gat[0].h, ws.gat[1], ws.n);

    const int f = cfg.feat;
    const std::size_t row = static_cast<std::size_t>(self) * f;
    for (int c = 0; c < f; ++c) {
        ws.cat[c] = ws.h0[row + c];
        ws.cat[f + c] = ws.gat[0].h[row + c];
        ws.cat[2 * f + c] = ws.gat[1].h[row + c];
    }
    detail::affine(p.data.data() + p.layout.head_w1, p.data.data() + p.layout.head_b1,
                   ws.cat.data(), ws.head_z1.data(), cfg.head_hidden, 3 * f);
    detail::relu(ws.head_z1.data(), ws.head_a1.data(), cfg.head_hidden);
    detail::affine(p.data.data() + p.layout.head_w2, p.data.data() + p.layout.head_b2,
                   ws.head_a1.data(), ws.q_values.data(), cfg.actions, cfg.head_hidden);
    for (double q : ws.q_values)
        if (!std::isfinite(q)) throw std::runtime_error("q_forward: non-finite Q-value");
    return ws.q_values;
}

// Reverse pass from dL/dQ. Accumulates into grad (same layout as params);
// requires the workspace of the matching forward pass.
inline void q_backward(const QNetworkParams& p, int self, const std::vector<double>& d_q_values,
                       NetWorkspace& ws, std::vector<double>& grad) {
    const NetConfig& cfg = p.cfg;
    const int f = cfg.feat, n = ws.n;
    if (grad.size() != p.data.size()) throw std::invalid_argument("q_backward: grad size mismatch");
    if (n == 0) throw std::logic_error("q_backward: no recorded forward pass");

    // Head.
    std::fill(ws.d_cat.begin(), ws.d_cat.end(), 0.0);
    std::vector<double> da_hidden(cfg.head_hidden, 0.0);
    detail::affine_backward(p.data.data() + p.layout.head_w2, ws.head_a1.data(),
                            d_q_values.data(), grad.data() + p.layout.head_w2,
                            grad.data() + p.layout.head_b2, da_hidden.data(), cfg.actions,
                            cfg.head_hidden);
    detail::relu_backward(ws.head_z1.data(), da_hidden.data(), ws.d_head_z1.data(),
                          cfg.head_hidden);
    detail::affine_backward(p.data.data() + p.layout.head_w1, ws.cat.data(), ws.d_head_z1.data(),
                            grad.data() + p.layout.head_w1, grad.data() + p.layout.head_b1,
                            ws.d_cat.data(), cfg.head_hidden, 3 * f);

    // Scatter the concat gradient to the self node of each stage.
    std::fill(ws.d_h0.begin(), ws.d_h0.end(), 0.0);
    std::fill(ws.d_gat0_h.begin(), ws.d_gat0_h.end(), 0.0);
    std::fill(ws.d_gat1_h.begin(), ws.d_gat1_h.end(), 0.0);
    const std::size_t row = static_cast<std::size_t>(self) * f;
    for (int c = 0; c < f; ++c) {
        ws.d_h0[row + c] += ws.d_cat[c];
        ws.d_gat0_h[row + c] += ws.d_cat[f + c];
        ws.d_gat1_h[row + c] += ws.d_cat[2 * f + c];
    }

    // GAT layer 2 backward adds into d_gat0_h, layer 1 into d_h0.
    detail::gat_backward(p, p.layout.gat[1], ws.gat[0].h, ws.gat[1], ws.d_gat1_h, ws.d_gat0_h,
                         grad, ws);
    detail::gat_backward(p, p.layout.gat[0], ws.h0, ws.gat[0], ws.d_gat0_h, ws.d_h0, grad, ws);

    // Encoder.
    const int in = cfg.in_dim;
    std::vector<double> d_a1(f);
    for (int i = 0; i < n; ++i) {
        const std::size_t r = static_cast<std::size_t>(i) * f;
        detail::relu_backward(ws.enc_z2.data() + r, ws.d_h0.data() + r, ws.d_z.data(), f);
        std::fill(d_a1.begin(), d_a1.end(), 0.0);
        detail::affine_backward(p.data.data() + p.layout.enc_w2, ws.enc_a1.data() + r,
                                ws.d_z.data(), grad.data() + p.layout.enc_w2,
                                grad.data() + p.layout.enc_b2, d_a1.data(), f, f);
        detail::relu_backward(ws.enc_z1.data() + r, d_a1.data(), ws.d_z.data(), f);
        detail::affine_backward(p.data.data() + p.layout.enc_w1,
                                ws.x.data() + static_cast<std::size_t>(i) * in, ws.d_z.data(),
                                grad.data() + p.layout.enc_w1, grad.data() + p.layout.enc_b1,
                                nullptr, f, in);
    }
}

// Adam with bias correction over the flat parameter buffer.
struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grads, double lr,
                      AdamState& state) {
    if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be > 0");
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: size mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        if (!std::isfinite(params[i])) throw std::runtime_error("adam_step: non-finite parameter");
    }
}

// target <- beta * online + (1 - beta) * target.
inline void soft_update(std::vector<double>& target, const std::vector<double>& online,
                        double beta) {
    if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("soft_update: beta in (0, 1]");
    if (target.size() != online.size()) throw std::invalid_argument("soft_update: size mismatch");
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = beta * online[i] + (1.0 - beta) * target[i];
}

}  // namespace swarmcc
