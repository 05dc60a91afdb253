// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "revkit/common.hpp"

namespace revkit::nn {

// Row-major 2-D tensor. Scalars are [1,1].
template <typename T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, T(0)) {}

    T& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    T* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const T* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    std::size_t size() const { return v.size(); }
    void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

// Reverse-mode tape over 2-D tensors. One Graph per forward pass; leaves are
// copied in, gradients are read back off the leaf nodes after backward().
// Note: node creation may reallocate storage, so ops fetch references only
// after their output node exists.
template <typename T>
class Graph {
public:
    explicit Graph(bool grad_enabled = true)
        : s_(std::make_unique<State>()) {
        s_->grad_enabled = grad_enabled;
    }

    int rows(int id) const { return s_->nodes[id].val.rows; }
    int cols(int id) const { return s_->nodes[id].val.cols; }
    const Tensor<T>& val(int id) const { return s_->nodes[id].val; }
    const Tensor<T>& leaf_grad(int id) const { return s_->nodes[id].grad; }

    int leaf(int rows, int cols, const T* data) {
        int id = new_node(rows, cols);
        std::copy(data, data + static_cast<std::size_t>(rows) * cols, s_->nodes[id].val.v.begin());
        return id;
    }

    int leaf(const Tensor<T>& t) { return leaf(t.rows, t.cols, t.v.data()); }

    // y[i,:] = table[ids[i],:]
    int embedding(int table, std::vector<int> ids) {
        const int d = cols(table);
        int id = new_node(static_cast<int>(ids.size()), d);
        const Tensor<T>& tab = s_->nodes[table].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            assert(ids[i] >= 0 && ids[i] < tab.rows);
            std::copy(tab.row(ids[i]), tab.row(ids[i]) + d, out.row(static_cast<int>(i)));
        }
        record([st = s_.get(), table, id, ids = std::move(ids)] {
            Tensor<T>& dtab = st->nodes[table].grad;
            const Tensor<T>& dout = st->nodes[id].grad;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const T* src = dout.row(static_cast<int>(i));
                T* dst = dtab.row(ids[i]);
                for (int c = 0; c < dtab.cols; ++c) dst[c] += src[c];
            }
        });
        return id;
    }

    // y[i,:] = x[rows[i],:]
    int rows_select(int x, std::vector<int> select) {
        const int d = cols(x);
        int id = new_node(static_cast<int>(select.size()), d);
        const Tensor<T>& xin = s_->nodes[x].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (std::size_t i = 0; i < select.size(); ++i) {
            assert(select[i] >= 0 && select[i] < xin.rows);
            std::copy(xin.row(select[i]), xin.row(select[i]) + d, out.row(static_cast<int>(i)));
        }
        record([st = s_.get(), x, id, select = std::move(select)] {
            Tensor<T>& dx = st->nodes[x].grad;
            const Tensor<T>& dout = st->nodes[id].grad;
            for (std::size_t i = 0; i < select.size(); ++i) {
                const T* src = dout.row(static_cast<int>(i));
                T* dst = dx.row(select[i]);
                for (int c = 0; c < dx.cols; ++c) dst[c] += src[c];
            }
        });
        return id;
    }

    int add(int a, int b) {
        assert(rows(a) == rows(b) && cols(a) == cols(b));
        int id = new_node(rows(a), cols(a));
        const Tensor<T>& av = s_->nodes[a].val;
        const Tensor<T>& bv = s_->nodes[b].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = av.v[i] + bv.v[i];
        record([st = s_.get(), a, b, id] {
            const Tensor<T>& dout = st->nodes[id].grad;
            Tensor<T>& da = st->nodes[a].grad;
            Tensor<T>& db = st->nodes[b].grad;
            for (std::size_t i = 0; i < dout.size(); ++i) {
                da.v[i] += dout.v[i];
                db.v[i] += dout.v[i];
            }
        });
        return id;
    }

    int scale(int a, T s) {
        int id = new_node(rows(a), cols(a));
        const Tensor<T>& av = s_->nodes[a].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (std::size_t i = 0; i < av.size(); ++i) out.v[i] = av.v[i] * s;
        record([st = s_.get(), a, id, s] {
            const Tensor<T>& dout = st->nodes[id].grad;
            Tensor<T>& da = st->nodes[a].grad;
            for (std::size_t i = 0; i < dout.size(); ++i) da.v[i] += dout.v[i] * s;
        });
        return id;
    }

    // y = x w^T + b. x:[m,k] w:[n,k] b:[1,n] -> [m,n]
    int linear(int x, int w, int b) {
        const int m = rows(x), k = cols(x), n = rows(w);
        assert(cols(w) == k && cols(b) == n && rows(b) == 1);
        int id = new_node(m, n);
        const Tensor<T>& xv = s_->nodes[x].val;
        const Tensor<T>& wv = s_->nodes[w].val;
        const Tensor<T>& bv = s_->nodes[b].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (int i = 0; i < m; ++i) {
            const T* xr = xv.row(i);
            T* yr = out.row(i);
            for (int j = 0; j < n; ++j) {
                const T* wr = wv.row(j);
                T acc = bv.v[j];
                for (int c = 0; c < k; ++c) acc += xr[c] * wr[c];
                yr[j] = acc;
            }
        }
        record([st = s_.get(), x, w, b, id, m, k, n] {
            const Tensor<T>& dout = st->nodes[id].grad;
            const Tensor<T>& xv2 = st->nodes[x].val;
            const Tensor<T>& wv2 = st->nodes[w].val;
            Tensor<T>& dx = st->nodes[x].grad;
            Tensor<T>& dw = st->nodes[w].grad;
            Tensor<T>& db = st->nodes[b].grad;
            for (int i = 0; i < m; ++i) {
                const T* dr = dout.row(i);
                const T* xr = xv2.row(i);
                T* dxr = dx.row(i);
                for (int j = 0; j < n; ++j) {
                    T g = dr[j];
                    if (g == T(0)) continue;
                    const T* wr = wv2.row(j);
                    T* dwr = dw.row(j);
                    for (int c = 0; c < k; ++c) {
                        dxr[c] += g * wr[c];
                        dwr[c] += g * xr[c];
                    }
                    db.v[j] += g;
                }
            }
        });
        return id;
    }

    // y = a b^T. a:[m,k] b:[n,k] -> [m,n]. Tied-embedding logits.
    int matmul_nt(int a, int b) {
        const int m = rows(a), k = cols(a), n = rows(b);
        assert(cols(b) == k);
        int id = new_node(m, n);
        const Tensor<T>& av = s_->nodes[a].val;
        const Tensor<T>& bv = s_->nodes[b].val;
        Tensor<T>& out = s_->nodes[id].val;
        for (int i = 0; i < m; ++i) {
            const T* ar = av.row(i);
            T* yr = out.row(i);
            for (int j = 0; j < n; ++j) {
                const T* br = bv.row(j);
                T acc = T(0);
                for (int c = 0; c < k; ++c) acc += ar[c] * br[c];
                yr[j] = acc;
            }
        }
        record([st = s_.get(), a, b, id, m, k, n] {
            const Tensor<T>& dout = st->nodes[id].grad;
            const Tensor<T>& av2 = st->nodes[a].val;
            const Tensor<T>& bv2 = st->nodes[b].val;
            Tensor<T>& da = st->nodes[a].grad;
            Tensor<T>& db = st->nodes[b].grad;
            for (int i = 0; i < m; ++i) {
                const T* dr = dout.row(i);
                const T* ar = av2.row(i);
                T* dar = da.row(i);
                for (int j = 0; j < n; ++j) {
                    T g = dr[j];
                    if (g == T(0)) continue;
                    const T* br = bv2.row(j);
                    T* dbr = db.row(j);
                    for (int c = 0; c < k; ++c) {
                        dar[c] += g * br[c];
                        dbr[c] += g * ar[c];
                    }
                }
            }
        });
        return id;
    }

    // Row-wise layer norm with affine transform. gamma/beta: [1, cols].
    int layer_norm(int x, int gamma, int beta, T eps = T(1e-5)) {
        const int m = rows(x), c = cols(x);
        assert(cols(gamma) == c && cols(beta) == c);
        int id = new_node(m, c);
        const Tensor<T>& xv = s_->nodes[x].val;
        const Tensor<T>& gv = s_->nodes[gamma].val;
        const Tensor<T>& bv = s_->nodes[beta].val;
        Tensor<T>& out = s_->nodes[id].val;
        auto xhat = std::make_shared<Tensor<T>>(m, c);
        auto inv_sigma = std::make_shared<std::vector<T>>(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            const T* xr = xv.row(i);
            T mean = T(0);
            for (int k = 0; k < c; ++k) mean += xr[k];
            mean /= c;
            T var = T(0);
            for (int k = 0; k < c; ++k) var += (xr[k] - mean) * (xr[k] - mean);
            var /= c;
            T inv = T(1) / std::sqrt(var + eps);
            (*inv_sigma)[static_cast<std::size_t>(i)] = inv;
            T* hr = xhat->row(i);
            T* yr = out.row(i);
            for (int k = 0; k < c; ++k) {
                hr[k] = (xr[k] - mean) * inv;
                yr[k] = hr[k] * gv.v[k] + bv.v[k];
            }
        }
        record([st = s_.get(), x, gamma, beta, id, xhat, inv_sigma, m, c] {
            const Tensor<T>& dout = st->nodes[id].grad;
            const Tensor<T>& gv2 = st->nodes[gamma].val;
            Tensor<T>& dx = st->nodes[x].grad;
            Tensor<T>& dg = st->nodes[gamma].grad;
            Tensor<T>& db = st->nodes[beta].grad;
            for (int i = 0; i < m; ++i) {
                const T* dr = dout.row(i);
                const T* hr = xhat->row(i);
                T* dxr = dx.row(i);
                T sum_dh = T(0), sum_dh_h = T(0);
                for (int k = 0; k < c; ++k) {
                    T dh = dr[k] * gv2.v[k];
                    sum_dh += dh;
                    sum_dh_h += dh * hr[k];
                    dg.v[k] += dr[k] * hr[k];
                    db.v[k] += dr[k];
                }
                T inv = (*inv_sigma)[static_cast<std::size_t>(i)];
                for (int k = 0; k < c; ++k) {
                    T dh = dr[k] * gv2.v[k];
                    dxr[k] += (dh - sum_dh / c - hr[k] * sum_dh_h / c) * inv;
                }
            }
        });
        return id;
    }

    // tanh-approximated GELU; smooth, which keeps finite differences honest.
    int gelu(int x) {
        int id = new_node(rows(x), cols(x));
        const Tensor<T>& xv = s_->nodes[x].val;
        Tensor<T>& out = s_->nodes[id].val;
        const T kC = T(0.7978845608028654);  // sqrt(2/pi)
        const T kA = T(0.044715);
        for (std::size_t i = 0; i < xv.size(); ++i) {
            T v = xv.v[i];
            out.v[i] = T(0.5) * v * (T(1) + std::tanh(kC * (v + kA * v * v * v)));
        }
        record([st = s_.get(), x, id, kC, kA] {
            const Tensor<T>& xv2 = st->nodes[x].val;
            const Tensor<T>& dout = st->nodes[id].grad;
            Tensor<T>& dx = st->nodes[x].grad;
            for (std::size_t i = 0; i < xv2.size(); ++i) {
                T v = xv2.v[i];
                T u = kC * (v + kA * v * v * v);
                T t = std::tanh(u);
                T dudv = kC * (T(1) + T(3) * kA * v * v);
                T g = T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * dudv;
                dx.v[i] += dout.v[i] * g;
            }
        });
        return id;
    }

    // Inverted dropout; identity when p == 0.
    int dropout(int x, T p, Rng& rng) {
        if (p <= T(0)) return x;
        int id = new_node(rows(x), cols(x));
        const Tensor<T>& xv = s_->nodes[x].val;
        Tensor<T>& out = s_->nodes[id].val;
        auto mask = std::make_shared<std::vector<T>>(xv.size());
        T keep = T(1) - p;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            (*mask)[i] = (rng.unit() < static_cast<double>(keep)) ? T(1) / keep : T(0);
            out.v[i] = xv.v[i] * (*mask)[i];
        }
        record([st = s_.get(), x, id, mask] {
            const Tensor<T>& dout = st->nodes[id].grad;
            Tensor<T>& dx = st->nodes[x].grad;
            for (std::size_t i = 0; i < dout.size(); ++i) dx.v[i] += dout.v[i] * (*mask)[i];
        });
        return id;
    }

    // Multi-head scaled dot-product attention. q:[m,d] k,v:[n,d] -> [m,d].
    // causal masks out j > i (requires m == n).
    int mha(int q, int k, int v, int n_heads, bool causal) {
        const int m = rows(q), n = rows(k), d = cols(q);
        assert(cols(k) == d && cols(v) == d && rows(v) == n);
        assert(d % n_heads == 0);
        assert(!causal || m == n);
        const int dh = d / n_heads;
        const T scale = T(1) / std::sqrt(static_cast<T>(dh));

        int id = new_node(m, d);
        const Tensor<T>& qv = s_->nodes[q].val;
        const Tensor<T>& kv = s_->nodes[k].val;
        const Tensor<T>& vv = s_->nodes[v].val;
        Tensor<T>& out = s_->nodes[id].val;
        // Attention probabilities per head, kept for backward.
        auto probs = std::make_shared<std::vector<Tensor<T>>>();
        probs->reserve(static_cast<std::size_t>(n_heads));

        for (int h = 0; h < n_heads; ++h) {
            const int off = h * dh;
            Tensor<T> attn(m, n);
            for (int i = 0; i < m; ++i) {
                const T* qr = qv.row(i) + off;
                T* ar = attn.row(i);
                int limit = causal ? i + 1 : n;
                T maxv = -std::numeric_limits<T>::infinity();
                for (int j = 0; j < limit; ++j) {
                    const T* kr = kv.row(j) + off;
                    T acc = T(0);
                    for (int c = 0; c < dh; ++c) acc += qr[c] * kr[c];
                    ar[j] = acc * scale;
                    if (ar[j] > maxv) maxv = ar[j];
                }
                T denom = T(0);
                for (int j = 0; j < limit; ++j) {
                    ar[j] = std::exp(ar[j] - maxv);
                    denom += ar[j];
                }
                for (int j = 0; j < limit; ++j) ar[j] /= denom;
                for (int j = limit; j < n; ++j) ar[j] = T(0);
                T* yr = out.row(i) + off;
                for (int c = 0; c < dh; ++c) yr[c] = T(0);
                for (int j = 0; j < limit; ++j) {
                    const T* vr = vv.row(j) + off;
                    T a = ar[j];
                    for (int c = 0; c < dh; ++c) yr[c] += a * vr[c];
                }
            }
            probs->push_back(std::move(attn));
        }

        record([st = s_.get(), q, k, v, id, n_heads, causal, dh, scale, probs, m, n] {
            const Tensor<T>& dout = st->nodes[id].grad;
            const Tensor<T>& qv2 = st->nodes[q].val;
            const Tensor<T>& kv2 = st->nodes[k].val;
            const Tensor<T>& vv2 = st->nodes[v].val;
            Tensor<T>& dq = st->nodes[q].grad;
            Tensor<T>& dk = st->nodes[k].grad;
            Tensor<T>& dv = st->nodes[v].grad;
            std::vector<T> dattn(static_cast<std::size_t>(n), T(0));
            for (int h = 0; h < n_heads; ++h) {
                const int off = h * dh;
                const Tensor<T>& attn = (*probs)[static_cast<std::size_t>(h)];
                for (int i = 0; i < m; ++i) {
                    const int limit = causal ? i + 1 : n;
                    const T* dor = dout.row(i) + off;
                    const T* ar = attn.row(i);
                    T dot = T(0);
                    for (int j = 0; j < limit; ++j) {
                        const T* vr = vv2.row(j) + off;
                        T* dvr = dv.row(j) + off;
                        T da = T(0);
                        for (int c = 0; c < dh; ++c) {
                            da += dor[c] * vr[c];
                            dvr[c] += ar[j] * dor[c];
                        }
                        dattn[static_cast<std::size_t>(j)] = da;
                        dot += da * ar[j];
                    }
                    const T* qr = qv2.row(i) + off;
                    T* dqr = dq.row(i) + off;
                    for (int j = 0; j < limit; ++j) {
                        T ds = (dattn[static_cast<std::size_t>(j)] - dot) * ar[j] * scale;
                        if (ds == T(0)) continue;
                        const T* kr = kv2.row(j) + off;
                        T* dkr = dk.row(j) + off;
                        for (int c = 0; c < dh; ++c) {
                            dqr[c] += ds * kr[c];
                            dkr[c] += ds * qr[c];
                        }
                    }
                }
            }
        });
        return id;
    }

    // Mean cross-entropy over rows: (1/k) sum_i [logsumexp(row_i) - row_i[t_i]].
    int ce_mean(int logits, std::vector<int> targets) {
        const int m = rows(logits), n = cols(logits);
        assert(static_cast<int>(targets.size()) == m && m > 0);
        int id = new_node(1, 1);
        const Tensor<T>& lv = s_->nodes[logits].val;
        auto softmaxes = std::make_shared<Tensor<T>>(m, n);
        T total = T(0);
        for (int i = 0; i < m; ++i) {
            const T* lr = lv.row(i);
            T maxv = lr[0];
            for (int c = 1; c < n; ++c) maxv = std::max(maxv, lr[c]);
            T denom = T(0);
            for (int c = 0; c < n; ++c) denom += std::exp(lr[c] - maxv);
            T lse = maxv + std::log(denom);
            total += lse - lr[targets[static_cast<std::size_t>(i)]];
            T* sr = softmaxes->row(i);
            for (int c = 0; c < n; ++c) sr[c] = std::exp(lr[c] - lse);
        }
        s_->nodes[id].val.v[0] = total / static_cast<T>(m);
        record([st = s_.get(), logits, id, targets = std::move(targets), softmaxes, m, n] {
            T g = st->nodes[id].grad.v[0] / static_cast<T>(m);
            Tensor<T>& dl = st->nodes[logits].grad;
            for (int i = 0; i < m; ++i) {
                const T* sr = softmaxes->row(i);
                T* dr = dl.row(i);
                for (int c = 0; c < n; ++c) dr[c] += g * sr[c];
                dr[targets[static_cast<std::size_t>(i)]] -= g;
            }
        });
        return id;
    }

    // Binary cross-entropy on a single logit (numerically stable form).
    int bce_logit(int x, int label) {
        const T z = s_->nodes[x].val.v[0];
        const T y = static_cast<T>(label);
        int id = new_node(1, 1);
        s_->nodes[id].val.v[0] = std::max(z, T(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
        record([st = s_.get(), x, id, z, y] {
            T sig = T(1) / (T(1) + std::exp(-z));
            st->nodes[x].grad.v[0] += st->nodes[id].grad.v[0] * (sig - y);
        });
        return id;
    }

    void backward(int loss) {
        assert(s_->grad_enabled);
        assert(s_->nodes[loss].val.size() == 1);
        s_->nodes[loss].grad.v[0] = T(1);
        for (auto it = s_->tape.rbegin(); it != s_->tape.rend(); ++it) (*it)();
    }

private:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;
    };

    // Heap-stable so backward closures stay valid when the Graph is moved.
    struct State {
        bool grad_enabled = true;
        std::vector<Node> nodes;
        std::vector<std::function<void()>> tape;
    };

    int new_node(int rows, int cols) {
        Node n;
        n.val = Tensor<T>(rows, cols);
        if (s_->grad_enabled) n.grad = Tensor<T>(rows, cols);
        s_->nodes.push_back(std::move(n));
        return static_cast<int>(s_->nodes.size()) - 1;
    }

    template <class F>
    void record(F&& fn) {
        if (s_->grad_enabled) s_->tape.push_back(std::forward<F>(fn));
    }

    std::unique_ptr<State> s_;
};

// Softmax of a plain vector; used by decoding and tests.
template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
    T maxv = logits[0];
    for (T v : logits) maxv = std::max(maxv, v);
    std::vector<T> out(logits.size());
    T denom = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - maxv);
        denom += out[i];
    }
    for (T& v : out) v /= denom;
    return out;
}

template <typename T>
std::vector<T> log_softmax(const std::vector<T>& logits) {
    T maxv = logits[0];
    for (T v : logits) maxv = std::max(maxv, v);
    T denom = T(0);
    for (T v : logits) denom += std::exp(v - maxv);
    T lse = maxv + std::log(denom);
    std::vector<T> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

}  // namespace revkit::nn
