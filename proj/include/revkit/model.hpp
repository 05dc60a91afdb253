// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "revkit/nn.hpp"

namespace revkit {

struct ModelError : std::runtime_error {
    enum class Kind {
        InvalidConfig,
        LengthExceeded,
        MissingCls,
        PositionNotMasked,
        EmptyTarget,
        BadCheckpoint,
    };
    Kind kind;
    ModelError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct ModelConfig {
    int n_enc_layers = 2;
    int n_dec_layers = 2;
    int n_heads = 4;
    int d_model = 128;
    int d_ff = 512;
    int vocab_size = 8000;
    int max_len = 512;
    double dropout = 0.0;

    void validate() const {
        if (n_enc_layers < 1 || n_dec_layers < 1 || n_heads < 1 || d_model < 1 || d_ff < 1 ||
            vocab_size < 1 || max_len < 1)
            throw ModelError(ModelError::Kind::InvalidConfig, "all dimensions must be positive");
        if (d_model % n_heads != 0)
            throw ModelError(ModelError::Kind::InvalidConfig,
                             "d_model must be divisible by n_heads");
        if (dropout < 0.0 || dropout >= 1.0)
            throw ModelError(ModelError::Kind::InvalidConfig, "dropout must be in [0,1)");
    }

    bool operator==(const ModelConfig&) const = default;
};

// All learnable tensors. The same struct doubles as gradient and optimizer
// moment storage.
template <typename T>
struct ModelParams {
    using Tensor = nn::Tensor<T>;

    struct LayerNorm {
        Tensor g, b;
    };
    struct Attention {
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    };
    struct Ffn {
        Tensor w1, b1, w2, b2;
    };
    struct EncLayer {
        LayerNorm ln1;
        Attention attn;
        LayerNorm ln2;
        Ffn ffn;
    };
    struct DecLayer {
        LayerNorm ln1;
        Attention self_attn;
        LayerNorm ln2;
        Attention cross_attn;
        LayerNorm ln3;
        Ffn ffn;
    };

    Tensor tok_emb;  // [V, d]; also the tied output projection
    Tensor pos_emb;  // [max_len, d]
    std::vector<EncLayer> enc;
    LayerNorm enc_final;
    std::vector<DecLayer> dec;
    LayerNorm dec_final;
    Tensor cls_w, cls_b;  // [1, d], [1, 1]
    Tensor tag_w, tag_b;  // [3, d], [1, 3]

    ModelParams() = default;

    explicit ModelParams(const ModelConfig& cfg) {
        const int d = cfg.d_model;
        auto ln = [&] { return LayerNorm{Tensor(1, d), Tensor(1, d)}; };
        auto attn = [&] {
            return Attention{Tensor(d, d), Tensor(1, d), Tensor(d, d), Tensor(1, d),
                             Tensor(d, d), Tensor(1, d), Tensor(d, d), Tensor(1, d)};
        };
        auto ffn = [&] {
            return Ffn{Tensor(cfg.d_ff, d), Tensor(1, cfg.d_ff), Tensor(d, cfg.d_ff),
                       Tensor(1, d)};
        };
        tok_emb = Tensor(cfg.vocab_size, d);
        pos_emb = Tensor(cfg.max_len, d);
        for (int i = 0; i < cfg.n_enc_layers; ++i) enc.push_back({ln(), attn(), ln(), ffn()});
        enc_final = ln();
        for (int i = 0; i < cfg.n_dec_layers; ++i)
            dec.push_back({ln(), attn(), ln(), attn(), ln(), ffn()});
        dec_final = ln();
        cls_w = Tensor(1, d);
        cls_b = Tensor(1, 1);
        tag_w = Tensor(3, d);
        tag_b = Tensor(1, 3);
    }

    // Stable walk over (name, tensor) in a fixed order.
    std::vector<std::pair<std::string, Tensor*>> named_tensors() {
        std::vector<std::pair<std::string, Tensor*>> out;
        auto add_ln = [&](const std::string& p, LayerNorm& l) {
            out.emplace_back(p + ".g", &l.g);
            out.emplace_back(p + ".b", &l.b);
        };
        auto add_attn = [&](const std::string& p, Attention& a) {
            out.emplace_back(p + ".wq", &a.wq);
            out.emplace_back(p + ".bq", &a.bq);
            out.emplace_back(p + ".wk", &a.wk);
            out.emplace_back(p + ".bk", &a.bk);
            out.emplace_back(p + ".wv", &a.wv);
            out.emplace_back(p + ".bv", &a.bv);
            out.emplace_back(p + ".wo", &a.wo);
            out.emplace_back(p + ".bo", &a.bo);
        };
        auto add_ffn = [&](const std::string& p, Ffn& f) {
            out.emplace_back(p + ".w1", &f.w1);
            out.emplace_back(p + ".b1", &f.b1);
            out.emplace_back(p + ".w2", &f.w2);
            out.emplace_back(p + ".b2", &f.b2);
        };
        out.emplace_back("tok_emb", &tok_emb);
        out.emplace_back("pos_emb", &pos_emb);
        for (std::size_t i = 0; i < enc.size(); ++i) {
            std::string p = "enc." + std::to_string(i);
            add_ln(p + ".ln1", enc[i].ln1);
            add_attn(p + ".attn", enc[i].attn);
            add_ln(p + ".ln2", enc[i].ln2);
            add_ffn(p + ".ffn", enc[i].ffn);
        }
        add_ln("enc_final", enc_final);
        for (std::size_t i = 0; i < dec.size(); ++i) {
            std::string p = "dec." + std::to_string(i);
            add_ln(p + ".ln1", dec[i].ln1);
            add_attn(p + ".self_attn", dec[i].self_attn);
            add_ln(p + ".ln2", dec[i].ln2);
            add_attn(p + ".cross_attn", dec[i].cross_attn);
            add_ln(p + ".ln3", dec[i].ln3);
            add_ffn(p + ".ffn", dec[i].ffn);
        }
        add_ln("dec_final", dec_final);
        out.emplace_back("cls.w", &cls_w);
        out.emplace_back("cls.b", &cls_b);
        out.emplace_back("tag.w", &tag_w);
        out.emplace_back("tag.b", &tag_b);
        return out;
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto& [name, t] : named_tensors()) n += t->size();
        return n;
    }

    void zero() {
        for (auto& [name, t] : named_tensors()) t->zero();
    }
};

// Seeded scaled-normal initialization: N(0, 0.02) everywhere, residual
// output projections scaled down by sqrt(2 * layers), layer norms at
// identity, biases at zero.
template <typename T>
void init_params(ModelParams<T>& p, const ModelConfig& cfg, std::uint64_t seed) {
    Rng rng(mix64(seed, fnv1a64("model-init")));
    const double base = 0.02;
    const double resid =
        base / std::sqrt(2.0 * static_cast<double>(cfg.n_enc_layers + cfg.n_dec_layers));
    for (auto& [name, t] : p.named_tensors()) {
        bool is_ln_gain = name.size() >= 2 && name.compare(name.size() - 2, 2, ".g") == 0 &&
                          (name.find("ln") != std::string::npos ||
                           name.find("final") != std::string::npos);
        bool is_bias = name.find(".b") != std::string::npos && !is_ln_gain;
        bool is_resid_out = name.find(".wo") != std::string::npos ||
                            name.find(".w2") != std::string::npos;
        if (is_ln_gain) {
            std::fill(t->v.begin(), t->v.end(), T(1));
        } else if (is_bias) {
            t->zero();
        } else {
            double std_dev = is_resid_out ? resid : base;
            for (auto& x : t->v) x = static_cast<T>(rng.normal() * std_dev);
        }
    }
}

// Serialized model state: config + named float32 tensors (+ optional
// optimizer moments), the training step, and the vocabulary fingerprint.
struct Checkpoint {
    ModelConfig config;
    std::map<std::string, nn::Tensor<float>> tensors;
    std::map<std::string, nn::Tensor<float>> optimizer_state;
    std::int64_t step = 0;
    std::uint64_t vocab_fingerprint = 0;

    void save(const std::string& dir) const;
    static Checkpoint load(const std::string& dir);
};

Checkpoint init_model(const ModelConfig& config, std::uint64_t seed);

// Encoder-decoder transformer (pre-norm, learned absolute positions, tied
// input/output embedding) with classification and tag heads. Templated so
// gradient checks can run the whole thing in double precision.
template <typename T>
class Transformer {
public:
    using Graph = nn::Graph<T>;

    explicit Transformer(const ModelConfig& cfg) : cfg_(cfg), p_(cfg) { cfg.validate(); }

    Transformer(const ModelConfig& cfg, std::uint64_t seed) : Transformer(cfg) {
        init_params(p_, cfg_, seed);
    }

    const ModelConfig& config() const { return cfg_; }
    ModelParams<T>& params() { return p_; }
    const ModelParams<T>& params() const { return p_; }

    void load_tensors(const std::map<std::string, nn::Tensor<float>>& tensors) {
        for (auto& [name, t] : p_.named_tensors()) {
            auto it = tensors.find(name);
            if (it == tensors.end())
                throw ModelError(ModelError::Kind::BadCheckpoint, "missing tensor " + name);
            if (it->second.rows != t->rows || it->second.cols != t->cols)
                throw ModelError(ModelError::Kind::BadCheckpoint, "shape mismatch for " + name);
            for (std::size_t i = 0; i < t->v.size(); ++i)
                t->v[i] = static_cast<T>(it->second.v[i]);
        }
    }

    std::map<std::string, nn::Tensor<float>> dump_tensors() {
        std::map<std::string, nn::Tensor<float>> out;
        for (auto& [name, t] : p_.named_tensors()) {
            nn::Tensor<float> ft(t->rows, t->cols);
            for (std::size_t i = 0; i < t->v.size(); ++i)
                ft.v[i] = static_cast<float>(t->v[i]);
            out.emplace(name, std::move(ft));
        }
        return out;
    }

    // Per-forward context: the tape plus the param-to-leaf cache, and the
    // dropout switch (training only).
    struct Ctx {
        Graph g;
        std::unordered_map<const void*, int> leaf_ids;
        bool train = false;
        Rng* rng = nullptr;

        explicit Ctx(bool grad_enabled = true) : g(grad_enabled) {}
    };

    int param_leaf(Ctx& ctx, nn::Tensor<T>& t) const {
        auto it = ctx.leaf_ids.find(&t);
        if (it != ctx.leaf_ids.end()) return it->second;
        int id = ctx.g.leaf(t);
        ctx.leaf_ids.emplace(&t, id);
        return id;
    }

    int encode(Ctx& ctx, const std::vector<int>& input_ids) {
        check_ids(input_ids);
        int x = embed(ctx, input_ids);
        for (auto& layer : p_.enc) {
            int normed = ln(ctx, x, layer.ln1);
            int att = attention(ctx, layer.attn, normed, normed, false);
            x = ctx.g.add(x, maybe_dropout(ctx, att));
            int normed2 = ln(ctx, x, layer.ln2);
            int ff = ffn(ctx, layer.ffn, normed2);
            x = ctx.g.add(x, maybe_dropout(ctx, ff));
        }
        return ln(ctx, x, p_.enc_final);
    }

    // dec_input_ids are the already-shifted decoder inputs.
    int decode(Ctx& ctx, int enc_states, const std::vector<int>& dec_input_ids) {
        check_ids(dec_input_ids);
        int x = embed(ctx, dec_input_ids);
        for (auto& layer : p_.dec) {
            int normed = ln(ctx, x, layer.ln1);
            int att = attention(ctx, layer.self_attn, normed, normed, true);
            x = ctx.g.add(x, maybe_dropout(ctx, att));
            int normed2 = ln(ctx, x, layer.ln2);
            int cross = attention(ctx, layer.cross_attn, normed2, enc_states, false);
            x = ctx.g.add(x, maybe_dropout(ctx, cross));
            int normed3 = ln(ctx, x, layer.ln3);
            int ff = ffn(ctx, layer.ffn, normed3);
            x = ctx.g.add(x, maybe_dropout(ctx, ff));
        }
        return ln(ctx, x, p_.dec_final);
    }

    // Tied projection to the vocabulary.
    int lm_logits(Ctx& ctx, int dec_states) {
        return ctx.g.matmul_nt(dec_states, param_leaf(ctx, p_.tok_emb));
    }

    // [1,1] logit from the encoder state at position 0.
    int cls_logit(Ctx& ctx, int enc_states) {
        int row0 = ctx.g.rows_select(enc_states, {0});
        return ctx.g.linear(row0, param_leaf(ctx, p_.cls_w), param_leaf(ctx, p_.cls_b));
    }

    // [P,3] logits at the given encoder positions.
    int tag_logits_node(Ctx& ctx, int enc_states, const std::vector<int>& positions) {
        int rows = ctx.g.rows_select(enc_states, positions);
        return ctx.g.linear(rows, param_leaf(ctx, p_.tag_w), param_leaf(ctx, p_.tag_b));
    }

    // Adds each used parameter's gradient into `grads` (same layout).
    void accumulate_grads(Ctx& ctx, ModelParams<T>& grads) {
        auto mine = p_.named_tensors();
        auto theirs = grads.named_tensors();
        for (std::size_t i = 0; i < mine.size(); ++i) {
            auto it = ctx.leaf_ids.find(mine[i].second);
            if (it == ctx.leaf_ids.end()) continue;
            const nn::Tensor<T>& g = ctx.g.leaf_grad(it->second);
            for (std::size_t k = 0; k < g.v.size(); ++k) theirs[i].second->v[k] += g.v[k];
        }
    }

private:
    void check_ids(const std::vector<int>& ids) const {
        if (static_cast<int>(ids.size()) > cfg_.max_len)
            throw ModelError(ModelError::Kind::LengthExceeded,
                             "sequence length " + std::to_string(ids.size()) + " exceeds max_len " +
                                 std::to_string(cfg_.max_len));
        for (int id : ids)
            if (id < 0 || id >= cfg_.vocab_size)
                throw ModelError(ModelError::Kind::LengthExceeded,
                                 "token id " + std::to_string(id) + " out of vocabulary");
    }

    int embed(Ctx& ctx, const std::vector<int>& ids) {
        int tok = ctx.g.embedding(param_leaf(ctx, p_.tok_emb), ids);
        std::vector<int> positions(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
        int pos = ctx.g.rows_select(param_leaf(ctx, p_.pos_emb), positions);
        return maybe_dropout(ctx, ctx.g.add(tok, pos));
    }

    int ln(Ctx& ctx, int x, typename ModelParams<T>::LayerNorm& l) {
        return ctx.g.layer_norm(x, param_leaf(ctx, l.g), param_leaf(ctx, l.b));
    }

    int attention(Ctx& ctx, typename ModelParams<T>::Attention& a, int q_in, int kv_in,
                  bool causal) {
        int q = ctx.g.linear(q_in, param_leaf(ctx, a.wq), param_leaf(ctx, a.bq));
        int k = ctx.g.linear(kv_in, param_leaf(ctx, a.wk), param_leaf(ctx, a.bk));
        int v = ctx.g.linear(kv_in, param_leaf(ctx, a.wv), param_leaf(ctx, a.bv));
        int mixed = ctx.g.mha(q, k, v, cfg_.n_heads, causal);
        return ctx.g.linear(mixed, param_leaf(ctx, a.wo), param_leaf(ctx, a.bo));
    }

    int ffn(Ctx& ctx, typename ModelParams<T>::Ffn& f, int x) {
        int h = ctx.g.gelu(ctx.g.linear(x, param_leaf(ctx, f.w1), param_leaf(ctx, f.b1)));
        return ctx.g.linear(h, param_leaf(ctx, f.w2), param_leaf(ctx, f.b2));
    }

    int maybe_dropout(Ctx& ctx, int x) {
        if (!ctx.train || cfg_.dropout <= 0.0 || ctx.rng == nullptr) return x;
        return ctx.g.dropout(x, static_cast<T>(cfg_.dropout), *ctx.rng);
    }

    ModelConfig cfg_;
    ModelParams<T> p_;
};

// Builds the shifted decoder input for teacher forcing: PAD acts as the
// beginning-of-sequence token.
std::vector<int> shift_right(const std::vector<int>& target_ids);

// Inference facade over a float Transformer. Immutable; safe to share
// across threads for concurrent forward passes.
class Model {
public:
    explicit Model(const Checkpoint& ckpt);

    const ModelConfig& config() const { return tf_.config(); }

    struct TeacherForced {
        nn::Tensor<float> step_logits;     // [|target|, vocab]
        nn::Tensor<float> encoder_states;  // [|input|, d_model]
    };
    TeacherForced forward_teacher_forced(const std::vector<int>& input_ids,
                                         const std::vector<int>& target_ids) const;

    double classify(const std::vector<int>& input_ids) const;

    std::vector<std::array<float, 3>> tag_logits(const std::vector<int>& input_ids,
                                                 const std::vector<int>& tag_positions) const;

    std::vector<int> generate_beam(const std::vector<int>& input_ids, int beam_size,
                                   int max_new_tokens) const;
    std::vector<int> generate_greedy(const std::vector<int>& input_ids,
                                     int max_new_tokens) const;

private:
    mutable Transformer<float> tf_;
};

}  // namespace revkit
