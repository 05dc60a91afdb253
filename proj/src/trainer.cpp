// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "revkit/metrics.hpp"

namespace revkit {

double lr_schedule(std::int64_t step, const TrainConfig& config) {
    if (config.total_steps == 0) return 0.0;
    if (config.warmup_steps > 0 && step <= config.warmup_steps)
        return config.lr * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
    if (step >= config.total_steps) return 0.0;
    return config.lr * static_cast<double>(config.total_steps - step) /
           static_cast<double>(config.total_steps - config.warmup_steps);
}

void append_train_log(const std::string& path, const std::vector<TrainLogEntry>& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw TrainerError(TrainerError::Kind::BadConfig, "cannot write " + path);
    for (const auto& e : entries) {
        nlohmann::json j{{"step", e.step},
                         {"task", task_kind_name(e.task)},
                         {"loss", e.loss},
                         {"lr", e.lr}};
        out << j.dump() << "\n";
    }
}

double clip_gradients(ModelParams<float>& grads, double max_norm) {
    double norm_sq = 0.0;
    auto named = grads.named_tensors();
    for (auto& [name, t] : named)
        for (float g : t->v) norm_sq += static_cast<double>(g) * g;
    double norm = std::sqrt(norm_sq);
    if (max_norm > 0 && norm > max_norm) {
        float scale = static_cast<float>(max_norm / norm);
        for (auto& [name, t] : named)
            for (float& g : t->v) g *= scale;
    }
    return norm;
}

PretrainData PretrainData::from_examples(const std::vector<PretrainExample>& examples) {
    PretrainData data;
    for (const auto& ex : examples) {
        data.hunks.push_back(ex.hunk);
        if (!ex.comment.empty()) data.commented.emplace_back(ex.hunk, ex.comment);
    }
    return data;
}

namespace {

using FParams = ModelParams<float>;
using FCtx = Transformer<float>::Ctx;

// Adam with decoupled weight decay plus global-norm clipping, with an
// optional per-tensor freeze filter (frozen tensors are never touched).
class Optimizer {
public:
    Optimizer(const ModelConfig& mc, const TrainConfig& tc)
        : cfg_(tc), grads_(mc), m_(mc), v_(mc) {}

    void load_state(const std::map<std::string, nn::Tensor<float>>& state) {
        if (state.empty()) return;
        for (auto& [name, t] : m_.named_tensors()) {
            auto it = state.find("m." + name);
            if (it != state.end() && it->second.v.size() == t->v.size()) t->v = it->second.v;
        }
        for (auto& [name, t] : v_.named_tensors()) {
            auto it = state.find("v." + name);
            if (it != state.end() && it->second.v.size() == t->v.size()) t->v = it->second.v;
        }
    }

    std::map<std::string, nn::Tensor<float>> dump_state() {
        std::map<std::string, nn::Tensor<float>> out;
        for (auto& [name, t] : m_.named_tensors()) out.emplace("m." + name, *t);
        for (auto& [name, t] : v_.named_tensors()) out.emplace("v." + name, *t);
        return out;
    }

    FParams& grads() { return grads_; }

    void set_freeze_prefixes(std::vector<std::string> prefixes) {
        freeze_prefixes_ = std::move(prefixes);
    }

    bool frozen(const std::string& name) const {
        for (const auto& p : freeze_prefixes_)
            if (name.rfind(p, 0) == 0) return true;
        return false;
    }

    // One update at 1-based Adam timestep t with the given learning rate.
    void step(Transformer<float>& tf, std::int64_t t, double lr) {
        auto params = tf.params().named_tensors();
        auto grads = grads_.named_tensors();
        auto ms = m_.named_tensors();
        auto vs = v_.named_tensors();

        for (std::size_t i = 0; i < grads.size(); ++i)
            if (frozen(grads[i].first)) grads[i].second->zero();
        clip_gradients(grads_, cfg_.grad_clip_norm);

        const double b1 = cfg_.beta1, b2 = cfg_.beta2;
        const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (frozen(params[i].first)) continue;
            auto& p = params[i].second->v;
            auto& g = grads[i].second->v;
            auto& m = ms[i].second->v;
            auto& v = vs[i].second->v;
            for (std::size_t k = 0; k < p.size(); ++k) {
                double gk = static_cast<double>(g[k]);
                double mk = b1 * m[k] + (1 - b1) * gk;
                double vk = b2 * v[k] + (1 - b2) * gk * gk;
                m[k] = static_cast<float>(mk);
                v[k] = static_cast<float>(vk);
                double mhat = mk / bias1;
                double vhat = vk / bias2;
                double update = mhat / (std::sqrt(vhat) + cfg_.adam_eps) +
                                cfg_.weight_decay * static_cast<double>(p[k]);
                p[k] = static_cast<float>(p[k] - lr * update);
            }
        }
        grads_.zero();
    }

private:
    TrainConfig cfg_;
    FParams grads_, m_, v_;
    std::vector<std::string> freeze_prefixes_;
};

// One sample's loss node given a built context.
int sample_loss_node(Transformer<float>& tf, FCtx& ctx, const TaskSample& s) {
    int enc = tf.encode(ctx, s.input_ids);
    switch (s.kind) {
        case TaskKind::Dtp: {
            std::vector<int> positions, labels;
            for (const auto& tp : s.tag_positions) {
                positions.push_back(tp.index);
                labels.push_back(tp.label);
            }
            return ctx.g.ce_mean(tf.tag_logits_node(ctx, enc, positions), labels);
        }
        case TaskKind::QualityCls:
            return ctx.g.bce_logit(tf.cls_logit(ctx, enc), s.cls_label.value_or(0));
        default: {
            int dec = tf.decode(ctx, enc, shift_right(s.target_ids));
            return ctx.g.ce_mean(tf.lm_logits(ctx, dec), s.target_ids);
        }
    }
}

// Forward/backward for one sample; returns the (unscaled) loss.
double train_on_sample(Transformer<float>& tf, Optimizer& opt, const TaskSample& s,
                       float inv_batch, Rng& dropout_rng, bool use_dropout) {
    FCtx ctx(true);
    ctx.train = use_dropout;
    ctx.rng = &dropout_rng;
    int loss = sample_loss_node(tf, ctx, s);
    double value = ctx.g.val(loss).v[0];
    int scaled = ctx.g.scale(loss, inv_batch);
    ctx.g.backward(scaled);
    tf.accumulate_grads(ctx, opt.grads());
    return value;
}

TaskSample build_pretrain_sample(const PretrainData& data, const Vocab& vocab, TaskKind kind,
                                 const TrainConfig& cfg, std::uint64_t step, int slot) {
    Rng rng(mix64(mix64(cfg.seed, step), static_cast<std::uint64_t>(slot) + 1));
    switch (kind) {
        case TaskKind::Dtp: {
            const DiffHunk& h = data.hunks[rng.uniform(data.hunks.size())];
            return make_dtp(h, vocab, cfg.max_len);
        }
        case TaskKind::Dcd: {
            const DiffHunk& h = data.hunks[rng.uniform(data.hunks.size())];
            return make_dcd(h, vocab, cfg.max_len, rng);
        }
        case TaskKind::Drc: {
            const auto& pair = data.commented[rng.uniform(data.commented.size())];
            return make_drc(pair.second, vocab, cfg.max_len, rng);
        }
        default: {
            const auto& pair = data.commented[rng.uniform(data.commented.size())];
            return make_rcg(pair.first, pair.second, vocab, cfg.max_len);
        }
    }
}

std::vector<std::pair<TaskKind, double>> normalized_mix(const TrainConfig& cfg) {
    static const TaskKind kOrder[] = {TaskKind::Dtp, TaskKind::Dcd, TaskKind::Drc, TaskKind::Rcg};
    std::vector<std::pair<TaskKind, double>> mix;
    double sum = 0;
    for (TaskKind k : kOrder) {
        double w = cfg.task_mix.empty() ? 1.0 : 0.0;
        auto it = cfg.task_mix.find(k);
        if (it != cfg.task_mix.end()) w = it->second;
        if (w > 0) {
            mix.emplace_back(k, w);
            sum += w;
        }
    }
    if (mix.empty())
        throw TrainerError(TrainerError::Kind::BadConfig, "no task has positive weight");
    for (auto& [k, w] : mix) w /= sum;
    return mix;
}

void save_with_optimizer(Transformer<float>& tf, Optimizer& opt, std::int64_t step,
                         std::uint64_t vocab_fp, const std::string& dir) {
    Checkpoint ckpt;
    ckpt.config = tf.config();
    ckpt.tensors = tf.dump_tensors();
    ckpt.optimizer_state = opt.dump_state();
    ckpt.step = step;
    ckpt.vocab_fingerprint = vocab_fp;
    ckpt.save(dir);
}

}  // namespace

Checkpoint pretrain(const PretrainData& data, const Checkpoint& init, const TrainConfig& config,
                    const Vocab& vocab, std::vector<TrainLogEntry>* log,
                    const std::string& checkpoint_dir) {
    config.validate();
    if (data.hunks.empty())
        throw TrainerError(TrainerError::Kind::EmptyCorpus, "no hunks to pre-train on");
    auto mix = normalized_mix(config);
    for (const auto& [kind, w] : mix)
        if ((kind == TaskKind::Drc || kind == TaskKind::Rcg) && data.commented.empty())
            throw TrainerError(TrainerError::Kind::EmptyCorpus,
                               "comment tasks weighted but the corpus has no comments");

    Transformer<float> tf(init.config);
    tf.load_tensors(init.tensors);
    Optimizer opt(init.config, config);
    opt.load_state(init.optimizer_state);

    for (std::int64_t step = init.step + 1; step <= config.total_steps; ++step) {
        double lr = lr_schedule(step, config);
        // Task of the batch.
        Rng task_rng(mix64(mix64(config.seed, static_cast<std::uint64_t>(step)), 0));
        double u = task_rng.unit();
        TaskKind kind = mix.back().first;
        double acc = 0;
        for (const auto& [k, w] : mix) {
            acc += w;
            if (u < acc) {
                kind = k;
                break;
            }
        }

        double batch_loss = 0;
        Rng dropout_rng(mix64(config.seed ^ 0x5eedf00d, static_cast<std::uint64_t>(step)));
        for (int slot = 0; slot < config.batch_size; ++slot) {
            TaskSample s = build_pretrain_sample(data, vocab, kind, config,
                                                 static_cast<std::uint64_t>(step), slot);
            batch_loss += train_on_sample(tf, opt, s, 1.0f / config.batch_size, dropout_rng,
                                          init.config.dropout > 0);
        }
        batch_loss /= config.batch_size;
        opt.step(tf, step, lr);
        if (log) log->push_back({step, kind, batch_loss, lr});
        if (!checkpoint_dir.empty() && step % config.eval_every == 0) {
            save_with_optimizer(tf, opt, step, vocab.fingerprint(),
                                checkpoint_dir + "/step_" + std::to_string(step));
        }
    }

    Checkpoint out;
    out.config = init.config;
    out.tensors = tf.dump_tensors();
    out.optimizer_state = opt.dump_state();
    out.step = config.total_steps;
    out.vocab_fingerprint = vocab.fingerprint();
    if (!checkpoint_dir.empty()) out.save(checkpoint_dir + "/last");
    return out;
}

namespace {

template <typename Sample>
struct FinetuneHooks {
    std::function<TaskSample(const Sample&, Rng&)> build;
    // Higher is better (e.g. F1, or negated validation loss).
    std::function<double(Transformer<float>&)> validation_score;
};

template <typename Sample>
Checkpoint finetune_loop(const std::vector<Sample>& train, const Checkpoint& init,
                         const TrainConfig& config, const Vocab& vocab, TaskKind kind,
                         std::vector<TrainLogEntry>* log, FinetuneHooks<Sample> hooks,
                         bool freeze_decoder, bool has_validation) {
    config.validate();
    if (train.empty())
        throw TrainerError(TrainerError::Kind::EmptyDataset, "empty fine-tuning dataset");

    Transformer<float> tf(init.config);
    tf.load_tensors(init.tensors);
    Optimizer opt(init.config, config);
    if (freeze_decoder) opt.set_freeze_prefixes({"dec.", "dec_final"});

    double best_score = -std::numeric_limits<double>::infinity();
    std::map<std::string, nn::Tensor<float>> best_tensors;

    for (std::int64_t step = 1; step <= config.total_steps; ++step) {
        double lr = lr_schedule(step, config);
        double batch_loss = 0;
        Rng dropout_rng(mix64(config.seed ^ 0xd20b0a7e, static_cast<std::uint64_t>(step)));
        for (int slot = 0; slot < config.batch_size; ++slot) {
            Rng rng(mix64(mix64(config.seed, static_cast<std::uint64_t>(step)),
                          static_cast<std::uint64_t>(slot) + 1));
            const Sample& raw = train[rng.uniform(train.size())];
            TaskSample s = hooks.build(raw, rng);
            batch_loss += train_on_sample(tf, opt, s, 1.0f / config.batch_size, dropout_rng,
                                          init.config.dropout > 0);
        }
        batch_loss /= config.batch_size;
        opt.step(tf, step, lr);
        if (log) log->push_back({step, kind, batch_loss, lr});

        if (has_validation && (step % config.eval_every == 0 || step == config.total_steps)) {
            double score = hooks.validation_score(tf);
            if (score > best_score) {
                best_score = score;
                best_tensors = tf.dump_tensors();
            }
        }
    }

    Checkpoint out;
    out.config = init.config;
    out.tensors = (has_validation && !best_tensors.empty()) ? best_tensors : tf.dump_tensors();
    out.step = config.total_steps;
    out.vocab_fingerprint = vocab.fingerprint();
    return out;
}

}  // namespace

Checkpoint finetune_classification(const std::vector<QualitySample>& train,
                                   const std::vector<QualitySample>& valid,
                                   const Checkpoint& init, const TrainConfig& config,
                                   const Vocab& vocab, std::vector<TrainLogEntry>* log) {
    FinetuneHooks<QualitySample> hooks;
    const int max_len = config.max_len;
    hooks.build = [&vocab, max_len](const QualitySample& q, Rng&) {
        return make_quality_sample(q.hunk, q.label, vocab, max_len);
    };
    hooks.validation_score = [&](Transformer<float>& tf) {
        std::vector<int> preds, labels;
        for (const auto& q : valid) {
            TaskSample s = make_quality_sample(q.hunk, q.label, vocab, max_len);
            FCtx ctx(false);
            int enc = tf.encode(ctx, s.input_ids);
            float z = ctx.g.val(tf.cls_logit(ctx, enc)).v[0];
            preds.push_back(z > 0 ? 1 : 0);
            labels.push_back(q.label);
        }
        return classification_metrics(preds, labels).f1;
    };
    return finetune_loop(train, init, config, vocab, TaskKind::QualityCls, log, hooks,
                         /*freeze_decoder=*/true, /*has_validation=*/!valid.empty());
}

namespace {

template <typename Sample>
double mean_validation_loss(Transformer<float>& tf, const std::vector<Sample>& valid,
                            const std::function<TaskSample(const Sample&)>& build) {
    double total = 0;
    for (const auto& s : valid) {
        TaskSample ts = build(s);
        FCtx ctx(false);
        total += ctx.g.val(sample_loss_node(tf, ctx, ts)).v[0];
    }
    return total / static_cast<double>(valid.size());
}

}  // namespace

Checkpoint finetune_generation(const std::vector<CommentGenSample>& train,
                               const std::vector<CommentGenSample>& valid,
                               const Checkpoint& init, const TrainConfig& config,
                               const Vocab& vocab, std::vector<TrainLogEntry>* log) {
    FinetuneHooks<CommentGenSample> hooks;
    const int max_len = config.max_len;
    hooks.build = [&vocab, max_len](const CommentGenSample& c, Rng&) {
        return make_comment_gen_sample(c.hunk, c.target_comment, vocab, max_len);
    };
    hooks.validation_score = [&](Transformer<float>& tf) {
        return -mean_validation_loss<CommentGenSample>(
            tf, valid, [&](const CommentGenSample& c) {
                return make_comment_gen_sample(c.hunk, c.target_comment, vocab, max_len);
            });
    };
    return finetune_loop(train, init, config, vocab, TaskKind::CommentGen, log, hooks,
                         /*freeze_decoder=*/false, /*has_validation=*/!valid.empty());
}

Checkpoint finetune_refinement(const std::vector<RefinementSample>& train,
                               const std::vector<RefinementSample>& valid,
                               const Checkpoint& init, const TrainConfig& config,
                               const Vocab& vocab, std::vector<TrainLogEntry>* log) {
    FinetuneHooks<RefinementSample> hooks;
    const int max_len = config.max_len;
    hooks.build = [&vocab, max_len](const RefinementSample& r, Rng&) {
        return make_refinement_sample(r.old_code, r.comment, r.new_code, vocab, max_len);
    };
    hooks.validation_score = [&](Transformer<float>& tf) {
        return -mean_validation_loss<RefinementSample>(
            tf, valid, [&](const RefinementSample& r) {
                return make_refinement_sample(r.old_code, r.comment, r.new_code, vocab, max_len);
            });
    };
    return finetune_loop(train, init, config, vocab, TaskKind::Refinement, log, hooks,
                         /*freeze_decoder=*/false, /*has_validation=*/!valid.empty());
}

}  // namespace revkit
