// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "revkit/corpus.hpp"
#include "revkit/model.hpp"
#include "revkit/objectives.hpp"
#include "revkit/tokenizer.hpp"

namespace revkit {

struct TrainerError : std::runtime_error {
    enum class Kind { EmptyCorpus, EmptyDataset, BadConfig };
    Kind kind;
    TrainerError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct TrainConfig {
    double lr = 3e-3;
    int batch_size = 8;
    int warmup_steps = 0;
    int total_steps = 100;
    std::uint64_t seed = 0;
    std::map<TaskKind, double> task_mix;  // empty = equal weights over the four
    double grad_clip_norm = 1.0;
    int eval_every = 50;

    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_len = 512;

    void validate() const {
        if (total_steps < 0 || warmup_steps < 0 || warmup_steps > total_steps)
            throw TrainerError(TrainerError::Kind::BadConfig,
                               "need 0 <= warmup_steps <= total_steps");
        if (lr <= 0 || batch_size < 1 || eval_every < 1)
            throw TrainerError(TrainerError::Kind::BadConfig, "bad lr/batch/eval settings");
        double sum = 0;
        for (const auto& [k, w] : task_mix) {
            if (w < 0)
                throw TrainerError(TrainerError::Kind::BadConfig, "negative task weight");
            sum += w;
        }
        if (!task_mix.empty() && sum <= 0)
            throw TrainerError(TrainerError::Kind::BadConfig, "task weights sum to zero");
    }
};

// Linear ramp 0 -> lr over warmup_steps, then linear decay to 0 at
// total_steps. step is 1-based.
double lr_schedule(std::int64_t step, const TrainConfig& config);

// Scales the gradient tensors so their global L2 norm is at most max_norm;
// returns the pre-clip norm.
double clip_gradients(ModelParams<float>& grads, double max_norm);

struct TrainLogEntry {
    std::int64_t step = 0;
    TaskKind task = TaskKind::Dtp;
    double loss = 0;
    double lr = 0;
};

void append_train_log(const std::string& path, const std::vector<TrainLogEntry>& entries);

// Pre-training pool, extracted from corpus records.
struct PretrainData {
    std::vector<DiffHunk> hunks;                              // every change
    std::vector<std::pair<DiffHunk, std::string>> commented;  // with review text

    static PretrainData from_examples(const std::vector<PretrainExample>& examples);
};

// Joint pre-training over the four objectives; each batch draws one task by
// normalized task_mix weight. Deterministic for fixed (data, seed, config):
// every random decision is keyed by (seed, step, slot), so a run resumed
// from a checkpoint replays exactly.
Checkpoint pretrain(const PretrainData& data, const Checkpoint& init, const TrainConfig& config,
                    const Vocab& vocab, std::vector<TrainLogEntry>* log = nullptr,
                    const std::string& checkpoint_dir = "");

// Encoder-only fine-tuning: decoder tensors are frozen (bit-identical in
// the result); the returned checkpoint is the one with the best validation
// F1 (the final one when valid is empty).
Checkpoint finetune_classification(const std::vector<QualitySample>& train,
                                   const std::vector<QualitySample>& valid,
                                   const Checkpoint& init, const TrainConfig& config,
                                   const Vocab& vocab,
                                   std::vector<TrainLogEntry>* log = nullptr);

// Full encoder-decoder fine-tuning on token NLL; best checkpoint by
// validation loss. task selects the input/target encoding.
Checkpoint finetune_generation(const std::vector<CommentGenSample>& train,
                               const std::vector<CommentGenSample>& valid,
                               const Checkpoint& init, const TrainConfig& config,
                               const Vocab& vocab, std::vector<TrainLogEntry>* log = nullptr);

Checkpoint finetune_refinement(const std::vector<RefinementSample>& train,
                               const std::vector<RefinementSample>& valid,
                               const Checkpoint& init, const TrainConfig& config,
                               const Vocab& vocab, std::vector<TrainLogEntry>* log = nullptr);

}  // namespace revkit
