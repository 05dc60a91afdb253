// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "revkit/common.hpp"
#include "revkit/diff.hpp"
#include "revkit/tokenizer.hpp"

namespace revkit {

enum class TaskKind { Dtp, Dcd, Drc, Rcg, QualityCls, CommentGen, Refinement };

std::string task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);

struct ObjectiveError : std::runtime_error {
    enum class Kind { CommentAloneTooLong, ShapeMismatch };
    Kind kind;
    ObjectiveError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Index into input_ids plus the true class of the masked tag there.
// Labels follow LineTag order: 0 = Keep, 1 = Add, 2 = Del.
struct TagPosition {
    int index;
    int label;

    bool operator==(const TagPosition&) const = default;
};

struct TaskSample {
    TaskKind kind;
    std::vector<int> input_ids;
    std::vector<int> target_ids;               // empty for classification
    std::optional<int> cls_label;
    std::vector<TagPosition> tag_positions;    // DTP only

    bool operator==(const TaskSample&) const = default;
};

nlohmann::json task_sample_to_json(const TaskSample& s);
TaskSample task_sample_from_json(const nlohmann::json& j);

int tag_token_id(LineTag tag);   // KEEP/ADD/DEL special ids
int tag_class(LineTag tag);      // 0/1/2 per TagPosition labels

// [CLS], then per line: tag token, the line's BPE ids, a newline byte
// token. Truncated at max_len keeping the head.
std::vector<int> encode_hunk(const DiffHunk& hunk, const Vocab& vocab, int max_len);

// [CLS] + code ids + [MSG] + comment ids. Code is truncated first so the
// comment always arrives whole; a comment that cannot fit even alone is an
// error.
std::vector<int> encode_code_and_comment(const std::vector<std::string>& code_lines,
                                         std::string_view comment, const Vocab& vocab,
                                         int max_len);

// Tag prediction: every tag token masked, true classes recorded.
TaskSample make_dtp(const DiffHunk& hunk, const Vocab& vocab, int max_len);

struct LineCorruptionConfig {
    double rate = 0.15;
};

// Line denoising: a seeded max(1, round(rate * lines)) subset of lines has
// its content replaced by one sentinel each (tags stay); the target spells
// the masked lines back out, sentinel-delimited, ending in EOS.
TaskSample make_dcd(const DiffHunk& hunk, const Vocab& vocab, int max_len, Rng& rng,
                    const LineCorruptionConfig& config = {});

struct SpanCorruptionConfig {
    double rate = 0.20;
    int min_span = 1;
    int max_span = 5;
};

// Span denoising over a comment: exactly ceil(rate * tokens) tokens are
// covered by non-overlapping spans, each replaced by one sentinel.
TaskSample make_drc(std::string_view comment, const Vocab& vocab, int max_len, Rng& rng,
                    const SpanCorruptionConfig& config = {});

// Comment generation from a diff: deterministic, no masking.
TaskSample make_rcg(const DiffHunk& hunk, std::string_view comment, const Vocab& vocab,
                    int max_len);

// Fine-tuning inputs reuse the same encodings.
TaskSample make_quality_sample(const DiffHunk& hunk, int label, const Vocab& vocab, int max_len);
TaskSample make_comment_gen_sample(const DiffHunk& hunk, std::string_view comment,
                                   const Vocab& vocab, int max_len);
TaskSample make_refinement_sample(const std::vector<std::string>& old_code,
                                  std::string_view comment,
                                  const std::vector<std::string>& new_code, const Vocab& vocab,
                                  int max_len);

// Mean 3-way cross-entropy over tag positions. logits holds 3 scores per
// position, row-major.
double dtp_loss(const std::vector<double>& logits, const std::vector<int>& labels);

// Mean token negative log-likelihood under teacher forcing. step_logits
// holds vocab_size scores per target step, row-major.
double seq_nll_loss(const std::vector<double>& step_logits, int vocab_size,
                    const std::vector<int>& target_ids);

}  // namespace revkit
