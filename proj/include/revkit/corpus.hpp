// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "revkit/records.hpp"

namespace revkit {

struct QualitySample {
    DiffHunk hunk;
    int label = 0;  // 1 = attracted a review comment, 0 = clean

    bool operator==(const QualitySample&) const = default;
};

struct CommentGenSample {
    DiffHunk hunk;
    std::string target_comment;

    bool operator==(const CommentGenSample&) const = default;
};

struct RefinementSample {
    std::vector<std::string> old_code;  // the commented version
    std::string comment;
    std::vector<std::string> new_code;  // the revised version

    bool operator==(const RefinementSample&) const = default;
};

struct CorpusError : std::runtime_error {
    enum class Kind { NoPositives, EmptySplit };
    Kind kind;
    CorpusError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Comment filtering thresholds. Kept configurable so the cleaning pass can
// be tightened or relaxed per run; the manifest records the values used.
struct CleanRules {
    int min_words = 3;
    int max_words = 200;
    double max_non_ascii_ratio = 0.5;
    int version = 1;
};

// Drops low-value comments (too short/long, bot authors, URL-only bodies,
// mostly non-ASCII, duplicate bodies within a repo). Records stay; a record
// whose comment is dropped becomes an uncommented record.
std::vector<ReviewRecord> clean_comments(std::vector<ReviewRecord> records,
                                         const CleanRules& rules = {});

// Balanced binary dataset: every distinct commented hunk is a positive;
// uncommented hunks are down-sampled (never up-sampled) to match, then the
// whole set is shuffled. Throws CorpusError{NoPositives} without positives.
std::vector<QualitySample> build_quality_dataset(const std::vector<ReviewRecord>& records,
                                                 std::uint64_t seed);

// One (hunk, comment) pair per commented hunk: self-reviews by the change
// author are dropped, then the earliest comment wins (ties by smaller body).
std::vector<CommentGenSample> build_comment_dataset(const std::vector<ReviewRecord>& records);

// (old code, comment, new code) triplets from records whose comment and
// later revision pair up exactly 1:1, skipping no-op revisions.
std::vector<RefinementSample> build_refinement_dataset(const std::vector<ReviewRecord>& records);

struct SplitConfig {
    std::set<std::string> train_projects;
    std::set<std::string> eval_projects;
    double valid_fraction = 0.5;
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<ReviewRecord> train, valid, test;
    std::vector<std::string> warnings;  // repos routed nowhere
};

// Routes records by repository so no project spans two splits; eval projects
// land wholly in valid or test by seeded hash. Throws CorpusError{EmptySplit}
// when any of the three comes out empty.
SplitResult split_by_project(const std::vector<ReviewRecord>& records, const SplitConfig& config);

// The pre-training pool: hunks plus (hunk, comment) pairs.
struct PretrainExample {
    DiffHunk hunk;
    std::string comment;  // empty when the change had none
};
std::vector<PretrainExample> build_pretrain_dataset(const std::vector<ReviewRecord>& records);

// JSONL serialization for the dataset files.
nlohmann::json quality_sample_to_json(const QualitySample& s);
QualitySample quality_sample_from_json(const nlohmann::json& j);
nlohmann::json comment_sample_to_json(const CommentGenSample& s);
CommentGenSample comment_sample_from_json(const nlohmann::json& j);
nlohmann::json refinement_sample_to_json(const RefinementSample& s);
RefinementSample refinement_sample_from_json(const nlohmann::json& j);
nlohmann::json pretrain_example_to_json(const PretrainExample& s);
PretrainExample pretrain_example_from_json(const nlohmann::json& j);

}  // namespace revkit
