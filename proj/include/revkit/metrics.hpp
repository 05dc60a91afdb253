// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "revkit/corpus.hpp"

namespace revkit {

struct MetricsError : std::runtime_error {
    enum class Kind { LengthMismatch, Empty };
    Kind kind;
    MetricsError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct ClassificationMetrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Standard binary metrics with 1 as the positive class. Precision/recall are
// 0 when their denominator is 0; F1 is 0 when precision + recall is 0.
ClassificationMetrics classification_metrics(const std::vector<int>& preds,
                                             const std::vector<int>& labels);

// Corpus-level BLEU-4 in [0, 100]: geometric mean of clipped n-gram
// precisions (n = 1..4) times the brevity penalty, with add-one smoothing
// when a higher-order match count is zero. Token type is caller's choice
// (whitespace words for comments, BPE ids for code).
template <typename Token>
double bleu4(const std::vector<std::vector<Token>>& candidates,
             const std::vector<std::vector<Token>>& references);

// Fraction equal after normalization (strip trailing whitespace per line,
// drop trailing blank lines).
double exact_match(const std::vector<std::string>& candidates,
                   const std::vector<std::string>& references);

std::string normalize_for_exact_match(const std::string& text);

// The copy baseline: each prediction is the sample's old code, verbatim.
std::vector<std::string> naive_copy(const std::vector<RefinementSample>& samples);

// Lowercase + whitespace split, the comment-side BLEU tokenization.
std::vector<std::string> tokenize_comment(const std::string& text);

struct EvalReport {
    std::string task;
    std::map<std::string, double> metrics;
    int n_samples = 0;
    std::uint64_t config_fingerprint = 0;
    std::string notes;  // e.g. "corpus-level BLEU"

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
};

// Blank human-annotation sheet (information/relevance columns left empty).
void write_annotation_sheet_csv(const std::string& path,
                                const std::vector<std::string>& inputs,
                                const std::vector<std::string>& references,
                                const std::vector<std::string>& candidates);

// ---- implementation of the templated BLEU ----

namespace detail {

template <typename Token>
std::map<std::vector<Token>, std::int64_t> ngram_counts(const std::vector<Token>& tokens, int n) {
    std::map<std::vector<Token>, std::int64_t> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        counts[std::vector<Token>(tokens.begin() + i, tokens.begin() + i + n)]++;
    return counts;
}

}  // namespace detail

template <typename Token>
double bleu4(const std::vector<std::vector<Token>>& candidates,
             const std::vector<std::vector<Token>>& references) {
    if (candidates.size() != references.size())
        throw MetricsError(MetricsError::Kind::LengthMismatch,
                           "candidate/reference counts differ");
    if (candidates.empty())
        throw MetricsError(MetricsError::Kind::Empty, "nothing to score");

    std::int64_t cand_len = 0, ref_len = 0;
    std::int64_t matches[4] = {0, 0, 0, 0};
    std::int64_t totals[4] = {0, 0, 0, 0};
    for (std::size_t s = 0; s < candidates.size(); ++s) {
        cand_len += static_cast<std::int64_t>(candidates[s].size());
        ref_len += static_cast<std::int64_t>(references[s].size());
        for (int n = 1; n <= 4; ++n) {
            auto cand = detail::ngram_counts(candidates[s], n);
            auto ref = detail::ngram_counts(references[s], n);
            for (const auto& [gram, count] : cand) {
                totals[n - 1] += count;
                auto it = ref.find(gram);
                if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
            }
        }
    }
    if (cand_len == 0) return 0.0;

    double log_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        std::int64_t m = matches[n - 1], t = totals[n - 1];
        if (n >= 2 && m == 0) {
            m = 1;
            t += 1;
        }
        if (m == 0 || t == 0) return 0.0;  // unigram miss: nothing overlaps at all
        log_sum += std::log(static_cast<double>(m) / static_cast<double>(t));
    }
    double geo = std::exp(log_sum / 4.0);
    double bp = cand_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return 100.0 * geo * bp;
}

}  // namespace revkit
