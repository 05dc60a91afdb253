// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "revkit/common.hpp"

namespace revkit {

namespace {

bool is_bot_author(const std::string& author) {
    auto ends_with = [&](std::string_view suffix) {
        return author.size() >= suffix.size() &&
               author.compare(author.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with("[bot]") || ends_with("-bot");
}

bool is_url_only(const std::string& body) {
    auto words = split_words(body);
    if (words.size() != 1) return false;
    const std::string& w = words[0];
    return w.rfind("http://", 0) == 0 || w.rfind("https://", 0) == 0;
}

double non_ascii_ratio(const std::string& body) {
    if (body.empty()) return 0.0;
    std::size_t n = 0;
    for (unsigned char c : body)
        if (c > 127) ++n;
    return static_cast<double>(n) / static_cast<double>(body.size());
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Identity of a hunk for grouping: multiple comments on the same change
// must collapse to one positive / one generation pair.
std::string hunk_key(const ReviewRecord& r) {
    std::string key = r.repo + "\x1f" + std::to_string(r.pr_number) + "\x1f" + r.commit_sha +
                      "\x1f" + r.hunk.file_path + "\x1f" + std::to_string(r.hunk.old_start) +
                      "\x1f" + std::to_string(r.hunk.new_start);
    std::uint64_t h = fnv1a64("hunk");
    for (const auto& line : r.hunk.lines) {
        h = fnv1a64(line.content, h);
        h = fnv1a64(std::string(1, tag_marker(line.tag)), h);
    }
    return key + "\x1f" + std::to_string(h);
}

}  // namespace

std::vector<ReviewRecord> clean_comments(std::vector<ReviewRecord> records,
                                         const CleanRules& rules) {
    std::set<std::pair<std::string, std::string>> seen_bodies;  // (repo, body)
    for (auto& r : records) {
        if (!r.comment) continue;
        const std::string body = trimmed(r.comment->body);
        bool drop = false;
        if (body.empty()) drop = true;
        if (!drop) {
            auto words = split_words(body);
            if (static_cast<int>(words.size()) < rules.min_words ||
                static_cast<int>(words.size()) > rules.max_words)
                drop = true;
        }
        if (!drop && is_bot_author(r.comment->author)) drop = true;
        if (!drop && is_url_only(body)) drop = true;
        if (!drop && non_ascii_ratio(r.comment->body) > rules.max_non_ascii_ratio) drop = true;
        if (!drop && !seen_bodies.insert({r.repo, r.comment->body}).second) drop = true;
        if (drop) {
            r.comment.reset();
            r.later_revision.reset();
            r.revision_link_count = 0;
        }
    }
    return records;
}

std::vector<QualitySample> build_quality_dataset(const std::vector<ReviewRecord>& records,
                                                 std::uint64_t seed) {
    // Group by hunk so one change is one sample regardless of comment count.
    std::vector<QualitySample> positives;
    std::set<std::string> seen_pos, seen_neg;
    for (const auto& r : records) {
        if (r.comment && seen_pos.insert(hunk_key(r)).second) positives.push_back({r.hunk, 1});
    }
    // A hunk can surface both with and without a comment (comment cleaning
    // strips one copy); commented wins.
    std::vector<QualitySample> negatives;
    for (const auto& r : records) {
        if (r.comment) continue;
        std::string key = hunk_key(r);
        if (!seen_pos.count(key) && seen_neg.insert(key).second) negatives.push_back({r.hunk, 0});
    }
    if (positives.empty())
        throw CorpusError(CorpusError::Kind::NoPositives, "no commented changes in input");

    Rng rng(mix64(seed, fnv1a64("quality")));
    rng.shuffle(negatives);
    if (negatives.size() > positives.size()) negatives.resize(positives.size());

    std::vector<QualitySample> out;
    out.reserve(positives.size() + negatives.size());
    out.insert(out.end(), positives.begin(), positives.end());
    out.insert(out.end(), negatives.begin(), negatives.end());
    rng.shuffle(out);
    return out;
}

std::vector<CommentGenSample> build_comment_dataset(const std::vector<ReviewRecord>& records) {
    struct Best {
        std::int64_t at;
        std::string body;
        DiffHunk hunk;
    };
    std::map<std::string, Best> best;  // hunk key -> earliest comment
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (!r.comment) continue;
        if (r.comment->author == r.pr_author) continue;  // self review
        std::string key = hunk_key(r);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, Best{r.comment->created_at_epoch, r.comment->body, r.hunk});
            order.push_back(key);
        } else if (r.comment->created_at_epoch < it->second.at ||
                   (r.comment->created_at_epoch == it->second.at &&
                    r.comment->body < it->second.body)) {
            it->second = {r.comment->created_at_epoch, r.comment->body, r.hunk};
        }
    }
    std::vector<CommentGenSample> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        auto& b = best.at(key);
        out.push_back({std::move(b.hunk), std::move(b.body)});
    }
    return out;
}

std::vector<RefinementSample> build_refinement_dataset(const std::vector<ReviewRecord>& records) {
    std::vector<RefinementSample> out;
    for (const auto& r : records) {
        if (!r.comment || !r.later_revision) continue;
        if (r.revision_link_count != 1) continue;  // only clean 1:1 pairings
        CodePair pair = reconstruct(*r.later_revision);
        if (pair.old_lines == pair.new_lines) continue;
        out.push_back({std::move(pair.old_lines), r.comment->body, std::move(pair.new_lines)});
    }
    return out;
}

SplitResult split_by_project(const std::vector<ReviewRecord>& records, const SplitConfig& config) {
    for (const auto& p : config.train_projects)
        if (config.eval_projects.count(p))
            throw CorpusError(CorpusError::Kind::EmptySplit,
                              "project in both train and eval lists: " + p);

    SplitResult result;
    std::set<std::string> warned;
    for (const auto& r : records) {
        if (config.train_projects.count(r.repo)) {
            result.train.push_back(r);
        } else if (config.eval_projects.count(r.repo)) {
            double u = static_cast<double>(mix64(config.seed, fnv1a64(r.repo))) /
                       18446744073709551616.0;  // 2^64
            (u < config.valid_fraction ? result.valid : result.test).push_back(r);
        } else if (warned.insert(r.repo).second) {
            result.warnings.push_back("repo in no split, dropped: " + r.repo);
        }
    }
    if (result.train.empty() || result.valid.empty() || result.test.empty())
        throw CorpusError(CorpusError::Kind::EmptySplit,
                          "split produced an empty partition (train " +
                              std::to_string(result.train.size()) + ", valid " +
                              std::to_string(result.valid.size()) + ", test " +
                              std::to_string(result.test.size()) + ")");
    return result;
}

std::vector<PretrainExample> build_pretrain_dataset(const std::vector<ReviewRecord>& records) {
    std::vector<PretrainExample> out;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(hunk_key(r)).second) continue;
        out.push_back({r.hunk, r.comment ? r.comment->body : std::string()});
    }
    return out;
}

nlohmann::json quality_sample_to_json(const QualitySample& s) {
    return nlohmann::json{{"hunk", hunk_to_json(s.hunk)}, {"label", s.label}};
}

QualitySample quality_sample_from_json(const nlohmann::json& j) {
    return {hunk_from_json(j.at("hunk")), j.at("label").get<int>()};
}

nlohmann::json comment_sample_to_json(const CommentGenSample& s) {
    return nlohmann::json{{"hunk", hunk_to_json(s.hunk)}, {"comment", s.target_comment}};
}

CommentGenSample comment_sample_from_json(const nlohmann::json& j) {
    return {hunk_from_json(j.at("hunk")), j.at("comment").get<std::string>()};
}

nlohmann::json refinement_sample_to_json(const RefinementSample& s) {
    return nlohmann::json{
        {"old_code", s.old_code}, {"comment", s.comment}, {"new_code", s.new_code}};
}

RefinementSample refinement_sample_from_json(const nlohmann::json& j) {
    return {j.at("old_code").get<std::vector<std::string>>(),
            j.at("comment").get<std::string>(),
            j.at("new_code").get<std::vector<std::string>>()};
}

nlohmann::json pretrain_example_to_json(const PretrainExample& s) {
    return nlohmann::json{{"hunk", hunk_to_json(s.hunk)}, {"comment", s.comment}};
}

PretrainExample pretrain_example_from_json(const nlohmann::json& j) {
    return {hunk_from_json(j.at("hunk")), j.value("comment", std::string())};
}

}  // namespace revkit
