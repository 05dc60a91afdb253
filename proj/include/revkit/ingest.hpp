// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "revkit/records.hpp"

namespace revkit {

struct CommitFile {
    std::string path;
    std::string unified_diff;
};

struct PrCommit {
    std::string sha;
    std::string parent_sha;
    std::vector<CommitFile> files;
};

struct PrReviewComment {
    std::string body;
    std::string author;
    std::string commit_sha;
    std::string path;
    int diff_position = 0;  // line offset into the file's diff, first hunk header = 0
    std::string created_at;
};

// A pull request as fetched from the code host, before normalization.
struct RawPullRequest {
    std::string repo;  // "owner/name"
    int pr_number = 0;
    std::vector<PrCommit> commits;
    std::vector<PrReviewComment> review_comments;
    std::string pr_author;
};

nlohmann::json raw_pr_to_json(const RawPullRequest& pr);
RawPullRequest raw_pr_from_json(const nlohmann::json& j);

struct IngestError : std::runtime_error {
    enum class Kind { AuthError, RateLimited, NotFound, Io, BadResponse };
    Kind kind;
    IngestError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct FetchOptions {
    std::string base_url = "https://api.github.com";
    int max_retries = 3;
    double max_wait_seconds = 60.0;  // cap on rate-limit sleeps
    int per_page = 100;
};

// Pages through the host's pulls / review-comments / commits endpoints and
// assembles RawPullRequests, ordered by pr_number ascending. The token comes
// from the argument or, when empty, from $CODEHOST_TOKEN.
std::vector<RawPullRequest> fetch_pull_requests(const std::string& repo,
                                                const std::string& auth_token, int max_prs,
                                                const FetchOptions& options = {});

// Loads every *.jsonl file under `dir`. Invalid lines are skipped and
// reported through `warnings` (file:line plus reason).
std::vector<RawPullRequest> load_fixtures(const std::string& dir,
                                          std::vector<std::string>* warnings = nullptr);

struct NormalizeOptions {
    // How a review comment's hunk is matched to a later revision hunk:
    // Overlap = the revision's old-side span intersects the commented hunk's
    // new-side span; Exact = the spans are identical.
    enum class RevisionMatch { Overlap, Exact };
    RevisionMatch revision_match = RevisionMatch::Overlap;
};

// Explodes one pull request into per-(commit, file, hunk) ReviewRecords.
// A hunk with several matching comments yields one record per comment.
// Unparseable diffs are skipped with a warning. Pure and deterministic.
std::vector<ReviewRecord> normalize(const RawPullRequest& raw,
                                    const NormalizeOptions& options = {},
                                    std::vector<std::string>* warnings = nullptr);

}  // namespace revkit
