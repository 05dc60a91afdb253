// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revkit/diff.hpp"

namespace revkit {

// One review comment attached to a code change.
struct Comment {
    std::string body;
    std::string author;
    std::string created_at;       // RFC 3339, as received
    std::int64_t created_at_epoch = 0;

    bool operator==(const Comment&) const = default;
};

// One code change (a single diff hunk from one commit of a pull request),
// optionally carrying a review comment and the later revision of the same
// lines. The unit every dataset builder works from.
struct ReviewRecord {
    std::string repo;        // "owner/name"
    int pr_number = 0;
    std::string commit_sha;
    DiffHunk hunk;
    std::optional<Comment> comment;
    std::string pr_author;
    std::optional<DiffHunk> later_revision;  // old side aligns with hunk's new side
    int revision_link_count = 0;

    bool operator==(const ReviewRecord&) const = default;
};

nlohmann::json hunk_to_json(const DiffHunk& hunk);
DiffHunk hunk_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const ReviewRecord& r);
ReviewRecord record_from_json(const nlohmann::json& j);

std::vector<ReviewRecord> read_records_jsonl(const std::string& path);
void write_records_jsonl(const std::string& path, const std::vector<ReviewRecord>& records);

}  // namespace revkit
