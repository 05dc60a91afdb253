// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include <httplib.h>

#include "revkit/common.hpp"
#include "revkit/diff.hpp"

namespace revkit {

nlohmann::json raw_pr_to_json(const RawPullRequest& pr) {
    nlohmann::json commits = nlohmann::json::array();
    for (const auto& c : pr.commits) {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : c.files)
            files.push_back({{"path", f.path}, {"unified_diff", f.unified_diff}});
        commits.push_back(
            {{"sha", c.sha}, {"parent_sha", c.parent_sha}, {"files", std::move(files)}});
    }
    nlohmann::json comments = nlohmann::json::array();
    for (const auto& rc : pr.review_comments) {
        comments.push_back({{"body", rc.body},
                            {"author", rc.author},
                            {"commit_sha", rc.commit_sha},
                            {"path", rc.path},
                            {"diff_position", rc.diff_position},
                            {"created_at", rc.created_at}});
    }
    return nlohmann::json{{"repo", pr.repo},
                          {"pr_number", pr.pr_number},
                          {"commits", std::move(commits)},
                          {"review_comments", std::move(comments)},
                          {"pr_author", pr.pr_author}};
}

RawPullRequest raw_pr_from_json(const nlohmann::json& j) {
    RawPullRequest pr;
    pr.repo = j.at("repo").get<std::string>();
    pr.pr_number = j.at("pr_number").get<int>();
    pr.pr_author = j.at("pr_author").get<std::string>();
    for (const auto& c : j.at("commits")) {
        PrCommit commit;
        commit.sha = c.at("sha").get<std::string>();
        commit.parent_sha = c.value("parent_sha", std::string());
        for (const auto& f : c.at("files"))
            commit.files.push_back({f.at("path").get<std::string>(),
                                    f.at("unified_diff").get<std::string>()});
        pr.commits.push_back(std::move(commit));
    }
    for (const auto& rc : j.at("review_comments")) {
        PrReviewComment comment;
        comment.body = rc.at("body").get<std::string>();
        comment.author = rc.at("author").get<std::string>();
        comment.commit_sha = rc.at("commit_sha").get<std::string>();
        comment.path = rc.at("path").get<std::string>();
        comment.diff_position = rc.at("diff_position").get<int>();
        comment.created_at = rc.at("created_at").get<std::string>();
        if (comment.diff_position < 0)
            throw IngestError(IngestError::Kind::BadResponse, "negative diff_position");
        parse_rfc3339(comment.created_at);  // must be a timestamp
        pr.review_comments.push_back(std::move(comment));
    }
    return pr;
}

namespace {

struct HostClient {
    explicit HostClient(const FetchOptions& options, std::string token)
        : options_(options), token_(std::move(token)) {
        std::string url = options.base_url;
        if (url.rfind("http://", 0) == 0) {
            url = url.substr(7);
        } else if (url.rfind("https://", 0) == 0) {
            throw IngestError(IngestError::Kind::Io,
                              "this build speaks plain http; use an http:// base url "
                              "(e.g. a local TLS-terminating proxy)");
        }
        std::string host = url;
        int port = 80;
        if (auto colon = url.find(':'); colon != std::string::npos) {
            host = url.substr(0, colon);
            port = std::stoi(url.substr(colon + 1));
        }
        client_ = std::make_unique<httplib::Client>(host, port);
        client_->set_read_timeout(30, 0);
    }

    nlohmann::json get_json(const std::string& path) {
        httplib::Headers headers = {{"Accept", "application/vnd.github.v3+json"},
                                    {"User-Agent", "revkit/" + std::string(kToolVersion)}};
        if (!token_.empty()) headers.emplace("Authorization", "token " + token_);

        for (int attempt = 0;; ++attempt) {
            auto res = client_->Get(path, headers);
            if (!res)
                throw IngestError(IngestError::Kind::Io, "no response from host for " + path);
            if (res->status == 200) return nlohmann::json::parse(res->body);
            if (res->status == 401)
                throw IngestError(IngestError::Kind::AuthError, "authentication failed");
            if (res->status == 404)
                throw IngestError(IngestError::Kind::NotFound, "not found: " + path);
            if (res->status == 403 || res->status == 429) {
                if (attempt >= options_.max_retries)
                    throw IngestError(IngestError::Kind::RateLimited,
                                      "rate limited after " + std::to_string(attempt) + " retries");
                wait_for_reset(*res);
                continue;
            }
            throw IngestError(IngestError::Kind::BadResponse,
                              "unexpected status " + std::to_string(res->status) + " for " + path);
        }
    }

private:
    void wait_for_reset(const httplib::Response& res) {
        double wait = 1.0;
        if (res.has_header("Retry-After")) {
            wait = std::stod(res.get_header_value("Retry-After"));
        } else if (res.has_header("X-RateLimit-Reset")) {
            auto reset = static_cast<std::int64_t>(
                std::stoll(res.get_header_value("X-RateLimit-Reset")));
            auto now = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
            wait = std::max<double>(0.0, static_cast<double>(reset - now));
        }
        wait = std::min(wait, options_.max_wait_seconds);
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(wait * 1000)));
    }

    FetchOptions options_;
    std::string token_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::vector<RawPullRequest> fetch_pull_requests(const std::string& repo,
                                                const std::string& auth_token, int max_prs,
                                                const FetchOptions& options) {
    std::string token = auth_token;
    if (token.empty()) {
        if (const char* env = std::getenv("CODEHOST_TOKEN")) token = env;
    }
    std::vector<RawPullRequest> out;
    if (max_prs <= 0) return out;

    HostClient client(options, token);
    std::string base = "/repos/" + repo;

    for (int page = 1; static_cast<int>(out.size()) < max_prs; ++page) {
        nlohmann::json pulls = client.get_json(base + "/pulls?state=all&per_page=" +
                                               std::to_string(options.per_page) +
                                               "&page=" + std::to_string(page));
        if (!pulls.is_array() || pulls.empty()) break;
        for (const auto& pull : pulls) {
            if (static_cast<int>(out.size()) >= max_prs) break;
            RawPullRequest pr;
            pr.repo = repo;
            pr.pr_number = pull.at("number").get<int>();
            pr.pr_author = pull.at("user").at("login").get<std::string>();

            std::string prefix = base + "/pulls/" + std::to_string(pr.pr_number);
            nlohmann::json commits = client.get_json(prefix + "/commits");
            for (const auto& c : commits) {
                PrCommit commit;
                commit.sha = c.at("sha").get<std::string>();
                if (c.contains("parents") && !c["parents"].empty())
                    commit.parent_sha = c["parents"][0].at("sha").get<std::string>();
                nlohmann::json detail = client.get_json(base + "/commits/" + commit.sha);
                for (const auto& f : detail.value("files", nlohmann::json::array())) {
                    if (!f.contains("patch")) continue;  // binary or oversized
                    commit.files.push_back({f.at("filename").get<std::string>(),
                                            f.at("patch").get<std::string>()});
                }
                pr.commits.push_back(std::move(commit));
            }
            nlohmann::json comments = client.get_json(prefix + "/comments");
            for (const auto& rc : comments) {
                PrReviewComment comment;
                comment.body = rc.at("body").get<std::string>();
                comment.author = rc.at("user").at("login").get<std::string>();
                comment.commit_sha = rc.value("original_commit_id", rc.value("commit_id", ""));
                comment.path = rc.at("path").get<std::string>();
                nlohmann::json pos = rc.value("original_position", nlohmann::json());
                if (pos.is_null()) pos = rc.value("position", nlohmann::json());
                if (pos.is_null()) continue;  // outdated comment, no anchor left
                comment.diff_position = pos.get<int>();
                comment.created_at = rc.at("created_at").get<std::string>();
                pr.review_comments.push_back(std::move(comment));
            }
            out.push_back(std::move(pr));
        }
        if (static_cast<int>(pulls.size()) < options.per_page) break;
    }
    std::sort(out.begin(), out.end(), [](const RawPullRequest& a, const RawPullRequest& b) {
        return a.pr_number < b.pr_number;
    });
    return out;
}

std::vector<RawPullRequest> load_fixtures(const std::string& dir,
                                          std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir) || !fs::is_directory(dir))
        throw IngestError(IngestError::Kind::Io, "not a directory: " + dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<RawPullRequest> out;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IngestError(IngestError::Kind::Io, "cannot read " + path.string());
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                out.push_back(raw_pr_from_json(nlohmann::json::parse(line)));
            } catch (const std::exception& e) {
                if (warnings)
                    warnings->push_back(path.filename().string() + ":" +
                                        std::to_string(line_no) + ": skipped: " + e.what());
            }
        }
    }
    return out;
}

namespace {

struct ParsedFileDiff {
    std::vector<DiffHunk> hunks;
    std::vector<HunkTextSpan> spans;
    int first_header_line = 0;
};

// A comment's diff_position counts lines from the first hunk header of the
// file's diff (the header itself is position 0), so a position belongs to a
// hunk when it lands on one of its body lines.
bool position_in_hunk(const ParsedFileDiff& diff, std::size_t hunk_idx, int position) {
    const HunkTextSpan& span = diff.spans[hunk_idx];
    int start = span.header_line_index - diff.first_header_line;
    return position > start && position <= start + span.body_lines;
}

struct LineSpan {
    int start, count;
};

bool spans_match(LineSpan revision_old, LineSpan commented_new,
                 NormalizeOptions::RevisionMatch mode) {
    if (mode == NormalizeOptions::RevisionMatch::Exact)
        return revision_old.start == commented_new.start &&
               revision_old.count == commented_new.count;
    int a_end = revision_old.start + std::max(revision_old.count, 1);
    int b_end = commented_new.start + std::max(commented_new.count, 1);
    return revision_old.start < b_end && commented_new.start < a_end;
}

}  // namespace

std::vector<ReviewRecord> normalize(const RawPullRequest& raw, const NormalizeOptions& options,
                                    std::vector<std::string>* warnings) {
    struct FileKey {
        std::size_t commit_index;
        std::string path;
    };
    std::vector<std::pair<FileKey, ParsedFileDiff>> parsed;
    for (std::size_t ci = 0; ci < raw.commits.size(); ++ci) {
        for (const auto& file : raw.commits[ci].files) {
            ParsedFileDiff diff;
            try {
                diff.hunks = parse_unified_diff(repair_utf8(file.unified_diff), &diff.spans);
            } catch (const DiffError& e) {
                if (warnings)
                    warnings->push_back(raw.repo + "#" + std::to_string(raw.pr_number) + " " +
                                        raw.commits[ci].sha + " " + file.path +
                                        ": skipped: " + e.what());
                continue;
            }
            if (diff.hunks.empty()) continue;
            diff.first_header_line = diff.spans.front().header_line_index;
            for (auto& h : diff.hunks) h.file_path = file.path;
            parsed.emplace_back(FileKey{ci, file.path}, std::move(diff));
        }
    }

    struct HunkRef {
        std::size_t parsed_index;
        std::size_t hunk_index;
        bool operator==(const HunkRef&) const = default;
    };
    auto hunk_at = [&](const HunkRef& ref) -> const DiffHunk& {
        return parsed[ref.parsed_index].second.hunks[ref.hunk_index];
    };

    struct Attachment {
        const PrReviewComment* comment;
        HunkRef ref;
    };
    std::vector<Attachment> attachments;
    for (const auto& rc : raw.review_comments) {
        for (std::size_t pi = 0; pi < parsed.size(); ++pi) {
            const auto& [key, diff] = parsed[pi];
            if (raw.commits[key.commit_index].sha != rc.commit_sha || key.path != rc.path)
                continue;
            for (std::size_t hi = 0; hi < diff.hunks.size(); ++hi)
                if (position_in_hunk(diff, hi, rc.diff_position))
                    attachments.push_back({&rc, {pi, hi}});
        }
    }

    // Links between commented hunks and later revision hunks on the same
    // path whose old side lines up with the commented hunk's new side.
    struct RevisionLink {
        HunkRef commented;
        HunkRef revision;
    };
    std::vector<RevisionLink> links;
    std::vector<HunkRef> commented_hunks;
    for (const auto& att : attachments)
        if (std::find(commented_hunks.begin(), commented_hunks.end(), att.ref) ==
            commented_hunks.end())
            commented_hunks.push_back(att.ref);
    for (const HunkRef& cref : commented_hunks) {
        const FileKey& ckey = parsed[cref.parsed_index].first;
        const DiffHunk& chunk = hunk_at(cref);
        for (std::size_t pi = 0; pi < parsed.size(); ++pi) {
            const FileKey& key = parsed[pi].first;
            if (key.commit_index <= ckey.commit_index || key.path != ckey.path) continue;
            for (std::size_t hi = 0; hi < parsed[pi].second.hunks.size(); ++hi) {
                const DiffHunk& rev = parsed[pi].second.hunks[hi];
                if (spans_match({rev.old_start, rev.old_count},
                                {chunk.new_start, chunk.new_count}, options.revision_match))
                    links.push_back({cref, {pi, hi}});
            }
        }
    }
    auto revisions_of = [&](const HunkRef& r) {
        std::vector<HunkRef> out;
        for (const auto& l : links)
            if (l.commented == r) out.push_back(l.revision);
        return out;
    };
    auto commenters_of = [&](const HunkRef& rev) {
        int n = 0;
        for (const auto& l : links)
            if (l.revision == rev) ++n;
        return n;
    };
    auto comments_on = [&](const HunkRef& r) {
        int n = 0;
        for (const auto& att : attachments)
            if (att.ref == r) ++n;
        return n;
    };

    std::vector<ReviewRecord> records;
    for (std::size_t pi = 0; pi < parsed.size(); ++pi) {
        const auto& [key, diff] = parsed[pi];
        for (std::size_t hi = 0; hi < diff.hunks.size(); ++hi) {
            HunkRef ref{pi, hi};
            ReviewRecord base;
            base.repo = raw.repo;
            base.pr_number = raw.pr_number;
            base.commit_sha = raw.commits[key.commit_index].sha;
            base.hunk = diff.hunks[hi];
            base.pr_author = repair_utf8(raw.pr_author);

            std::vector<const PrReviewComment*> here;
            for (const auto& att : attachments)
                if (att.ref == ref) here.push_back(att.comment);

            if (here.empty()) {
                records.push_back(std::move(base));
                continue;
            }

            // Earliest matching revision, plus the degree of the pairing:
            // how many revisions this comment reaches and how many comments
            // reach that revision. Anything but 1:1 disqualifies the record
            // from refinement triplets downstream.
            auto revs = revisions_of(ref);
            std::optional<DiffHunk> revision;
            int link_count = 0;
            if (!revs.empty()) {
                revision = hunk_at(revs.front());
                int comments_here = comments_on(ref);
                int comments_to_revision = commenters_of(revs.front()) * comments_here;
                link_count = std::max(static_cast<int>(revs.size()), comments_to_revision);
            }

            for (const PrReviewComment* rc : here) {
                ReviewRecord r = base;
                Comment c;
                c.body = repair_utf8(rc->body);
                c.author = repair_utf8(rc->author);
                c.created_at = rc->created_at;
                c.created_at_epoch = parse_rfc3339(rc->created_at);
                r.comment = std::move(c);
                r.later_revision = revision;
                r.revision_link_count = revision ? link_count : 0;
                records.push_back(std::move(r));
            }
        }
    }
    return records;
}

}  // namespace revkit
