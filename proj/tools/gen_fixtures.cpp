// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Generates the offline pull-request fixture set under fixtures/: a few
// synthetic repositories with commits, unified diffs, review comments and
// follow-up revisions. Deterministic for a fixed seed so the committed
// files can be regenerated byte-for-byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/diff.hpp"
#include "revkit/ingest.hpp"

using namespace revkit;

namespace {

struct Language {
    const char* extension;
    std::vector<const char*> templates;
};

const std::vector<Language>& languages() {
    static const std::vector<Language> langs = {
        {"py",
         {"def process_%(arg):", "    result = %arg * 2", "    if result > %num:",
          "        return result", "    return %num", "", "class Handler%(num):",
          "    def __init__(self, %arg):", "        self.%arg = %arg",
          "    def run(self):", "        return self.%arg", "import os", "import json",
          "logger = get_logger(__name__)", "VALUE_%num = %num"}},
        {"java",
         {"public int get%(num)() {", "    return %arg + %num;", "}",
          "private final String %arg;", "public void set(%arg) {", "    this.%arg = %arg;",
          "", "static final int LIMIT_%num = %num;", "if (%arg == null) {",
          "    throw new IllegalArgumentException(\"%arg\");", "}"}},
        {"go",
         {"func handle%(num)(w http.ResponseWriter) {", "\tif err != nil {",
          "\t\treturn err", "\t}", "}", "var %arg = %num", "type %(arg) struct {",
          "\tcount int", "", "const max%(num) = %num"}},
        {"js",
         {"function compute%(num)(%arg) {", "  const total = %arg + %num;",
          "  return total;", "}", "const %arg = require('./%arg');",
          "export default %(arg);", "let cache%num = new Map();", ""}},
    };
    return langs;
}

const std::vector<std::string>& review_phrases() {
    static const std::vector<std::string> phrases = {
        "This method should be private",
        "Please add a null check before dereferencing",
        "Consider renaming this variable for clarity",
        "Use a constant instead of the magic number",
        "This loop can be replaced with a map call",
        "Missing error handling for the failure path",
        "Please add a unit test covering this branch",
        "The log message should include the request id",
        "This allocation happens on every call, hoist it",
        "Typo in the identifier name here",
        "Shouldn't this comparison be strict equality",
        "Consider extracting this block into a helper",
        "The timeout value looks too aggressive",
        "Please document the units of this parameter",
        "This cast can overflow on large inputs",
        "Dead code, the branch above already returns",
        "Prefer early return to reduce nesting",
        "The lock is held across the IO call, release it first",
        "Off by one in the boundary condition",
        "This should use the shared configuration value",
    };
    return phrases;
}

std::string fill(std::string t, Rng& rng) {
    static const char* args[] = {"data", "value", "item", "config", "result", "count"};
    auto replace_all = [&](const std::string& from, const std::string& to) {
        std::size_t pos = 0;
        while ((pos = t.find(from, pos)) != std::string::npos) {
            t.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    std::string arg = args[rng.uniform(6)];
    std::string cap = arg;
    cap[0] = static_cast<char>(std::toupper(cap[0]));
    std::string num = std::to_string(10 + rng.uniform(90));
    replace_all("%(arg)", cap);
    replace_all("%arg", arg);
    replace_all("%(num)", num);
    replace_all("%num", num);
    return t;
}

std::vector<std::string> generate_file(const Language& lang, Rng& rng, int n_lines) {
    std::vector<std::string> lines;
    for (int i = 0; i < n_lines; ++i)
        lines.push_back(fill(lang.templates[rng.uniform(lang.templates.size())], rng));
    return lines;
}

// 1-3 small edits; returns the changed copy and the index of one edit.
std::vector<std::string> mutate(const std::vector<std::string>& base, const Language& lang,
                                Rng& rng, int* touched_line) {
    std::vector<std::string> out = base;
    int edits = 1 + static_cast<int>(rng.uniform(3));
    int mark = -1;
    for (int e = 0; e < edits && !out.empty(); ++e) {
        int at = static_cast<int>(rng.uniform(out.size()));
        switch (rng.uniform(3)) {
            case 0: out[at] = fill(lang.templates[rng.uniform(lang.templates.size())], rng); break;
            case 1:
                out.insert(out.begin() + at,
                           fill(lang.templates[rng.uniform(lang.templates.size())], rng));
                break;
            default:
                if (out.size() > 4) out.erase(out.begin() + at);
                else out[at] = out[at] + "  # touched";
                break;
        }
        mark = at;
    }
    if (touched_line) *touched_line = std::max(0, mark);
    return out;
}

// A mutation constrained to the given new-file line span, so a follow-up
// commit's diff is guaranteed to overlap the commented hunk.
std::vector<std::string> mutate_in_span(const std::vector<std::string>& base, int start,
                                        int count, Rng& rng) {
    std::vector<std::string> out = base;
    if (out.empty()) return out;
    int lo = std::max(0, start - 1);  // 1-based span start -> 0-based index
    int hi = std::min<int>(static_cast<int>(out.size()) - 1, lo + std::max(count - 1, 0));
    int at = lo + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(hi - lo + 1)));
    out[at] = out[at] + "  // revised per review";
    return out;
}

std::string file_diff_text(const std::string& path, const std::vector<std::string>& old_lines,
                           const std::vector<std::string>& new_lines) {
    DiffHunk full = compute_diff(old_lines, new_lines);
    auto hunks = split_into_hunks(full, 3);
    if (hunks.empty()) return "";
    std::string text = "--- a/" + path + "\n+++ b/" + path + "\n";
    for (const auto& h : hunks) text += to_unified_text(h);
    return text;
}

// Position of a body line of hunk `target` (0-based among the file's
// hunks), following the convention that the first hunk header is 0.
int position_in_diff(const std::string& diff_text, std::size_t target, Rng& rng) {
    std::vector<HunkTextSpan> spans;
    parse_unified_diff(diff_text, &spans);
    const HunkTextSpan& s = spans.at(target);
    int offset = 1 + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(s.body_lines)));
    return s.header_line_index - spans.front().header_line_index + offset;
}

std::string iso_time(std::int64_t t) { return format_rfc3339(t); }

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : "fixtures";
    std::filesystem::create_directories(out_dir + "/prs");

    const std::vector<std::string> train_repos = {"acme/rocket", "acme/widget", "blue/parser",
                                                  "green/dbkit"};
    const std::vector<std::string> eval_repos = {"blue/cache", "green/webapp"};
    std::vector<std::string> repos = train_repos;
    repos.insert(repos.end(), eval_repos.begin(), eval_repos.end());

    const std::vector<std::string> authors = {"alice", "bob",  "carol", "dave",
                                              "erin",  "frank", "grace", "heidi"};

    Rng rng(20240808);
    std::int64_t clock = parse_rfc3339("2023-01-02T09:00:00Z");
    int total_prs = 0;

    for (std::size_t repo_idx = 0; repo_idx < repos.size(); ++repo_idx) {
        const std::string& repo = repos[repo_idx];
        std::string file_name = repo.substr(repo.find('/') + 1);
        std::ofstream out(out_dir + "/prs/" + std::string(1, '0' + static_cast<char>(repo_idx)) +
                          "_" + file_name + ".jsonl");

        // Repo-level state: a couple of source files that evolve PR by PR.
        const Language& lang = languages()[repo_idx % languages().size()];
        std::map<std::string, std::vector<std::string>> tree;
        for (int f = 0; f < 3; ++f) {
            std::string path = "src/" + file_name + "_" + std::to_string(f) + "." +
                               lang.extension;
            tree[path] = generate_file(lang, rng, 18 + static_cast<int>(rng.uniform(20)));
        }

        int prs_here = repo_idx < 4 ? 38 : 24;  // 4*38 + 2*24 = 200
        for (int n = 1; n <= prs_here; ++n) {
            RawPullRequest pr;
            pr.repo = repo;
            pr.pr_number = n;
            pr.pr_author = authors[rng.uniform(authors.size())];
            clock += 3600 + static_cast<std::int64_t>(rng.uniform(7200));

            // First commit: mutate 1-2 files.
            PrCommit c1;
            c1.sha = repo.substr(0, 2) + "c" + std::to_string(n) + "a";
            c1.parent_sha = "base";
            int files_touched = 1 + static_cast<int>(rng.uniform(2));
            std::vector<std::string> paths;
            for (const auto& [path, lines] : tree) paths.push_back(path);
            std::map<std::string, std::vector<std::string>> after_c1;
            for (int f = 0; f < files_touched; ++f) {
                const std::string& path = paths[(rng.uniform(paths.size()))];
                if (after_c1.count(path)) continue;
                int touched = 0;
                auto changed = mutate(tree[path], lang, rng, &touched);
                std::string diff = file_diff_text(path, tree[path], changed);
                if (diff.empty()) continue;
                c1.files.push_back({path, diff});
                after_c1[path] = changed;
            }
            if (c1.files.empty()) {
                // Force a visible edit so every PR carries at least one hunk.
                const std::string& path = paths[0];
                auto changed = tree[path];
                changed[0] += "  # forced";
                c1.files.push_back({path, file_diff_text(path, tree[path], changed)});
                after_c1[path] = changed;
            }
            pr.commits.push_back(c1);

            // Review comments over the first commit's hunks.
            bool with_comment = rng.unit() < 0.55;
            bool with_revision = with_comment && rng.unit() < 0.6;
            std::string commented_path;
            int commented_hunk = -1;
            if (with_comment) {
                const auto& file = c1.files[rng.uniform(c1.files.size())];
                std::vector<HunkTextSpan> spans;
                auto hunks = parse_unified_diff(file.unified_diff, &spans);
                commented_path = file.path;
                commented_hunk = static_cast<int>(rng.uniform(hunks.size()));

                PrReviewComment rc;
                rc.commit_sha = c1.sha;
                rc.path = file.path;
                rc.diff_position = position_in_diff(file.unified_diff,
                                                    static_cast<std::size_t>(commented_hunk), rng);
                rc.created_at = iso_time(clock + 600);
                rc.author = authors[rng.uniform(authors.size())];
                double flavor = rng.unit();
                if (flavor < 0.70) {
                    rc.body = review_phrases()[rng.uniform(review_phrases().size())];
                } else if (flavor < 0.76) {
                    rc.body = "lgtm";  // too short, cleaned away
                } else if (flavor < 0.80) {
                    rc.body = "https://ci.example.com/build/" + std::to_string(1000 + n);
                } else if (flavor < 0.84) {
                    rc.author = rng.unit() < 0.5 ? "deploy-bot" : "ci[bot]";
                    rc.body = "Automated style report attached for this change";
                } else if (flavor < 0.88) {
                    rc.body = "\xE3\x81\x93\xE3\x81\xAE\xE5\xA4\x89\xE6\x9B\xB4\xE3\x81\xAF "
                              "\xE8\x89\xAF\xE3\x81\x84";  // mostly non-ascii
                } else if (flavor < 0.92) {
                    rc.author = pr.pr_author;  // self review
                    rc.body = "I will clean this up in a follow up change";
                } else if (flavor < 0.96) {
                    rc.body = "Please deduplicate this logic with the sibling module";
                    // Duplicate body, same repo: a second PR will repeat it.
                    PrReviewComment dup = rc;
                    dup.created_at = iso_time(clock + 900);
                    pr.review_comments.push_back(dup);
                } else {
                    std::string lots;
                    for (int w = 0; w < 210; ++w) lots += "word ";
                    rc.body = lots;  // too long, cleaned away
                }
                pr.review_comments.push_back(rc);

                // Sometimes a second reviewer chimes in on the same hunk.
                if (rng.unit() < 0.12) {
                    PrReviewComment second = rc;
                    second.author = authors[rng.uniform(authors.size())];
                    second.body = review_phrases()[rng.uniform(review_phrases().size())];
                    second.created_at = iso_time(clock + 1200);
                    pr.review_comments.push_back(second);
                }
            }

            // Follow-up commit revising the commented lines.
            if (with_revision && !commented_path.empty()) {
                auto file_it = after_c1.find(commented_path);
                if (file_it != after_c1.end()) {
                    std::vector<HunkTextSpan> spans;
                    std::string c1_diff;
                    for (const auto& f : c1.files)
                        if (f.path == commented_path) c1_diff = f.unified_diff;
                    auto hunks = parse_unified_diff(c1_diff, &spans);
                    const DiffHunk& target = hunks.at(static_cast<std::size_t>(commented_hunk));
                    auto revised = mutate_in_span(file_it->second, target.new_start,
                                                  target.new_count, rng);
                    std::string diff = file_diff_text(commented_path, file_it->second, revised);
                    if (!diff.empty()) {
                        PrCommit c2;
                        c2.sha = repo.substr(0, 2) + "c" + std::to_string(n) + "b";
                        c2.parent_sha = c1.sha;
                        c2.files.push_back({commented_path, diff});
                        pr.commits.push_back(c2);
                        file_it->second = revised;
                    }
                }
            }

            // The repo tree advances to the merged state.
            for (auto& [path, lines] : after_c1) tree[path] = lines;

            out << raw_pr_to_json(pr).dump() << "\n";
            ++total_prs;
        }
    }

    // Split configuration matching the generated repos.
    nlohmann::json split{{"train_projects", train_repos},
                         {"eval_projects", eval_repos},
                         {"valid_fraction", 0.5}};
    std::ofstream split_out(out_dir + "/split_config.json");
    split_out << split.dump(2) << "\n";

    std::cout << "wrote " << total_prs << " pull requests under " << out_dir << "/prs\n";
    return 0;
}
