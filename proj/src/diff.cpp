// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/diff.hpp"

#include <algorithm>
#include <cstdio>

#include "revkit/common.hpp"

namespace revkit {

char tag_marker(LineTag tag) {
    switch (tag) {
        case LineTag::Keep: return ' ';
        case LineTag::Add: return '+';
        case LineTag::Del: return '-';
    }
    return '?';
}

void validate_hunk(const DiffHunk& hunk) {
    if (hunk.lines.empty())
        throw DiffError(DiffError::Kind::CountMismatch, "hunk has no lines");
    int old_n = 0, new_n = 0;
    for (const auto& line : hunk.lines) {
        if (line.content.find('\n') != std::string::npos)
            throw DiffError(DiffError::Kind::CountMismatch, "line content contains newline");
        if (line.tag != LineTag::Add) ++old_n;
        if (line.tag != LineTag::Del) ++new_n;
    }
    if (old_n != hunk.old_count || new_n != hunk.new_count) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "hunk counts -%d +%d disagree with body -%d +%d",
                      hunk.old_count, hunk.new_count, old_n, new_n);
        throw DiffError(DiffError::Kind::CountMismatch, buf);
    }
}

namespace {

// "@@ -a[,b] +c[,d] @@[ anything]". Returns false if the line does not
// match; a line starting with "@@" that fails to match is malformed.
bool parse_hunk_header(std::string_view line, int& os, int& oc, int& ns, int& nc) {
    std::size_t pos = 0;
    auto expect = [&](std::string_view lit) {
        if (line.substr(pos, lit.size()) != lit) return false;
        pos += lit.size();
        return true;
    };
    auto number = [&](int& out) {
        if (pos >= line.size() || line[pos] < '0' || line[pos] > '9') return false;
        long v = 0;
        while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
            v = v * 10 + (line[pos] - '0');
            if (v > 1'000'000'000L) return false;
            ++pos;
        }
        out = static_cast<int>(v);
        return true;
    };
    if (!expect("@@ -")) return false;
    if (!number(os)) return false;
    oc = 1;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!number(oc)) return false;
    }
    if (!expect(" +")) return false;
    if (!number(ns)) return false;
    nc = 1;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!number(nc)) return false;
    }
    if (!expect(" @@")) return false;
    return pos == line.size() || line[pos] == ' ' || line[pos] == '\t';
}

std::string strip_diff_path(std::string_view rest) {
    // "+++ b/src/a.py\t2023-01-01 ..." -> "src/a.py"
    std::size_t tab = rest.find('\t');
    std::string path(rest.substr(0, tab));
    if (path.rfind("a/", 0) == 0 || path.rfind("b/", 0) == 0) path = path.substr(2);
    if (path == "/dev/null") path.clear();
    return path;
}

}  // namespace

std::vector<DiffHunk> parse_unified_diff(std::string_view text, std::vector<HunkTextSpan>* spans) {
    std::vector<DiffHunk> hunks;
    if (spans) spans->clear();
    std::vector<std::string> lines = split_lines(text);
    std::string current_path;

    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string& line = lines[i];
        if (line.rfind("+++ ", 0) == 0) {
            current_path = strip_diff_path(std::string_view(line).substr(4));
            ++i;
            continue;
        }
        if (line.rfind("@@", 0) != 0) {
            ++i;  // file headers, index lines, commentary between hunks
            continue;
        }
        int os = 0, oc = 0, ns = 0, nc = 0;
        if (!parse_hunk_header(line, os, oc, ns, nc))
            throw DiffError(DiffError::Kind::MalformedHeader, "malformed hunk header: " + line);

        DiffHunk hunk;
        hunk.old_start = os;
        hunk.old_count = oc;
        hunk.new_start = ns;
        hunk.new_count = nc;
        hunk.file_path = current_path;

        HunkTextSpan span;
        span.header_line_index = static_cast<int>(i);
        ++i;

        int old_left = oc, new_left = nc;
        while (old_left > 0 || new_left > 0) {
            if (i >= lines.size())
                throw DiffError(DiffError::Kind::CountMismatch,
                                "diff ended before hunk body was complete");
            const std::string& body = lines[i];
            if (!body.empty() && body[0] == '\\') {
                // "\ No newline at end of file" -- occupies a diff line but
                // carries no content.
                ++span.body_lines;
                ++i;
                continue;
            }
            char marker = body.empty() ? ' ' : body[0];
            LineTag tag;
            switch (marker) {
                case ' ': tag = LineTag::Keep; break;
                case '+': tag = LineTag::Add; break;
                case '-': tag = LineTag::Del; break;
                default:
                    throw DiffError(DiffError::Kind::CountMismatch,
                                    "unexpected line in hunk body: " + body);
            }
            if (tag != LineTag::Add) {
                if (--old_left < 0)
                    throw DiffError(DiffError::Kind::CountMismatch,
                                    "more old-side lines than the header declares");
            }
            if (tag != LineTag::Del) {
                if (--new_left < 0)
                    throw DiffError(DiffError::Kind::CountMismatch,
                                    "more new-side lines than the header declares");
            }
            hunk.lines.push_back({tag, body.empty() ? std::string() : body.substr(1)});
            ++span.body_lines;
            ++i;
        }
        // Trailing no-newline marker belongs to this hunk.
        if (i < lines.size() && !lines[i].empty() && lines[i][0] == '\\') {
            ++span.body_lines;
            ++i;
        }
        validate_hunk(hunk);
        hunks.push_back(std::move(hunk));
        if (spans) spans->push_back(span);
    }
    return hunks;
}

CodePair reconstruct(const DiffHunk& hunk) {
    CodePair pair;
    for (const auto& line : hunk.lines) {
        if (line.tag != LineTag::Add) pair.old_lines.push_back(line.content);
        if (line.tag != LineTag::Del) pair.new_lines.push_back(line.content);
    }
    return pair;
}

DiffHunk compute_diff(const std::vector<std::string>& old_lines,
                      const std::vector<std::string>& new_lines) {
    if (old_lines.empty() && new_lines.empty())
        throw DiffError(DiffError::Kind::BothEmpty, "both line lists are empty");

    const std::size_t n = old_lines.size();
    const std::size_t m = new_lines.size();
    // lcs[i][j] = LCS length of old_lines[i..] and new_lines[j..].
    std::vector<int> lcs((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> int& { return lcs[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (old_lines[i] == new_lines[j])
                at(i, j) = at(i + 1, j + 1) + 1;
            else
                at(i, j) = std::max(at(i + 1, j), at(i, j + 1));
        }
    }

    DiffHunk hunk;
    hunk.old_start = 1;
    hunk.new_start = 1;
    hunk.old_count = static_cast<int>(n);
    hunk.new_count = static_cast<int>(m);
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && old_lines[i] == new_lines[j]) {
            hunk.lines.push_back({LineTag::Keep, old_lines[i]});
            ++i;
            ++j;
        } else if (i < n && (j >= m || at(i + 1, j) >= at(i, j + 1))) {
            // >= prefers Del over Add at equal cost.
            hunk.lines.push_back({LineTag::Del, old_lines[i]});
            ++i;
        } else {
            hunk.lines.push_back({LineTag::Add, new_lines[j]});
            ++j;
        }
    }
    validate_hunk(hunk);
    return hunk;
}

std::string to_unified_text(const DiffHunk& hunk) {
    char header[96];
    std::snprintf(header, sizeof(header), "@@ -%d,%d +%d,%d @@", hunk.old_start, hunk.old_count,
                  hunk.new_start, hunk.new_count);
    std::string out = header;
    out += '\n';
    for (const auto& line : hunk.lines) {
        out += tag_marker(line.tag);
        out += line.content;
        out += '\n';
    }
    return out;
}

std::string to_unified_text(const std::vector<DiffHunk>& hunks, bool with_file_headers) {
    std::string out;
    std::string last_path;
    bool first = true;
    for (const auto& hunk : hunks) {
        if (with_file_headers && (first || hunk.file_path != last_path)) {
            out += "--- a/" + hunk.file_path + "\n";
            out += "+++ b/" + hunk.file_path + "\n";
            last_path = hunk.file_path;
        }
        first = false;
        out += to_unified_text(hunk);
    }
    return out;
}

std::vector<DiffHunk> split_into_hunks(const DiffHunk& full, int context) {
    const auto& lines = full.lines;
    const int n = static_cast<int>(lines.size());

    // Change runs as [start, end) index ranges over `lines`.
    std::vector<std::pair<int, int>> runs;
    for (int i = 0; i < n;) {
        if (lines[i].tag == LineTag::Keep) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && lines[j].tag != LineTag::Keep) ++j;
        runs.emplace_back(i, j);
        i = j;
    }

    // Extend by context and merge overlapping or touching ranges.
    std::vector<std::pair<int, int>> merged;
    for (auto [s, e] : runs) {
        int cs = std::max(0, s - context);
        int ce = std::min(n, e + context);
        if (!merged.empty() && cs <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, ce);
        } else {
            merged.emplace_back(cs, ce);
        }
    }

    std::vector<DiffHunk> hunks;
    int old_line = full.old_start;
    int new_line = full.new_start;
    int idx = 0;
    for (auto [s, e] : merged) {
        while (idx < s) {
            if (lines[idx].tag != LineTag::Add) ++old_line;
            if (lines[idx].tag != LineTag::Del) ++new_line;
            ++idx;
        }
        DiffHunk h;
        h.file_path = full.file_path;
        h.old_start = old_line;
        h.new_start = new_line;
        for (; idx < e; ++idx) {
            h.lines.push_back(lines[idx]);
            if (lines[idx].tag != LineTag::Add) {
                ++h.old_count;
                ++old_line;
            }
            if (lines[idx].tag != LineTag::Del) {
                ++h.new_count;
                ++new_line;
            }
        }
        // Unified-diff convention: a zero-count range names the line before.
        if (h.old_count == 0) h.old_start -= 1;
        if (h.new_count == 0) h.new_start -= 1;
        validate_hunk(h);
        hunks.push_back(std::move(h));
    }
    return hunks;
}

}  // namespace revkit
