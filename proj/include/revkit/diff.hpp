// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace revkit {

enum class LineTag { Keep, Add, Del };

char tag_marker(LineTag tag);  // ' ', '+', '-'

struct TaggedLine {
    LineTag tag;
    std::string content;  // without the leading marker, no embedded newline

    bool operator==(const TaggedLine&) const = default;
};

// One unified-diff hunk. The canonical in-memory form of a code change.
struct DiffHunk {
    int old_start = 1;
    int old_count = 0;
    int new_start = 1;
    int new_count = 0;
    std::vector<TaggedLine> lines;
    std::string file_path;  // may be empty

    bool operator==(const DiffHunk&) const = default;
};

struct CodePair {
    std::vector<std::string> old_lines;
    std::vector<std::string> new_lines;

    bool operator==(const CodePair&) const = default;
};

struct DiffError : std::runtime_error {
    enum class Kind { MalformedHeader, CountMismatch, BothEmpty };
    Kind kind;
    DiffError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Byte span of a hunk inside the diff it was parsed from, measured in diff
// lines: line_index is the 0-based index of the "@@" header within the text,
// body_lines counts every following line belonging to the hunk (including
// "\ No newline at end of file" markers). Used for review-comment anchoring.
struct HunkTextSpan {
    int header_line_index = 0;
    int body_lines = 0;
};

// Parses zero or more hunks out of standard unified-diff text. File headers
// ("--- ", "+++ ", "diff ", "index ") are optional; "+++ b/<path>" sets
// file_path for the hunks that follow. Throws DiffError on a malformed "@@"
// header or when the declared counts disagree with the body.
std::vector<DiffHunk> parse_unified_diff(std::string_view text,
                                         std::vector<HunkTextSpan>* spans = nullptr);

// old side = Keep+Del contents, new side = Keep+Add contents.
CodePair reconstruct(const DiffHunk& hunk);

// Single hunk covering both inputs fully, aligned by a longest-common-
// subsequence over whole lines. Ties are broken by emitting Del before Add.
// Throws DiffError{BothEmpty} when both inputs are empty.
DiffHunk compute_diff(const std::vector<std::string>& old_lines,
                      const std::vector<std::string>& new_lines);

// Serializes one hunk back to unified-diff text ("@@" header + body).
std::string to_unified_text(const DiffHunk& hunk);

// Serializes a sequence of hunks; when with_file_headers is set, emits
// "--- a/<path>" / "+++ b/<path>" lines whenever file_path changes.
std::string to_unified_text(const std::vector<DiffHunk>& hunks, bool with_file_headers);

// Splits a full-coverage diff (as produced by compute_diff) into hunks with
// at most `context` unchanged lines around each change run, the way diff
// tools present them. Pure-Keep input produces no hunks.
std::vector<DiffHunk> split_into_hunks(const DiffHunk& full, int context);

// Enforces the tag-count and non-empty invariants; throws DiffError.
void validate_hunk(const DiffHunk& hunk);

}  // namespace revkit
