// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/records.hpp"

#include <fstream>
#include <stdexcept>

#include "revkit/common.hpp"

namespace revkit {

namespace {

const char* tag_name(LineTag tag) {
    switch (tag) {
        case LineTag::Keep: return "keep";
        case LineTag::Add: return "add";
        case LineTag::Del: return "del";
    }
    return "?";
}

LineTag tag_from_name(const std::string& s) {
    if (s == "keep") return LineTag::Keep;
    if (s == "add") return LineTag::Add;
    if (s == "del") return LineTag::Del;
    throw std::invalid_argument("unknown line tag: " + s);
}

}  // namespace

nlohmann::json hunk_to_json(const DiffHunk& hunk) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& line : hunk.lines)
        lines.push_back(nlohmann::json::array({tag_name(line.tag), line.content}));
    return nlohmann::json{
        {"file_path", hunk.file_path}, {"old_start", hunk.old_start},
        {"old_count", hunk.old_count}, {"new_start", hunk.new_start},
        {"new_count", hunk.new_count}, {"lines", std::move(lines)},
    };
}

DiffHunk hunk_from_json(const nlohmann::json& j) {
    DiffHunk hunk;
    hunk.file_path = j.value("file_path", std::string());
    hunk.old_start = j.at("old_start").get<int>();
    hunk.old_count = j.at("old_count").get<int>();
    hunk.new_start = j.at("new_start").get<int>();
    hunk.new_count = j.at("new_count").get<int>();
    for (const auto& line : j.at("lines"))
        hunk.lines.push_back({tag_from_name(line.at(0).get<std::string>()),
                              line.at(1).get<std::string>()});
    validate_hunk(hunk);
    return hunk;
}

nlohmann::json record_to_json(const ReviewRecord& r) {
    nlohmann::json j{
        {"repo", r.repo},
        {"pr_number", r.pr_number},
        {"commit_sha", r.commit_sha},
        {"hunk", hunk_to_json(r.hunk)},
        {"pr_author", r.pr_author},
        {"revision_link_count", r.revision_link_count},
    };
    if (r.comment) {
        j["comment"] = nlohmann::json{{"body", r.comment->body},
                                      {"author", r.comment->author},
                                      {"created_at", r.comment->created_at}};
    }
    if (r.later_revision) j["later_revision"] = hunk_to_json(*r.later_revision);
    return j;
}

ReviewRecord record_from_json(const nlohmann::json& j) {
    ReviewRecord r;
    r.repo = j.at("repo").get<std::string>();
    r.pr_number = j.at("pr_number").get<int>();
    r.commit_sha = j.at("commit_sha").get<std::string>();
    r.hunk = hunk_from_json(j.at("hunk"));
    r.pr_author = j.at("pr_author").get<std::string>();
    r.revision_link_count = j.value("revision_link_count", 0);
    if (j.contains("comment")) {
        Comment c;
        c.body = j["comment"].at("body").get<std::string>();
        c.author = j["comment"].at("author").get<std::string>();
        c.created_at = j["comment"].at("created_at").get<std::string>();
        c.created_at_epoch = parse_rfc3339(c.created_at);
        r.comment = std::move(c);
    }
    if (j.contains("later_revision")) r.later_revision = hunk_from_json(j["later_revision"]);
    return r;
}

std::vector<ReviewRecord> read_records_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<ReviewRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

void write_records_jsonl(const std::string& path, const std::vector<ReviewRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

}  // namespace revkit
