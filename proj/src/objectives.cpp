// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace revkit {

std::string task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::Dtp: return "dtp";
        case TaskKind::Dcd: return "dcd";
        case TaskKind::Drc: return "drc";
        case TaskKind::Rcg: return "rcg";
        case TaskKind::QualityCls: return "quality_cls";
        case TaskKind::CommentGen: return "comment_gen";
        case TaskKind::Refinement: return "refinement";
    }
    return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "dtp") return TaskKind::Dtp;
    if (name == "dcd") return TaskKind::Dcd;
    if (name == "drc") return TaskKind::Drc;
    if (name == "rcg") return TaskKind::Rcg;
    if (name == "quality_cls") return TaskKind::QualityCls;
    if (name == "comment_gen") return TaskKind::CommentGen;
    if (name == "refinement") return TaskKind::Refinement;
    throw std::invalid_argument("unknown task kind: " + name);
}

nlohmann::json task_sample_to_json(const TaskSample& s) {
    nlohmann::json j{{"kind", task_kind_name(s.kind)},
                     {"input_ids", s.input_ids},
                     {"target_ids", s.target_ids}};
    if (s.cls_label)
        j["cls_label"] = *s.cls_label;
    else
        j["cls_label"] = nullptr;
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& tp : s.tag_positions) positions.push_back({tp.index, tp.label});
    j["tag_positions"] = std::move(positions);
    return j;
}

TaskSample task_sample_from_json(const nlohmann::json& j) {
    TaskSample s;
    s.kind = task_kind_from_name(j.at("kind").get<std::string>());
    s.input_ids = j.at("input_ids").get<std::vector<int>>();
    s.target_ids = j.at("target_ids").get<std::vector<int>>();
    if (j.contains("cls_label") && !j["cls_label"].is_null())
        s.cls_label = j["cls_label"].get<int>();
    for (const auto& tp : j.at("tag_positions"))
        s.tag_positions.push_back({tp.at(0).get<int>(), tp.at(1).get<int>()});
    return s;
}

int tag_token_id(LineTag tag) {
    switch (tag) {
        case LineTag::Keep: return special::kKeep;
        case LineTag::Add: return special::kAdd;
        case LineTag::Del: return special::kDel;
    }
    return special::kKeep;
}

int tag_class(LineTag tag) { return static_cast<int>(tag); }

namespace {

constexpr int kNewlineToken = Vocab::kByteBase + '\n';

void truncate_head(std::vector<int>& ids, int max_len) {
    if (static_cast<int>(ids.size()) > max_len) ids.resize(static_cast<std::size_t>(max_len));
}

// encode_hunk with the index of every tag token reported.
std::vector<int> encode_hunk_tracking(const DiffHunk& hunk, const Vocab& vocab, int max_len,
                                      std::vector<std::pair<int, LineTag>>* tag_indices) {
    std::vector<int> ids{special::kCls};
    for (const auto& line : hunk.lines) {
        if (tag_indices) tag_indices->emplace_back(static_cast<int>(ids.size()), line.tag);
        ids.push_back(tag_token_id(line.tag));
        for (int t : encode(line.content, vocab)) ids.push_back(t);
        ids.push_back(kNewlineToken);
    }
    truncate_head(ids, max_len);
    if (tag_indices)
        std::erase_if(*tag_indices,
                      [&](const auto& p) { return p.first >= static_cast<int>(ids.size()); });
    return ids;
}

}  // namespace

std::vector<int> encode_hunk(const DiffHunk& hunk, const Vocab& vocab, int max_len) {
    return encode_hunk_tracking(hunk, vocab, max_len, nullptr);
}

std::vector<int> encode_code_and_comment(const std::vector<std::string>& code_lines,
                                         std::string_view comment, const Vocab& vocab,
                                         int max_len) {
    std::vector<int> comment_ids = encode(comment, vocab);
    if (static_cast<int>(comment_ids.size()) >= max_len - 2)
        throw ObjectiveError(ObjectiveError::Kind::CommentAloneTooLong,
                             "comment of " + std::to_string(comment_ids.size()) +
                                 " tokens cannot fit in max_len " + std::to_string(max_len));
    std::vector<int> code_ids = encode(join_lines(code_lines), vocab);
    int code_budget = max_len - 2 - static_cast<int>(comment_ids.size());
    truncate_head(code_ids, code_budget);

    std::vector<int> ids;
    ids.reserve(2 + code_ids.size() + comment_ids.size());
    ids.push_back(special::kCls);
    ids.insert(ids.end(), code_ids.begin(), code_ids.end());
    ids.push_back(special::kMsg);
    ids.insert(ids.end(), comment_ids.begin(), comment_ids.end());
    truncate_head(ids, max_len);
    return ids;
}

TaskSample make_dtp(const DiffHunk& hunk, const Vocab& vocab, int max_len) {
    TaskSample s;
    s.kind = TaskKind::Dtp;
    std::vector<std::pair<int, LineTag>> tags;
    s.input_ids = encode_hunk_tracking(hunk, vocab, max_len, &tags);
    for (auto& [index, tag] : tags) {
        s.input_ids[static_cast<std::size_t>(index)] = special::kMask;
        s.tag_positions.push_back({index, tag_class(tag)});
    }
    return s;
}

TaskSample make_dcd(const DiffHunk& hunk, const Vocab& vocab, int max_len, Rng& rng,
                    const LineCorruptionConfig& config) {
    const int n = static_cast<int>(hunk.lines.size());
    int k = std::max(1, static_cast<int>(std::llround(config.rate * n)));
    k = std::min({k, n, special::kNumSentinels});

    // k distinct line indices, drawn without replacement, then put back in
    // line order so sentinel numbering follows the text.
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> masked(pool.begin(), pool.begin() + k);
    std::sort(masked.begin(), masked.end());

    TaskSample s;
    s.kind = TaskKind::Dcd;
    s.input_ids.push_back(special::kCls);
    int sentinel = 0;
    for (int i = 0; i < n; ++i) {
        const TaggedLine& line = hunk.lines[static_cast<std::size_t>(i)];
        s.input_ids.push_back(tag_token_id(line.tag));
        if (std::binary_search(masked.begin(), masked.end(), i)) {
            s.input_ids.push_back(special::sentinel(sentinel));
            s.target_ids.push_back(special::sentinel(sentinel));
            for (int t : encode(line.content, vocab)) s.target_ids.push_back(t);
            ++sentinel;
        } else {
            for (int t : encode(line.content, vocab)) s.input_ids.push_back(t);
        }
        s.input_ids.push_back(kNewlineToken);
    }
    s.target_ids.push_back(special::kEos);
    truncate_head(s.input_ids, max_len);
    truncate_head(s.target_ids, max_len);
    return s;
}

TaskSample make_drc(std::string_view comment, const Vocab& vocab, int max_len, Rng& rng,
                    const SpanCorruptionConfig& config) {
    std::vector<int> tokens = encode(comment, vocab);
    const int m = static_cast<int>(tokens.size());
    TaskSample s;
    s.kind = TaskKind::Drc;
    if (m == 0) {
        s.input_ids = {special::kCls};
        s.target_ids = {special::kEos};
        return s;
    }
    int budget = static_cast<int>(std::ceil(config.rate * m));
    budget = std::min(budget, m);

    // span_of[i] = span ordinal covering token i, or -1.
    std::vector<int> span_of(static_cast<std::size_t>(m), -1);
    int n_spans = 0;
    int remaining = budget;
    while (remaining > 0 && n_spans < special::kNumSentinels) {
        int len = config.min_span +
                  static_cast<int>(rng.uniform(
                      static_cast<std::uint64_t>(config.max_span - config.min_span + 1)));
        len = std::min(len, remaining);
        // All starts whose window is free; shrink the window if none fit.
        std::vector<int> starts;
        for (; len >= 1 && starts.empty(); ) {
            for (int st = 0; st + len <= m; ++st) {
                bool free = true;
                for (int t = st; t < st + len; ++t)
                    if (span_of[static_cast<std::size_t>(t)] >= 0) {
                        free = false;
                        break;
                    }
                if (free) starts.push_back(st);
            }
            if (starts.empty()) --len;
        }
        if (starts.empty()) break;  // everything masked already
        int st = starts[static_cast<std::size_t>(rng.uniform(starts.size()))];
        for (int t = st; t < st + len; ++t) span_of[static_cast<std::size_t>(t)] = n_spans;
        ++n_spans;
        remaining -= len;
    }

    // Renumber spans by position so sentinel order follows the text.
    std::vector<int> order(static_cast<std::size_t>(n_spans), -1);
    int next = 0;
    for (int i = 0; i < m; ++i) {
        int sp = span_of[static_cast<std::size_t>(i)];
        if (sp >= 0 && order[static_cast<std::size_t>(sp)] < 0)
            order[static_cast<std::size_t>(sp)] = next++;
    }

    s.input_ids.push_back(special::kCls);
    int prev_span = -1;
    for (int i = 0; i < m; ++i) {
        int sp = span_of[static_cast<std::size_t>(i)];
        if (sp < 0) {
            s.input_ids.push_back(tokens[static_cast<std::size_t>(i)]);
            prev_span = -1;
        } else if (sp != prev_span) {
            s.input_ids.push_back(special::sentinel(order[static_cast<std::size_t>(sp)]));
            prev_span = sp;
        }
    }
    // Targets in sentinel order.
    for (int want = 0; want < n_spans; ++want) {
        for (int sp = 0; sp < n_spans; ++sp) {
            if (order[static_cast<std::size_t>(sp)] != want) continue;
            s.target_ids.push_back(special::sentinel(want));
            for (int i = 0; i < m; ++i)
                if (span_of[static_cast<std::size_t>(i)] == sp)
                    s.target_ids.push_back(tokens[static_cast<std::size_t>(i)]);
        }
    }
    s.target_ids.push_back(special::kEos);
    truncate_head(s.input_ids, max_len);
    truncate_head(s.target_ids, max_len);
    return s;
}

TaskSample make_rcg(const DiffHunk& hunk, std::string_view comment, const Vocab& vocab,
                    int max_len) {
    TaskSample s;
    s.kind = TaskKind::Rcg;
    s.input_ids = encode_hunk(hunk, vocab, max_len);
    s.target_ids = encode(comment, vocab);
    truncate_head(s.target_ids, max_len - 1);
    s.target_ids.push_back(special::kEos);
    return s;
}

TaskSample make_quality_sample(const DiffHunk& hunk, int label, const Vocab& vocab,
                               int max_len) {
    TaskSample s;
    s.kind = TaskKind::QualityCls;
    s.input_ids = encode_hunk(hunk, vocab, max_len);
    s.cls_label = label;
    return s;
}

TaskSample make_comment_gen_sample(const DiffHunk& hunk, std::string_view comment,
                                   const Vocab& vocab, int max_len) {
    TaskSample s = make_rcg(hunk, comment, vocab, max_len);
    s.kind = TaskKind::CommentGen;
    return s;
}

TaskSample make_refinement_sample(const std::vector<std::string>& old_code,
                                  std::string_view comment,
                                  const std::vector<std::string>& new_code, const Vocab& vocab,
                                  int max_len) {
    TaskSample s;
    s.kind = TaskKind::Refinement;
    s.input_ids = encode_code_and_comment(old_code, comment, vocab, max_len);
    s.target_ids = encode(join_lines(new_code), vocab);
    truncate_head(s.target_ids, max_len - 1);
    s.target_ids.push_back(special::kEos);
    return s;
}

double dtp_loss(const std::vector<double>& logits, const std::vector<int>& labels) {
    if (labels.empty() || logits.size() != labels.size() * 3)
        throw ObjectiveError(ObjectiveError::Kind::ShapeMismatch,
                             "need one 3-way logit triple per label");
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double* row = logits.data() + i * 3;
        double maxv = std::max({row[0], row[1], row[2]});
        double lse = maxv + std::log(std::exp(row[0] - maxv) + std::exp(row[1] - maxv) +
                                     std::exp(row[2] - maxv));
        total += lse - row[labels[i]];
    }
    return total / static_cast<double>(labels.size());
}

double seq_nll_loss(const std::vector<double>& step_logits, int vocab_size,
                    const std::vector<int>& target_ids) {
    if (target_ids.empty() || vocab_size <= 0 ||
        step_logits.size() != target_ids.size() * static_cast<std::size_t>(vocab_size))
        throw ObjectiveError(ObjectiveError::Kind::ShapeMismatch,
                             "need one logit row per target token");
    double total = 0.0;
    for (std::size_t i = 0; i < target_ids.size(); ++i) {
        const double* row = step_logits.data() + i * static_cast<std::size_t>(vocab_size);
        double maxv = row[0];
        for (int c = 1; c < vocab_size; ++c) maxv = std::max(maxv, row[c]);
        double denom = 0.0;
        for (int c = 0; c < vocab_size; ++c) denom += std::exp(row[c] - maxv);
        total += maxv + std::log(denom) - row[target_ids[i]];
    }
    return total / static_cast<double>(target_ids.size());
}

}  // namespace revkit
