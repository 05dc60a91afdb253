// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/metrics.hpp"

#include <fstream>

#include "revkit/common.hpp"

namespace revkit {

ClassificationMetrics classification_metrics(const std::vector<int>& preds,
                                             const std::vector<int>& labels) {
    if (preds.size() != labels.size())
        throw MetricsError(MetricsError::Kind::LengthMismatch, "pred/label counts differ");
    if (preds.empty()) throw MetricsError(MetricsError::Kind::Empty, "no predictions");

    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1 && labels[i] == 1) ++tp;
        if (preds[i] == 1 && labels[i] == 0) ++fp;
        if (preds[i] == 0 && labels[i] == 0) ++tn;
        if (preds[i] == 0 && labels[i] == 1) ++fn;
    }
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(preds.size());
    m.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::string normalize_for_exact_match(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    for (auto& line : lines) {
        std::size_t end = line.find_last_not_of(" \t\r");
        line = end == std::string::npos ? "" : line.substr(0, end + 1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

double exact_match(const std::vector<std::string>& candidates,
                   const std::vector<std::string>& references) {
    if (candidates.size() != references.size())
        throw MetricsError(MetricsError::Kind::LengthMismatch,
                           "candidate/reference counts differ");
    if (candidates.empty()) throw MetricsError(MetricsError::Kind::Empty, "nothing to score");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (normalize_for_exact_match(candidates[i]) == normalize_for_exact_match(references[i]))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(candidates.size());
}

std::vector<std::string> naive_copy(const std::vector<RefinementSample>& samples) {
    std::vector<std::string> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(join_lines(s.old_code));
    return out;
}

std::vector<std::string> tokenize_comment(const std::string& text) {
    return split_words(to_lower(text));
}

nlohmann::json EvalReport::to_json() const {
    return nlohmann::json{{"task", task},
                          {"metrics", metrics},
                          {"n_samples", n_samples},
                          {"config_fingerprint", config_fingerprint},
                          {"notes", notes}};
}

void EvalReport::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MetricsError(MetricsError::Kind::Empty, "cannot write " + path);
    out << to_json().dump(2) << "\n";
}

namespace {

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void write_annotation_sheet_csv(const std::string& path, const std::vector<std::string>& inputs,
                                const std::vector<std::string>& references,
                                const std::vector<std::string>& candidates) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MetricsError(MetricsError::Kind::Empty, "cannot write " + path);
    out << "id,input,reference,candidate,information,relevance\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out << i << "," << csv_quote(i < inputs.size() ? inputs[i] : "") << ","
            << csv_quote(i < references.size() ? references[i] : "") << ","
            << csv_quote(candidates[i]) << ",,\n";
    }
}

}  // namespace revkit
