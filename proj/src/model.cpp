// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/model.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "revkit/tokenizer.hpp"

namespace revkit {

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
    return nlohmann::json{
        {"n_enc_layers", c.n_enc_layers}, {"n_dec_layers", c.n_dec_layers},
        {"n_heads", c.n_heads},           {"d_model", c.d_model},
        {"d_ff", c.d_ff},                 {"vocab_size", c.vocab_size},
        {"max_len", c.max_len},           {"dropout", c.dropout},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_enc_layers = j.at("n_enc_layers").get<int>();
    c.n_dec_layers = j.at("n_dec_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.validate();
    return c;
}

void write_tensor_blob(const std::string& dir,
                       const std::map<std::string, nn::Tensor<float>>& params,
                       const std::map<std::string, nn::Tensor<float>>& opt) {
    nlohmann::json index = nlohmann::json::object();
    std::ofstream bin(dir + "/tensors.bin", std::ios::binary);
    if (!bin) throw ModelError(ModelError::Kind::BadCheckpoint, "cannot write " + dir);
    std::uint64_t offset = 0;
    auto emit = [&](const std::string& name, const nn::Tensor<float>& t) {
        bin.write(reinterpret_cast<const char*>(t.v.data()),
                  static_cast<std::streamsize>(t.v.size() * sizeof(float)));
        index[name] = {{"offset", offset},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"dtype", "f32le"}};
        offset += t.v.size() * sizeof(float);
    };
    for (const auto& [name, t] : params) emit(name, t);
    for (const auto& [name, t] : opt) emit("opt." + name, t);
    std::ofstream idx(dir + "/tensors.json", std::ios::binary);
    idx << index.dump(2) << "\n";
}

void read_tensor_blob(const std::string& dir, std::map<std::string, nn::Tensor<float>>& params,
                      std::map<std::string, nn::Tensor<float>>& opt) {
    std::ifstream idx_file(dir + "/tensors.json", std::ios::binary);
    if (!idx_file)
        throw ModelError(ModelError::Kind::BadCheckpoint, "missing tensors.json in " + dir);
    nlohmann::json index = nlohmann::json::parse(idx_file);
    std::ifstream bin(dir + "/tensors.bin", std::ios::binary);
    if (!bin)
        throw ModelError(ModelError::Kind::BadCheckpoint, "missing tensors.bin in " + dir);
    for (auto it = index.begin(); it != index.end(); ++it) {
        const auto& meta = it.value();
        if (meta.at("dtype").get<std::string>() != "f32le")
            throw ModelError(ModelError::Kind::BadCheckpoint, "unsupported dtype");
        nn::Tensor<float> t(meta.at("rows").get<int>(), meta.at("cols").get<int>());
        bin.seekg(static_cast<std::streamoff>(meta.at("offset").get<std::uint64_t>()));
        bin.read(reinterpret_cast<char*>(t.v.data()),
                 static_cast<std::streamsize>(t.v.size() * sizeof(float)));
        if (!bin) throw ModelError(ModelError::Kind::BadCheckpoint, "truncated tensors.bin");
        std::string name = it.key();
        if (name.rfind("opt.", 0) == 0)
            opt.emplace(name.substr(4), std::move(t));
        else
            params.emplace(name, std::move(t));
    }
}

}  // namespace

void Checkpoint::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json meta{
        {"config", config_to_json(config)},
        {"step", step},
        {"vocab_fingerprint", vocab_fingerprint},
        {"tool_version", kToolVersion},
    };
    std::ofstream cfg(dir + "/config.json", std::ios::binary);
    if (!cfg) throw ModelError(ModelError::Kind::BadCheckpoint, "cannot write " + dir);
    cfg << meta.dump(2) << "\n";
    write_tensor_blob(dir, tensors, optimizer_state);
}

Checkpoint Checkpoint::load(const std::string& dir) {
    std::ifstream cfg(dir + "/config.json", std::ios::binary);
    if (!cfg) throw ModelError(ModelError::Kind::BadCheckpoint, "missing config.json in " + dir);
    nlohmann::json meta = nlohmann::json::parse(cfg);
    Checkpoint ckpt;
    ckpt.config = config_from_json(meta.at("config"));
    ckpt.step = meta.value("step", std::int64_t(0));
    ckpt.vocab_fingerprint = meta.value("vocab_fingerprint", std::uint64_t(0));
    read_tensor_blob(dir, ckpt.tensors, ckpt.optimizer_state);
    return ckpt;
}

Checkpoint init_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Transformer<float> tf(config, seed);
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.tensors = tf.dump_tensors();
    return ckpt;
}

std::vector<int> shift_right(const std::vector<int>& target_ids) {
    std::vector<int> out;
    out.reserve(target_ids.size());
    out.push_back(special::kPad);
    out.insert(out.end(), target_ids.begin(), target_ids.end() - 1);
    return out;
}

Model::Model(const Checkpoint& ckpt) : tf_(ckpt.config) {
    tf_.load_tensors(ckpt.tensors);
}

Model::TeacherForced Model::forward_teacher_forced(const std::vector<int>& input_ids,
                                                   const std::vector<int>& target_ids) const {
    if (target_ids.empty())
        throw ModelError(ModelError::Kind::EmptyTarget, "target must be non-empty");
    Transformer<float>::Ctx ctx(false);
    int enc = tf_.encode(ctx, input_ids);
    int dec = tf_.decode(ctx, enc, shift_right(target_ids));
    int logits = tf_.lm_logits(ctx, dec);
    TeacherForced out;
    out.step_logits = ctx.g.val(logits);
    out.encoder_states = ctx.g.val(enc);
    return out;
}

double Model::classify(const std::vector<int>& input_ids) const {
    if (input_ids.empty() || input_ids[0] != special::kCls)
        throw ModelError(ModelError::Kind::MissingCls, "input must start with the CLS token");
    Transformer<float>::Ctx ctx(false);
    int enc = tf_.encode(ctx, input_ids);
    int logit = tf_.cls_logit(ctx, enc);
    float z = ctx.g.val(logit).v[0];
    return 1.0 / (1.0 + std::exp(-static_cast<double>(z)));
}

std::vector<std::array<float, 3>> Model::tag_logits(const std::vector<int>& input_ids,
                                                    const std::vector<int>& tag_positions) const {
    for (int pos : tag_positions) {
        if (pos < 0 || pos >= static_cast<int>(input_ids.size()) ||
            input_ids[static_cast<std::size_t>(pos)] != special::kMask)
            throw ModelError(ModelError::Kind::PositionNotMasked,
                             "position " + std::to_string(pos) + " does not hold MASK");
    }
    Transformer<float>::Ctx ctx(false);
    int enc = tf_.encode(ctx, input_ids);
    int logits = tf_.tag_logits_node(ctx, enc, tag_positions);
    const nn::Tensor<float>& lv = ctx.g.val(logits);
    std::vector<std::array<float, 3>> out(tag_positions.size());
    for (std::size_t i = 0; i < tag_positions.size(); ++i)
        out[i] = {lv.at(static_cast<int>(i), 0), lv.at(static_cast<int>(i), 1),
                  lv.at(static_cast<int>(i), 2)};
    return out;
}

namespace {

struct BeamHypothesis {
    std::vector<int> tokens;
    double sum_logp = 0.0;
};

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<int> Model::generate_beam(const std::vector<int>& input_ids, int beam_size,
                                      int max_new_tokens) const {
    if (beam_size < 1) beam_size = 1;
    const int cap = std::min(max_new_tokens, config().max_len - 1);

    Transformer<float>::Ctx ectx(false);
    int enc = tf_.encode(ectx, input_ids);
    nn::Tensor<float> enc_states = ectx.g.val(enc);

    auto last_step_logp = [&](const std::vector<int>& prefix) {
        Transformer<float>::Ctx ctx(false);
        int enc_leaf = ctx.g.leaf(enc_states);
        std::vector<int> dec_in;
        dec_in.reserve(prefix.size() + 1);
        dec_in.push_back(special::kPad);
        dec_in.insert(dec_in.end(), prefix.begin(), prefix.end());
        int states = tf_.decode(ctx, enc_leaf, dec_in);
        int logits = tf_.lm_logits(ctx, states);
        const nn::Tensor<float>& lv = ctx.g.val(logits);
        std::vector<float> row(lv.row(lv.rows - 1), lv.row(lv.rows - 1) + lv.cols);
        return nn::log_softmax(row);
    };

    std::vector<BeamHypothesis> active{{{}, 0.0}};
    struct Finished {
        std::vector<int> tokens;
        double score;  // sum log-probability / length (normalization exponent 1)
    };
    std::vector<Finished> finished;

    for (int step = 0; step < cap && !active.empty(); ++step) {
        struct Candidate {
            int beam;
            int token;
            double sum;
        };
        std::vector<Candidate> candidates;
        candidates.reserve(active.size() * static_cast<std::size_t>(config().vocab_size));
        for (std::size_t b = 0; b < active.size(); ++b) {
            auto logp = last_step_logp(active[b].tokens);
            for (int t = 0; t < static_cast<int>(logp.size()); ++t)
                candidates.push_back(
                    {static_cast<int>(b), t, active[b].sum_logp + static_cast<double>(logp[t])});
        }
        std::size_t keep = std::min<std::size_t>(candidates.size(),
                                                 static_cast<std::size_t>(beam_size));
        std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                          [](const Candidate& a, const Candidate& b) {
                              if (a.sum != b.sum) return a.sum > b.sum;
                              if (a.token != b.token) return a.token < b.token;
                              return a.beam < b.beam;
                          });
        std::vector<BeamHypothesis> next;
        for (std::size_t c = 0; c < keep; ++c) {
            const Candidate& cand = candidates[c];
            BeamHypothesis hyp = active[static_cast<std::size_t>(cand.beam)];
            hyp.tokens.push_back(cand.token);
            hyp.sum_logp = cand.sum;
            if (cand.token == special::kEos) {
                finished.push_back(
                    {hyp.tokens, hyp.sum_logp / static_cast<double>(hyp.tokens.size())});
            } else {
                next.push_back(std::move(hyp));
            }
        }
        active = std::move(next);
    }
    for (auto& hyp : active) {
        if (hyp.tokens.empty()) continue;
        finished.push_back({hyp.tokens, hyp.sum_logp / static_cast<double>(hyp.tokens.size())});
    }
    if (finished.empty()) return {special::kEos};

    const Finished* best = &finished[0];
    for (const auto& f : finished) {
        if (f.score > best->score || (f.score == best->score && lex_less(f.tokens, best->tokens)))
            best = &f;
    }
    return best->tokens;
}

std::vector<int> Model::generate_greedy(const std::vector<int>& input_ids,
                                        int max_new_tokens) const {
    const int cap = std::min(max_new_tokens, config().max_len - 1);
    Transformer<float>::Ctx ectx(false);
    int enc = tf_.encode(ectx, input_ids);
    nn::Tensor<float> enc_states = ectx.g.val(enc);

    std::vector<int> out;
    for (int step = 0; step < cap; ++step) {
        Transformer<float>::Ctx ctx(false);
        int enc_leaf = ctx.g.leaf(enc_states);
        std::vector<int> dec_in;
        dec_in.push_back(special::kPad);
        dec_in.insert(dec_in.end(), out.begin(), out.end());
        int states = tf_.decode(ctx, enc_leaf, dec_in);
        int logits = tf_.lm_logits(ctx, states);
        const nn::Tensor<float>& lv = ctx.g.val(logits);
        const float* row = lv.row(lv.rows - 1);
        int best = 0;
        for (int t = 1; t < lv.cols; ++t)
            if (row[t] > row[best]) best = t;
        out.push_back(best);
        if (best == special::kEos) break;
    }
    return out;
}

}  // namespace revkit
