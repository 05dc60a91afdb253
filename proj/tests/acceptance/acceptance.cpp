// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/corpus.hpp"
#include "revkit/diff.hpp"
#include "revkit/ingest.hpp"
#include "revkit/metrics.hpp"
#include "revkit/model.hpp"
#include "revkit/objectives.hpp"
#include "revkit/tokenizer.hpp"
#include "revkit/trainer.hpp"

using namespace revkit;

namespace {

struct Harness {
    int failures = 0;

    void report(int number, const std::string& name, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }

    void run(int number, const std::string& name,
             const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [pass, detail] = fn();
            report(number, name, pass, detail);
        } catch (const std::exception& e) {
            report(number, name, false, std::string("exception: ") + e.what());
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixtures_dir() { return std::string(REVKIT_SOURCE_DIR) + "/fixtures/prs"; }

std::vector<std::string> random_lines(Rng& rng, int max_len) {
    static const char* pool[] = {"alpha",   "bravo", "charlie", "delta",     "echo",
                                 "foxtrot", "golf",  "",        " indented", "x = x + 1"};
    int n = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(max_len) + 1));
    std::vector<std::string> lines;
    for (int i = 0; i < n; ++i) lines.push_back(pool[rng.uniform(10)]);
    return lines;
}

std::string random_utf8(Rng& rng, int max_points) {
    std::string out;
    int n = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(max_points) + 1));
    for (int i = 0; i < n; ++i) {
        std::uint32_t cp;
        switch (rng.uniform(4)) {
            case 0: cp = static_cast<std::uint32_t>(rng.uniform(0x80)); break;
            case 1: cp = 0x80 + static_cast<std::uint32_t>(rng.uniform(0x800 - 0x80)); break;
            case 2:
                do {
                    cp = 0x800 + static_cast<std::uint32_t>(rng.uniform(0x10000 - 0x800));
                } while (cp >= 0xD800 && cp <= 0xDFFF);
                break;
            default:
                cp = 0x10000 + static_cast<std::uint32_t>(rng.uniform(0x110000 - 0x10000));
                break;
        }
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }
    return out;
}

int count_content_tokens(const std::vector<int>& ids) {
    int n = 0;
    for (int id : ids)
        if (!Vocab::is_special(id)) ++n;
    return n;
}

// ---- criterion 1 -----------------------------------------------------------

std::pair<bool, std::string> diff_round_trip() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1001);
    int checked = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        auto a = random_lines(rng, 50);
        auto b = random_lines(rng, 50);
        if (a.empty() && b.empty()) a.push_back("seed");
        CodePair pair = reconstruct(compute_diff(a, b));
        if (pair.old_lines != a || pair.new_lines != b)
            return {false, "mismatch at iteration " + std::to_string(iter)};
        ++checked;
    }
    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d/1000 pairs, %.2fs (budget 5s)", checked, secs);
    return {secs < 5.0, buf};
}

// ---- criterion 2 -----------------------------------------------------------

std::pair<bool, std::string> tokenizer_losslessness() {
    auto prs = load_fixtures(fixtures_dir());
    std::vector<std::string> corpus;
    for (const auto& pr : prs) {
        for (const auto& c : pr.commits)
            for (const auto& f : c.files) corpus.push_back(f.unified_diff);
        for (const auto& rc : pr.review_comments) corpus.push_back(rc.body);
    }
    Vocab vocab = train_bpe(corpus, 4000);

    std::size_t checked = 0;
    for (const auto& s : corpus) {
        if (decode(encode(s, vocab), vocab) != s)
            return {false, "fixture string " + std::to_string(checked) + " not lossless"};
        ++checked;
    }
    Rng rng(1002);
    for (int i = 0; i < 1000; ++i) {
        std::string s = random_utf8(rng, 80);
        if (decode(encode(s, vocab), vocab) != s)
            return {false, "random string " + std::to_string(i) + " not lossless"};
        ++checked;
    }
    return {true, std::to_string(checked) + " strings lossless (vocab " +
                      std::to_string(vocab.size()) + ")"};
}

// ---- criterion 3 -----------------------------------------------------------

std::pair<bool, std::string> masking_rates() {
    Vocab vocab = train_bpe({"zz"}, Vocab::kByteBase + 256);  // pure byte vocab

    // DRC: 50-token comments, 10,000 seeded samples.
    std::string comment;
    for (int i = 0; i < 50; ++i) comment += static_cast<char>('a' + (i % 26));
    double fraction_sum = 0;
    for (int i = 0; i < 10000; ++i) {
        Rng rng(static_cast<std::uint64_t>(i) + 1);
        TaskSample s = make_drc(comment, vocab, 512, rng);
        int masked = 50 - count_content_tokens(s.input_ids);
        fraction_sum += static_cast<double>(masked) / 50.0;
    }
    double mean = fraction_sum / 10000.0;
    if (std::abs(mean - 0.20) > 0.015) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "DRC mean masked fraction %.4f outside 0.200 +/- 0.015",
                      mean);
        return {false, buf};
    }

    // DCD: 20-line hunks mask exactly 3 lines every time.
    DiffHunk hunk;
    hunk.old_start = hunk.new_start = 1;
    for (int i = 0; i < 20; ++i) {
        hunk.lines.push_back({static_cast<LineTag>(i % 3), "line " + std::to_string(i)});
        if (hunk.lines.back().tag != LineTag::Add) ++hunk.old_count;
        if (hunk.lines.back().tag != LineTag::Del) ++hunk.new_count;
    }
    for (int i = 0; i < 10000; ++i) {
        Rng rng(static_cast<std::uint64_t>(i) + 77);
        TaskSample s = make_dcd(hunk, vocab, 4096, rng);
        int sentinels = 0;
        for (int id : s.input_ids)
            if (id >= special::kSentinelBase && id < special::kSentinelBase + 100) ++sentinels;
        if (sentinels != 3)
            return {false, "DCD masked " + std::to_string(sentinels) + " lines, expected 3"};
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "DRC mean %.4f in [0.185, 0.215]; DCD 3/20 lines always",
                  mean);
    return {true, buf};
}

// ---- criterion 4 -----------------------------------------------------------

std::pair<bool, std::string> loss_oracles() {
    if (std::abs(dtp_loss({0, 0, 0}, {1}) - std::log(3.0)) > 1e-6)
        return {false, "uniform DTP loss differs from ln 3"};
    const int vocab_n = 37;
    std::vector<double> uniform(vocab_n, 0.0);
    if (std::abs(seq_nll_loss(uniform, vocab_n, {5}) - std::log(vocab_n)) > 1e-6)
        return {false, "uniform seq NLL differs from ln V"};

    Rng rng(1004);
    double worst = 0;
    for (int iter = 0; iter < 100; ++iter) {
        int n = 1 + static_cast<int>(rng.uniform(8));
        std::vector<double> logits(static_cast<std::size_t>(n) * 3);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& x : logits) x = rng.normal() * 2;
        for (auto& l : labels) l = static_cast<int>(rng.uniform(3));
        double oracle = 0;
        for (int i = 0; i < n; ++i) {
            const double* row = logits.data() + i * 3;
            double denom = std::exp(row[0]) + std::exp(row[1]) + std::exp(row[2]);
            oracle -= std::log(std::exp(row[labels[static_cast<std::size_t>(i)]]) / denom);
        }
        worst = std::max(worst, std::abs(dtp_loss(logits, labels) - oracle / n));

        int k = 1 + static_cast<int>(rng.uniform(5));
        std::vector<double> seq_logits(static_cast<std::size_t>(k) * vocab_n);
        std::vector<int> targets(static_cast<std::size_t>(k));
        for (auto& x : seq_logits) x = rng.normal();
        for (auto& t : targets) t = static_cast<int>(rng.uniform(vocab_n));
        double seq_oracle = 0;
        for (int i = 0; i < k; ++i) {
            const double* row = seq_logits.data() + i * vocab_n;
            double denom = 0;
            for (int c = 0; c < vocab_n; ++c) denom += std::exp(row[c]);
            seq_oracle -= std::log(std::exp(row[targets[static_cast<std::size_t>(i)]]) / denom);
        }
        worst = std::max(worst,
                         std::abs(seq_nll_loss(seq_logits, vocab_n, targets) - seq_oracle / k));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "analytic values exact; oracle gap %.2e (budget 1e-9)", worst);
    return {worst < 1e-9, buf};
}

// ---- criterion 5 -----------------------------------------------------------

std::pair<bool, std::string> gradient_check() {
    auto t0 = std::chrono::steady_clock::now();
    ModelConfig cfg;
    cfg.n_enc_layers = 2;
    cfg.n_dec_layers = 2;
    cfg.n_heads = 2;
    cfg.d_model = 32;
    cfg.d_ff = 48;
    cfg.vocab_size = 120;
    cfg.max_len = 8;
    Transformer<double> tf(cfg, 31337);

    std::vector<int> input{special::kCls, special::kMask, 110, special::kMask, 111, 112};
    std::vector<int> target{113, 114, special::kEos};
    std::vector<int> tag_positions{1, 3};
    std::vector<int> tag_labels{0, 2};

    auto loss_graph = [&]() {
        Transformer<double>::Ctx ctx(true);
        int enc = tf.encode(ctx, input);
        int dec = tf.decode(ctx, enc, shift_right(target));
        int l_seq = ctx.g.ce_mean(tf.lm_logits(ctx, dec), target);
        int l_tag = ctx.g.ce_mean(tf.tag_logits_node(ctx, enc, tag_positions), tag_labels);
        int l_cls = ctx.g.bce_logit(tf.cls_logit(ctx, enc), 1);
        int total = ctx.g.add(ctx.g.add(l_seq, l_tag), l_cls);
        return std::make_pair(std::move(ctx), total);
    };

    auto [ctx, total] = loss_graph();
    ctx.g.backward(total);
    ModelParams<double> grads(cfg);
    tf.accumulate_grads(ctx, grads);

    const double h = 1e-5;
    auto params = tf.params().named_tensors();
    auto grad_list = grads.named_tensors();
    double worst = 0;
    std::size_t entries = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto* tensor = params[t].second;
        for (std::size_t i = 0; i < tensor->v.size(); ++i) {
            double keep = tensor->v[i];
            tensor->v[i] = keep + h;
            auto [cp, tp] = loss_graph();
            double up = cp.g.val(tp).v[0];
            tensor->v[i] = keep - h;
            auto [cm, tm] = loss_graph();
            double down = cm.g.val(tm).v[0];
            tensor->v[i] = keep;
            double fd = (up - down) / (2 * h);
            double analytic = grad_list[t].second->v[i];
            // Floor keeps vanishing gradients (|g| below the finite-difference
            // noise floor) from dominating the ratio.
            double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            worst = std::max(worst, std::abs(fd - analytic) / denom);
            ++entries;
        }
    }
    double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%zu parameters, max rel err %.2e (budget 1e-3), %.1fs (budget 120s)", entries,
                  worst, secs);
    return {worst < 1e-3 && secs < 120.0, buf};
}

// ---- criterion 6 -----------------------------------------------------------

struct ToyWorld {
    std::vector<PretrainExample> examples;
    std::vector<RefinementSample> refinement;
    Vocab vocab;
    ModelConfig model_config;
};

ToyWorld make_toy_world() {
    ToyWorld world;
    Rng rng(606);
    for (int i = 0; i < 32; ++i) {
        DiffHunk h;
        h.old_start = h.new_start = 1;
        // Line contents spell out their own tag, so every corrupted view of
        // a hunk is exactly recoverable; comments are keyed on the first
        // line's tag, which stays visible to the generator.
        int n = 4 + static_cast<int>(rng.uniform(3));
        for (int l = 0; l < n; ++l) {
            LineTag tag = static_cast<LineTag>(rng.uniform(3));
            std::string content;
            switch (tag) {
                case LineTag::Keep: content = "keep mark line"; break;
                case LineTag::Add: content = "plus mark line"; break;
                case LineTag::Del: content = "drop mark line"; break;
            }
            h.lines.push_back({tag, content});
            if (tag != LineTag::Add) ++h.old_count;
            if (tag != LineTag::Del) ++h.new_count;
        }
        PretrainExample ex;
        ex.hunk = h;
        if (i % 2 == 0) {
            const char* head = h.lines[0].tag == LineTag::Keep
                                   ? "kept"
                                   : (h.lines[0].tag == LineTag::Add ? "added" : "dropped");
            ex.comment = std::string("fix the ") + head + " part now";
        }
        world.examples.push_back(ex);
    }
    static const char* vars[] = {"alpha", "beta", "gamma", "delta",
                                 "count", "total", "limit", "index"};
    for (int i = 0; i < 8; ++i) {
        RefinementSample s;
        s.old_code = {std::string(vars[i]) + " = 1"};
        s.comment = "rename " + std::string(vars[i]) + " to " + vars[(i + 1) % 8];
        s.new_code = {std::string(vars[(i + 1) % 8]) + " = 1"};
        world.refinement.push_back(s);
    }
    std::vector<std::string> corpus;
    for (const auto& ex : world.examples) {
        for (const auto& l : ex.hunk.lines) corpus.push_back(l.content + "\n");
        if (!ex.comment.empty()) corpus.push_back(ex.comment);
    }
    for (const auto& s : world.refinement) {
        corpus.push_back(join_lines(s.old_code));
        corpus.push_back(s.comment);
        corpus.push_back(join_lines(s.new_code));
    }
    world.vocab = train_bpe(corpus, 420);
    world.model_config.n_enc_layers = 2;
    world.model_config.n_dec_layers = 2;
    world.model_config.n_heads = 4;
    world.model_config.d_model = 64;
    world.model_config.d_ff = 128;
    world.model_config.vocab_size = world.vocab.size();
    world.model_config.max_len = 128;
    return world;
}

std::pair<bool, std::string> overfit_suite() {
    auto t0 = std::chrono::steady_clock::now();
    ToyWorld world = make_toy_world();

    TrainConfig tc;
    tc.lr = 3e-3;
    tc.batch_size = 16;
    tc.warmup_steps = 50;
    tc.total_steps = 500;
    tc.seed = 2027;
    tc.eval_every = 250;
    tc.max_len = 128;

    Checkpoint init = init_model(world.model_config, 515);
    std::vector<TrainLogEntry> log;
    Checkpoint pretrained =
        pretrain(PretrainData::from_examples(world.examples), init, tc, world.vocab, &log);

    // Per-task loss drop: mean of the last 10 batches of each task must be
    // at most 10% of the mean of its first 10.
    std::ostringstream detail;
    bool ok = true;
    for (TaskKind kind : {TaskKind::Dtp, TaskKind::Dcd, TaskKind::Drc, TaskKind::Rcg}) {
        std::vector<double> losses;
        for (const auto& e : log)
            if (e.task == kind) losses.push_back(e.loss);
        if (losses.size() < 20) {
            ok = false;
            detail << task_kind_name(kind) << ": only " << losses.size() << " batches; ";
            continue;
        }
        double first = 0, last = 0;
        for (int i = 0; i < 10; ++i) {
            first += losses[static_cast<std::size_t>(i)];
            last += losses[losses.size() - 10 + static_cast<std::size_t>(i)];
        }
        first /= 10;
        last /= 10;
        double drop = 1.0 - last / first;
        detail << task_kind_name(kind) << " drop " << static_cast<int>(drop * 100) << "%; ";
        if (drop < 0.90) ok = false;
    }

    // Classifier overfit: 8 labeled toy samples to 100% train accuracy.
    std::vector<QualitySample> cls_train;
    for (int i = 0; i < 8; ++i)
        cls_train.push_back({world.examples[static_cast<std::size_t>(i)].hunk, i % 2});
    TrainConfig cls_tc = tc;
    cls_tc.lr = 1e-3;
    cls_tc.total_steps = 200;
    cls_tc.warmup_steps = 10;
    cls_tc.batch_size = 8;
    Checkpoint cls_ckpt =
        finetune_classification(cls_train, {}, pretrained, cls_tc, world.vocab);
    Model cls_model(cls_ckpt);
    int correct = 0;
    for (const auto& q : cls_train) {
        auto ids = make_quality_sample(q.hunk, q.label, world.vocab, tc.max_len).input_ids;
        if ((cls_model.classify(ids) > 0.5 ? 1 : 0) == q.label) ++correct;
    }
    detail << "classifier " << correct << "/8; ";
    if (correct != 8) ok = false;

    // Refinement overfit: beam-1 exact match at 90%+ on the training set.
    const std::vector<RefinementSample>& ref_train = world.refinement;
    TrainConfig ref_tc = tc;
    ref_tc.lr = 2e-3;
    ref_tc.total_steps = 500;
    ref_tc.warmup_steps = 15;
    ref_tc.batch_size = 8;
    Checkpoint ref_ckpt = finetune_refinement(ref_train, {}, pretrained, ref_tc, world.vocab);
    Model ref_model(ref_ckpt);
    std::vector<std::string> preds, refs;
    for (const auto& s : ref_train) {
        auto input = encode_code_and_comment(s.old_code, s.comment, world.vocab, tc.max_len);
        auto out_ids = ref_model.generate_beam(input, 1, 32);
        std::vector<int> content;
        for (int id : out_ids)
            if (!Vocab::is_special(id)) content.push_back(id);
        preds.push_back(decode(content, world.vocab));
        refs.push_back(join_lines(s.new_code));
    }
    double em = exact_match(preds, refs);
    detail << "refinement EM " << em << "; ";
    if (em < 0.90) ok = false;

    double minutes = seconds_since(t0) / 60.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f min (budget 15)", minutes);
    detail << buf;
    if (minutes >= 15.0) ok = false;
    return {ok, detail.str()};
}

// ---- criterion 7 -----------------------------------------------------------

std::pair<bool, std::string> naive_copy_baseline() {
    auto prs = load_fixtures(fixtures_dir());
    std::vector<ReviewRecord> records;
    for (const auto& pr : prs) {
        auto batch = normalize(pr);
        records.insert(records.end(), batch.begin(), batch.end());
    }
    records = clean_comments(std::move(records));
    auto samples = build_refinement_dataset(records);
    if (samples.empty()) return {false, "fixture corpus produced no refinement samples"};

    auto preds = naive_copy(samples);
    std::vector<std::string> refs;
    std::vector<std::vector<std::string>> cand_tokens, ref_tokens;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        refs.push_back(join_lines(samples[i].new_code));
        cand_tokens.push_back(split_words(preds[i]));
        ref_tokens.push_back(split_words(refs[i]));
    }
    double em = exact_match(preds, refs);
    double bleu = bleu4(cand_tokens, ref_tokens);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu samples, EM %.2f (must be 0.00), BLEU %.2f (must be > 0)",
                  samples.size(), em, bleu);
    return {em == 0.0 && bleu > 0.0, buf};
}

// ---- criterion 8 -----------------------------------------------------------

double reference_bleu4(const std::vector<std::vector<std::string>>& cands,
                       const std::vector<std::vector<std::string>>& refs) {
    long long cand_len = 0, ref_len = 0;
    for (std::size_t s = 0; s < cands.size(); ++s) {
        cand_len += static_cast<long long>(cands[s].size());
        ref_len += static_cast<long long>(refs[s].size());
    }
    if (cand_len == 0) return 0.0;
    double log_sum = 0;
    for (int n = 1; n <= 4; ++n) {
        long long match = 0, total = 0;
        for (std::size_t s = 0; s < cands.size(); ++s) {
            std::map<std::string, long long> cg, rg;
            auto key = [&](const std::vector<std::string>& toks, std::size_t i) {
                std::string k;
                for (int j = 0; j < n; ++j) k += toks[i + j] + "\x1f";
                return k;
            };
            if (static_cast<int>(cands[s].size()) >= n)
                for (std::size_t i = 0; i + n <= cands[s].size(); ++i) cg[key(cands[s], i)]++;
            if (static_cast<int>(refs[s].size()) >= n)
                for (std::size_t i = 0; i + n <= refs[s].size(); ++i) rg[key(refs[s], i)]++;
            for (auto& [k, c] : cg) {
                total += c;
                auto it = rg.find(k);
                if (it != rg.end()) match += std::min(c, it->second);
            }
        }
        if (n >= 2 && match == 0) {
            match = 1;
            total += 1;
        }
        if (match == 0 || total == 0) return 0.0;
        log_sum += std::log(static_cast<double>(match) / static_cast<double>(total));
    }
    double bp = cand_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return 100.0 * std::exp(log_sum / 4.0) * bp;
}

std::pair<bool, std::string> bleu_oracle() {
    static const char* pool[] = {"the", "fix", "check", "null", "value",
                                 "method", "private", "return", "error", "add"};
    Rng rng(1008);
    double worst = 0;
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<std::vector<std::string>> cands, refs;
        int pairs = 1 + static_cast<int>(rng.uniform(5));
        for (int p = 0; p < pairs; ++p) {
            std::vector<std::string> c, r;
            int nc = 1 + static_cast<int>(rng.uniform(14));
            int nr = 1 + static_cast<int>(rng.uniform(14));
            for (int i = 0; i < nc; ++i) c.push_back(pool[rng.uniform(10)]);
            for (int i = 0; i < nr; ++i) r.push_back(pool[rng.uniform(10)]);
            cands.push_back(c);
            refs.push_back(r);
        }
        worst = std::max(worst, std::abs(bleu4(cands, refs) - reference_bleu4(cands, refs)));
        if (std::abs(bleu4(cands, cands) - 100.0) > 1e-9)
            return {false, "BLEU(x,x) != 100"};
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "50 corpora, max |gap| %.2e (budget 1e-9); BLEU(x,x)=100",
                  worst);
    return {worst < 1e-9, buf};
}

// ---- criterion 9 -----------------------------------------------------------

std::pair<bool, std::string> dataset_properties() {
    auto prs = load_fixtures(fixtures_dir());
    std::vector<ReviewRecord> records;
    for (const auto& pr : prs) {
        auto batch = normalize(pr);
        records.insert(records.end(), batch.begin(), batch.end());
    }
    records = clean_comments(std::move(records));

    SplitConfig split_cfg;
    split_cfg.train_projects = {"acme/rocket", "acme/widget", "blue/parser", "green/dbkit"};
    split_cfg.eval_projects = {"blue/cache", "green/webapp"};
    split_cfg.valid_fraction = 0.5;
    split_cfg.seed = 7;
    SplitResult split = split_by_project(records, split_cfg);

    // Pairwise-disjoint repo sets.
    std::set<std::string> train_repos, valid_repos, test_repos;
    for (const auto& r : split.train) train_repos.insert(r.repo);
    for (const auto& r : split.valid) valid_repos.insert(r.repo);
    for (const auto& r : split.test) test_repos.insert(r.repo);
    for (const auto& repo : valid_repos)
        if (train_repos.count(repo) || test_repos.count(repo))
            return {false, "repo " + repo + " appears in two splits"};
    for (const auto& repo : test_repos)
        if (train_repos.count(repo)) return {false, "repo " + repo + " appears in two splits"};

    // Balance within one sample on each split.
    auto serialize_all = [&](std::uint64_t seed) {
        std::string blob;
        for (const auto* part : {&split.train, &split.valid, &split.test}) {
            auto ds = build_quality_dataset(*part, seed);
            int pos = 0, neg = 0;
            for (const auto& s : ds) (s.label ? pos : neg)++;
            if (std::abs(pos - neg) > 1 && neg > 0)
                throw std::runtime_error("quality dataset unbalanced: " + std::to_string(pos) +
                                         " vs " + std::to_string(neg));
            for (const auto& s : ds) blob += quality_sample_to_json(s).dump() + "\n";
            for (const auto& c : build_comment_dataset(*part))
                blob += comment_sample_to_json(c).dump() + "\n";
            for (const auto& r : build_refinement_dataset(*part))
                blob += refinement_sample_to_json(r).dump() + "\n";
        }
        return blob;
    };
    std::string blob1 = serialize_all(42);
    std::string blob2 = serialize_all(42);
    if (blob1 != blob2) return {false, "same-seed rebuild differs byte-for-byte"};
    std::string blob3 = serialize_all(43);
    bool different = blob1 != blob3;

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "balanced, %zu/%zu/%zu records over disjoint repos, %zu-byte rebuild identical%s",
                  split.train.size(), split.valid.size(), split.test.size(), blob1.size(),
                  different ? "" : " (warning: seed change had no effect)");
    return {true, buf};
}

// ---- criterion 10 ----------------------------------------------------------

std::pair<bool, std::string> beam_search_checks() {
    // Beam 1 vs greedy over 20 fixture hunks through a seeded model.
    auto prs = load_fixtures(fixtures_dir());
    std::vector<DiffHunk> hunks;
    for (const auto& pr : prs) {
        for (const auto& c : pr.commits)
            for (const auto& f : c.files) {
                auto parsed = parse_unified_diff(f.unified_diff);
                hunks.insert(hunks.end(), parsed.begin(), parsed.end());
            }
        if (hunks.size() >= 20) break;
    }
    if (hunks.size() < 20) return {false, "not enough fixture hunks"};
    hunks.resize(20);

    std::vector<std::string> corpus;
    for (const auto& h : hunks)
        for (const auto& l : h.lines) corpus.push_back(l.content + "\n");
    Vocab vocab = train_bpe(corpus, 600);

    ModelConfig cfg;
    cfg.n_enc_layers = 2;
    cfg.n_dec_layers = 2;
    cfg.n_heads = 4;
    cfg.d_model = 64;
    cfg.d_ff = 128;
    cfg.vocab_size = vocab.size();
    cfg.max_len = 256;
    Model model(init_model(cfg, 99));

    for (std::size_t i = 0; i < hunks.size(); ++i) {
        auto input = encode_hunk(hunks[i], vocab, cfg.max_len);
        auto greedy = model.generate_greedy(input, 12);
        auto beam1 = model.generate_beam(input, 1, 12);
        if (greedy != beam1)
            return {false, "beam-1 differs from greedy on fixture input " + std::to_string(i)};
    }

    // Beam 3 vs exhaustive enumeration on a 5-token model.
    ModelConfig small;
    small.n_enc_layers = 1;
    small.n_dec_layers = 1;
    small.n_heads = 1;
    small.d_model = 8;
    small.d_ff = 16;
    small.vocab_size = 5;
    small.max_len = 8;
    int matches = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Model tiny(init_model(small, seed));
        std::vector<int> input{1, 3, 4};
        const int max_new = 3;

        std::vector<int> best_seq;
        double best_score = -1e300;
        std::function<void(std::vector<int>&, double)> walk = [&](std::vector<int>& prefix,
                                                                  double sum) {
            bool terminal = !prefix.empty() && (prefix.back() == special::kEos ||
                                                static_cast<int>(prefix.size()) == max_new);
            if (terminal) {
                double score = sum / static_cast<double>(prefix.size());
                if (score > best_score ||
                    (score == best_score &&
                     std::lexicographical_compare(prefix.begin(), prefix.end(), best_seq.begin(),
                                                  best_seq.end()))) {
                    best_score = score;
                    best_seq = prefix;
                }
                return;
            }
            std::vector<int> probe = prefix;
            probe.push_back(0);
            auto tf = tiny.forward_teacher_forced(input, probe);
            const float* row = tf.step_logits.row(tf.step_logits.rows - 1);
            std::vector<float> logits_row(row, row + tf.step_logits.cols);
            auto logp = nn::log_softmax(logits_row);
            for (int t = 0; t < small.vocab_size; ++t) {
                prefix.push_back(t);
                walk(prefix, sum + logp[static_cast<std::size_t>(t)]);
                prefix.pop_back();
            }
        };
        std::vector<int> prefix;
        walk(prefix, 0.0);
        if (tiny.generate_beam(input, 3, max_new) == best_seq) ++matches;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "beam-1 == greedy on 20 inputs; beam-3 == exhaustive on %d/5 seeded models",
                  matches);
    return {matches == 5, buf};
}

}  // namespace

int main() {
    Harness h;
    auto t0 = std::chrono::steady_clock::now();
    h.run(1, "diff round trip", diff_round_trip);
    h.run(2, "tokenizer losslessness", tokenizer_losslessness);
    h.run(3, "masking rates", masking_rates);
    h.run(4, "loss oracles", loss_oracles);
    h.run(5, "gradient check", gradient_check);
    h.run(6, "overfit suite", overfit_suite);
    h.run(7, "naive copy baseline", naive_copy_baseline);
    h.run(8, "BLEU oracle", bleu_oracle);
    h.run(9, "dataset properties", dataset_properties);
    h.run(10, "beam search", beam_search_checks);
    std::printf("%d/10 criteria passed in %.1f min\n", 10 - h.failures,
                seconds_since(t0) / 60.0);
    return h.failures == 0 ? 0 : 1;
}
