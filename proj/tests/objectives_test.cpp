// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/objectives.hpp"

#include <doctest.h>

#include <cmath>

using namespace revkit;

namespace {

// Byte-level vocabulary with no merges: token id == 108 + byte.
Vocab byte_vocab() { return train_bpe({"qqq"}, Vocab::kByteBase + 256); }

int byte_id(char c) { return Vocab::kByteBase + static_cast<unsigned char>(c); }

DiffHunk hunk_of(std::vector<TaggedLine> lines) {
    DiffHunk h;
    h.lines = std::move(lines);
    h.old_count = 0;
    h.new_count = 0;
    for (const auto& l : h.lines) {
        if (l.tag != LineTag::Add) ++h.old_count;
        if (l.tag != LineTag::Del) ++h.new_count;
    }
    return h;
}

int count_content_tokens(const std::vector<int>& ids) {
    int n = 0;
    for (int id : ids)
        if (!Vocab::is_special(id)) ++n;
    return n;
}

}  // namespace

TEST_CASE("encode_hunk basic layout") {
    Vocab v = byte_vocab();
    auto ids = encode_hunk(hunk_of({{LineTag::Keep, "a"}}), v, 512);
    CHECK(ids == std::vector<int>{special::kCls, special::kKeep, byte_id('a'), byte_id('\n')});

    auto empty_add = encode_hunk(hunk_of({{LineTag::Add, ""}}), v, 512);
    CHECK(empty_add == std::vector<int>{special::kCls, special::kAdd, byte_id('\n')});
}

TEST_CASE("encode_hunk truncates at max_len keeping the head") {
    Vocab v = byte_vocab();
    std::vector<TaggedLine> lines;
    for (int i = 0; i < 1000; ++i) lines.push_back({LineTag::Keep, "abcdef"});
    auto ids = encode_hunk(hunk_of(std::move(lines)), v, 512);
    CHECK(ids.size() == 512);
    CHECK(ids[0] == special::kCls);
}

TEST_CASE("encode_code_and_comment layout and budgets") {
    Vocab v = byte_vocab();
    auto ids = encode_code_and_comment({"x"}, "fix", v, 512);
    std::vector<int> want{special::kCls, byte_id('x'), byte_id('\n'), special::kMsg,
                          byte_id('f'), byte_id('i'), byte_id('x')};
    CHECK(ids == want);

    // Oversized code: the comment survives whole at the tail.
    std::vector<std::string> big_code(300, "abcdefghij");
    auto truncated = encode_code_and_comment(big_code, "keep me", v, 128);
    CHECK(truncated.size() <= 128);
    int msg_count = 0;
    std::size_t msg_at = 0;
    for (std::size_t i = 0; i < truncated.size(); ++i)
        if (truncated[i] == special::kMsg) {
            ++msg_count;
            msg_at = i;
        }
    CHECK(msg_count == 1);
    std::string tail;
    for (std::size_t i = msg_at + 1; i < truncated.size(); ++i)
        tail += static_cast<char>(truncated[i] - Vocab::kByteBase);
    CHECK(tail == "keep me");

    std::string huge_comment(200, 'y');
    CHECK_THROWS_AS(encode_code_and_comment({"x"}, huge_comment, v, 64), ObjectiveError);
}

TEST_CASE("make_dtp masks every tag") {
    Vocab v = byte_vocab();
    auto s = make_dtp(hunk_of({{LineTag::Keep, "k"}, {LineTag::Add, "a"}, {LineTag::Del, "d"}}),
                      v, 512);
    CHECK(s.kind == TaskKind::Dtp);
    REQUIRE(s.tag_positions.size() == 3);
    CHECK(s.tag_positions[0].label == 0);
    CHECK(s.tag_positions[1].label == 1);
    CHECK(s.tag_positions[2].label == 2);
    for (const auto& tp : s.tag_positions)
        CHECK(s.input_ids[static_cast<std::size_t>(tp.index)] == special::kMask);
    CHECK(s.input_ids[0] == special::kCls);
    CHECK(s.target_ids.empty());

    auto single = make_dtp(hunk_of({{LineTag::Add, "x"}}), v, 512);
    CHECK(single.tag_positions.size() == 1);
}

TEST_CASE("make_dtp masked count equals line count on a fixture set") {
    Vocab v = byte_vocab();
    Rng rng(5);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<TaggedLine> lines;
        int n = 1 + static_cast<int>(rng.uniform(12));
        for (int i = 0; i < n; ++i) {
            LineTag tag = static_cast<LineTag>(rng.uniform(3));
            lines.push_back({tag, "line"});
        }
        auto s = make_dtp(hunk_of(std::move(lines)), v, 4096);
        CHECK(static_cast<int>(s.tag_positions.size()) == n);
    }
}

TEST_CASE("make_dcd masks exactly round(0.15 n) lines, tags preserved") {
    Vocab v = byte_vocab();
    std::vector<TaggedLine> lines;
    for (int i = 0; i < 20; ++i)
        lines.push_back({i % 2 ? LineTag::Add : LineTag::Keep, "content line"});
    DiffHunk h = hunk_of(std::move(lines));

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        auto s = make_dcd(h, v, 4096, rng);
        int sentinels = 0;
        for (int id : s.input_ids)
            if (id >= special::kSentinelBase && id < special::kSentinelBase + 100) ++sentinels;
        CHECK(sentinels == 3);  // round(0.15 * 20)
        // Every line's tag token is still in the corrupted input.
        int tags = 0;
        for (int id : s.input_ids)
            if (id == special::kKeep || id == special::kAdd || id == special::kDel) ++tags;
        CHECK(tags == 20);
        CHECK(s.target_ids.back() == special::kEos);
    }
}

TEST_CASE("make_dcd single line hunk masks that line") {
    Vocab v = byte_vocab();
    Rng rng(3);
    auto s = make_dcd(hunk_of({{LineTag::Del, "gone"}}), v, 512, rng);
    CHECK(s.input_ids ==
          std::vector<int>{special::kCls, special::kDel, special::sentinel(0), byte_id('\n')});
    std::vector<int> want_target{special::sentinel(0), byte_id('g'), byte_id('o'), byte_id('n'),
                                 byte_id('e'), special::kEos};
    CHECK(s.target_ids == want_target);
}

TEST_CASE("make_dcd on 7-line hunks always masks exactly one line") {
    Vocab v = byte_vocab();
    DiffHunk h = hunk_of({{LineTag::Keep, "a"},
                          {LineTag::Keep, "b"},
                          {LineTag::Add, "c"},
                          {LineTag::Del, "d"},
                          {LineTag::Keep, "e"},
                          {LineTag::Add, "f"},
                          {LineTag::Keep, "g"}});
    int total_masked = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        Rng rng(static_cast<std::uint64_t>(i));
        auto s = make_dcd(h, v, 512, rng);
        int sentinels = 0;
        for (int id : s.input_ids)
            if (id >= special::kSentinelBase && id < special::kSentinelBase + 100) ++sentinels;
        total_masked += sentinels;
    }
    CHECK(total_masked == trials);  // k = max(1, round(1.05)) = 1 every time
}

TEST_CASE("make_drc masks exactly ceil(0.2 m) tokens without overlap") {
    Vocab v = byte_vocab();
    std::string comment10 = "abcdefghij";  // 10 byte tokens
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto s = make_drc(comment10, v, 512, rng);
        // Unmasked tokens surviving in the input: m - budget = 8.
        CHECK(count_content_tokens(s.input_ids) == 8);
        CHECK(s.target_ids.back() == special::kEos);
        // The target spells out exactly the masked tokens.
        CHECK(count_content_tokens(s.target_ids) == 2);
    }

    Rng rng(1);
    auto one = make_drc("z", v, 512, rng);
    CHECK(count_content_tokens(one.input_ids) == 0);
    CHECK(one.input_ids == std::vector<int>{special::kCls, special::sentinel(0)});
    CHECK(one.target_ids ==
          std::vector<int>{special::sentinel(0), byte_id('z'), special::kEos});
}

TEST_CASE("make_drc round trips through sentinel reassembly") {
    Vocab v = byte_vocab();
    std::string comment = "Please add a null check before dereferencing the pointer";
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        auto s = make_drc(comment, v, 512, rng);
        // Reassemble: walk the input, substituting each sentinel with its
        // span from the target.
        std::vector<std::vector<int>> spans(100);
        int current = -1;
        for (int id : s.target_ids) {
            if (id >= special::kSentinelBase && id < special::kSentinelBase + 100)
                current = id - special::kSentinelBase;
            else if (id != special::kEos && current >= 0)
                spans[static_cast<std::size_t>(current)].push_back(id);
        }
        std::vector<int> rebuilt;
        for (int id : s.input_ids) {
            if (id == special::kCls) continue;
            if (id >= special::kSentinelBase && id < special::kSentinelBase + 100) {
                for (int t : spans[static_cast<std::size_t>(id - special::kSentinelBase)])
                    rebuilt.push_back(t);
            } else {
                rebuilt.push_back(id);
            }
        }
        CHECK(decode(rebuilt, v) == comment);
    }
}

TEST_CASE("make_rcg is deterministic with EOS-terminated target") {
    Vocab v = byte_vocab();
    DiffHunk h = hunk_of({{LineTag::Add, "y = 1"}});
    auto a = make_rcg(h, "fix typo", v, 512);
    auto b = make_rcg(h, "fix typo", v, 512);
    CHECK(a == b);
    REQUIRE(!a.target_ids.empty());
    CHECK(a.target_ids.back() == special::kEos);
    std::vector<int> expected = encode("fix typo", v);
    expected.push_back(special::kEos);
    CHECK(a.target_ids == expected);
}

TEST_CASE("dtp_loss analytic values and oracle") {
    CHECK(dtp_loss({0, 0, 0}, {0}) == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(dtp_loss({1e9, 0, 0}, {0}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(dtp_loss({0, 0}, {0}), ObjectiveError);
    CHECK_THROWS_AS(dtp_loss({}, {}), ObjectiveError);

    // Independent oracle: plain softmax then -log p, averaged.
    Rng rng(17);
    for (int iter = 0; iter < 50; ++iter) {
        int n = 1 + static_cast<int>(rng.uniform(6));
        std::vector<double> logits(static_cast<std::size_t>(n) * 3);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& x : logits) x = rng.normal() * 2.0;
        for (auto& l : labels) l = static_cast<int>(rng.uniform(3));
        double oracle = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* row = logits.data() + i * 3;
            double denom = std::exp(row[0]) + std::exp(row[1]) + std::exp(row[2]);
            oracle += -std::log(std::exp(row[labels[static_cast<std::size_t>(i)]]) / denom);
        }
        oracle /= n;
        CHECK(dtp_loss(logits, labels) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("seq_nll_loss analytic values and oracle") {
    const int vocab = 11;
    std::vector<double> uniform(vocab, 0.0);
    CHECK(seq_nll_loss(uniform, vocab, {4}) ==
          doctest::Approx(std::log(static_cast<double>(vocab))).epsilon(1e-9));
    CHECK_THROWS_AS(seq_nll_loss({}, vocab, {}), ObjectiveError);

    Rng rng(23);
    for (int iter = 0; iter < 50; ++iter) {
        int k = 1 + static_cast<int>(rng.uniform(5));
        std::vector<double> logits(static_cast<std::size_t>(k) * vocab);
        std::vector<int> targets(static_cast<std::size_t>(k));
        for (auto& x : logits) x = rng.normal();
        for (auto& t : targets) t = static_cast<int>(rng.uniform(vocab));
        double oracle = 0.0;
        for (int i = 0; i < k; ++i) {
            const double* row = logits.data() + i * vocab;
            double denom = 0.0;
            for (int c = 0; c < vocab; ++c) denom += std::exp(row[c]);
            oracle += -std::log(std::exp(row[targets[static_cast<std::size_t>(i)]]) / denom);
        }
        oracle /= k;
        CHECK(seq_nll_loss(logits, vocab, targets) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("task sample json round trip") {
    Vocab v = byte_vocab();
    Rng rng(9);
    auto s = make_dcd(hunk_of({{LineTag::Keep, "aa"}, {LineTag::Add, "bb"}}), v, 512, rng);
    TaskSample back = task_sample_from_json(task_sample_to_json(s));
    CHECK(back == s);

    auto q = make_quality_sample(hunk_of({{LineTag::Add, "zz"}}), 1, v, 512);
    TaskSample qback = task_sample_from_json(task_sample_to_json(q));
    CHECK(qback == q);
    CHECK(qback.cls_label == 1);
}

TEST_CASE("losses are permutation invariant and non-negative") {
    Rng rng(41);
    std::vector<double> logits(5 * 3);
    std::vector<int> labels{0, 2, 1, 1, 0};
    for (auto& x : logits) x = rng.normal();
    double base = dtp_loss(logits, labels);
    CHECK(base >= 0.0);

    std::vector<std::size_t> perm{3, 1, 4, 0, 2};
    std::vector<double> plogits(5 * 3);
    std::vector<int> plabels(5);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (int c = 0; c < 3; ++c) plogits[i * 3 + c] = logits[perm[i] * 3 + c];
        plabels[i] = labels[perm[i]];
    }
    CHECK(dtp_loss(plogits, plabels) == doctest::Approx(base).epsilon(1e-12));

    const int vocab_n = 7;
    std::vector<double> seq(4 * vocab_n);
    std::vector<int> targets{1, 6, 0, 3};
    for (auto& x : seq) x = rng.normal();
    double sbase = seq_nll_loss(seq, vocab_n, targets);
    CHECK(sbase >= 0.0);
    std::vector<std::size_t> sperm{2, 0, 3, 1};
    std::vector<double> pseq(4 * vocab_n);
    std::vector<int> ptargets(4);
    for (std::size_t i = 0; i < sperm.size(); ++i) {
        for (int c = 0; c < vocab_n; ++c) pseq[i * vocab_n + c] = seq[sperm[i] * vocab_n + c];
        ptargets[i] = targets[sperm[i]];
    }
    CHECK(seq_nll_loss(pseq, vocab_n, ptargets) == doctest::Approx(sbase).epsilon(1e-12));
}
