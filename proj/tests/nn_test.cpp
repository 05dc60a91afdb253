// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/nn.hpp"

#include <doctest.h>

#include <functional>

#include "revkit/common.hpp"

using namespace revkit;
using nn::Graph;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(Rng& rng, int r, int c, double scale = 1.0) {
    Tensor<double> t(r, c);
    for (auto& x : t.v) x = rng.normal() * scale;
    return t;
}

// Central finite differences of a scalar-valued graph builder with respect
// to one入input tensor, compared against the analytic gradient.
double max_rel_error(Tensor<double> input,
                     const std::function<int(Graph<double>&, int)>& build) {
    Graph<double> g;
    int leaf = g.leaf(input);
    int loss = build(g, leaf);
    g.backward(loss);
    Tensor<double> analytic = g.leaf_grad(leaf);

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < input.v.size(); ++i) {
        double keep = input.v[i];
        input.v[i] = keep + h;
        Graph<double> gp;
        double up = gp.val(build(gp, gp.leaf(input))).v[0];
        input.v[i] = keep - h;
        Graph<double> gm;
        double down = gm.val(build(gm, gm.leaf(input))).v[0];
        input.v[i] = keep;
        double fd = (up - down) / (2 * h);
        double denom = std::max({std::abs(fd), std::abs(analytic.v[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - analytic.v[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("softmax rows sum to one") {
    Rng rng(4);
    for (int iter = 0; iter < 200; ++iter) {
        int n = 2 + static_cast<int>(rng.uniform(20));
        std::vector<double> logits(static_cast<std::size_t>(n));
        for (auto& x : logits) x = rng.normal() * 5;
        auto p = nn::softmax(logits);
        double sum = 0;
        for (double v : p) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        auto lp = nn::log_softmax(logits);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(std::exp(lp[i]) == doctest::Approx(p[i]).epsilon(1e-9));
    }
}

TEST_CASE("linear gradient matches finite differences") {
    Rng rng(11);
    Tensor<double> x = random_tensor(rng, 3, 4);
    Tensor<double> w = random_tensor(rng, 5, 4);
    Tensor<double> b = random_tensor(rng, 1, 5);
    std::vector<int> targets{1, 4, 0};

    auto build_for = [&](int which) {
        return std::function<int(Graph<double>&, int)>([&, which](Graph<double>& g, int leaf) {
            int xs = which == 0 ? leaf : g.leaf(x);
            int ws = which == 1 ? leaf : g.leaf(w);
            int bs = which == 2 ? leaf : g.leaf(b);
            return g.ce_mean(g.linear(xs, ws, bs), targets);
        });
    };
    CHECK(max_rel_error(x, build_for(0)) < 1e-5);
    CHECK(max_rel_error(w, build_for(1)) < 1e-5);
    CHECK(max_rel_error(b, build_for(2)) < 1e-5);
}

TEST_CASE("layer_norm gradient matches finite differences") {
    Rng rng(12);
    Tensor<double> x = random_tensor(rng, 3, 6);
    Tensor<double> gam = random_tensor(rng, 1, 6, 0.5);
    for (auto& v : gam.v) v += 1.0;
    Tensor<double> bet = random_tensor(rng, 1, 6, 0.5);
    std::vector<int> targets{2, 0, 5};

    auto build_for = [&](int which) {
        return std::function<int(Graph<double>&, int)>([&, which](Graph<double>& g, int leaf) {
            int xs = which == 0 ? leaf : g.leaf(x);
            int gs = which == 1 ? leaf : g.leaf(gam);
            int bs = which == 2 ? leaf : g.leaf(bet);
            return g.ce_mean(g.layer_norm(xs, gs, bs), targets);
        });
    };
    CHECK(max_rel_error(x, build_for(0)) < 1e-5);
    CHECK(max_rel_error(gam, build_for(1)) < 1e-5);
    CHECK(max_rel_error(bet, build_for(2)) < 1e-5);
}

TEST_CASE("gelu gradient matches finite differences") {
    Rng rng(13);
    Tensor<double> x = random_tensor(rng, 2, 5);
    std::vector<int> targets{3, 1};
    auto build = std::function<int(Graph<double>&, int)>(
        [&](Graph<double>& g, int leaf) { return g.ce_mean(g.gelu(leaf), targets); });
    CHECK(max_rel_error(x, build) < 1e-5);
}

TEST_CASE("mha gradient matches finite differences") {
    Rng rng(14);
    const int m = 4, n = 3, d = 6, heads = 2;
    Tensor<double> q = random_tensor(rng, m, d);
    Tensor<double> k = random_tensor(rng, n, d);
    Tensor<double> v = random_tensor(rng, n, d);
    std::vector<int> targets{0, 2, 5, 1};

    for (int which = 0; which < 3; ++which) {
        auto build = std::function<int(Graph<double>&, int)>([&, which](Graph<double>& g,
                                                                        int leaf) {
            int qs = which == 0 ? leaf : g.leaf(q);
            int ks = which == 1 ? leaf : g.leaf(k);
            int vs = which == 2 ? leaf : g.leaf(v);
            return g.ce_mean(g.mha(qs, ks, vs, heads, false), targets);
        });
        Tensor<double>& probe = which == 0 ? q : (which == 1 ? k : v);
        CHECK(max_rel_error(probe, build) < 1e-5);
    }

    // Causal self-attention variant.
    Tensor<double> sq = random_tensor(rng, n, d);
    auto build_causal = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.mha(leaf, g.leaf(k), g.leaf(v), heads, true), {0, 1, 2});
    });
    CHECK(max_rel_error(sq, build_causal) < 1e-5);
}

TEST_CASE("embedding and rows_select gradients") {
    Rng rng(15);
    Tensor<double> table = random_tensor(rng, 7, 4);
    std::vector<int> ids{2, 5, 2, 0};
    std::vector<int> targets{1, 3, 0, 2};
    auto build = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.embedding(leaf, ids), targets);
    });
    CHECK(max_rel_error(table, build) < 1e-5);

    auto build_rows = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.rows_select(leaf, {1, 1, 6}), {0, 3, 2});
    });
    CHECK(max_rel_error(table, build_rows) < 1e-5);
}

TEST_CASE("matmul_nt and add gradients") {
    Rng rng(16);
    Tensor<double> a = random_tensor(rng, 3, 4);
    Tensor<double> b = random_tensor(rng, 5, 4);
    std::vector<int> targets{4, 0, 3};
    auto build_a = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.matmul_nt(leaf, g.leaf(b)), targets);
    });
    auto build_b = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.matmul_nt(g.leaf(a), leaf), targets);
    });
    CHECK(max_rel_error(a, build_a) < 1e-5);
    CHECK(max_rel_error(b, build_b) < 1e-5);

    Tensor<double> c = random_tensor(rng, 3, 5);
    auto build_add = std::function<int(Graph<double>&, int)>([&](Graph<double>& g, int leaf) {
        return g.ce_mean(g.add(g.matmul_nt(g.leaf(a), g.leaf(b)), leaf), targets);
    });
    CHECK(max_rel_error(c, build_add) < 1e-5);
}

TEST_CASE("bce_logit matches the textbook formula and gradient") {
    Rng rng(17);
    for (int iter = 0; iter < 40; ++iter) {
        double z = rng.normal() * 3;
        int y = static_cast<int>(rng.uniform(2));
        Tensor<double> zt(1, 1);
        zt.v[0] = z;
        auto build = std::function<int(Graph<double>&, int)>(
            [&](Graph<double>& g, int leaf) { return g.bce_logit(leaf, y); });
        Graph<double> g;
        int leaf = g.leaf(zt);
        int loss = build(g, leaf);
        double p = 1.0 / (1.0 + std::exp(-z));
        double expect = y ? -std::log(p) : -std::log(1 - p);
        CHECK(g.val(loss).v[0] == doctest::Approx(expect).epsilon(1e-9));
        CHECK(max_rel_error(zt, build) < 1e-6);
    }
}

TEST_CASE("ce_mean matches uniform analytic value") {
    Tensor<double> logits(2, 9);
    Graph<double> g;
    int loss = g.ce_mean(g.leaf(logits), {3, 7});
    CHECK(g.val(loss).v[0] == doctest::Approx(std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("dropout disabled is identity, enabled rescales") {
    Rng rng(18);
    Tensor<double> x = random_tensor(rng, 8, 8);
    Graph<double> g;
    int leaf = g.leaf(x);
    CHECK(g.dropout(leaf, 0.0, rng) == leaf);

    int dropped = g.dropout(leaf, 0.5, rng);
    const Tensor<double>& out = g.val(dropped);
    int zeros = 0;
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        if (out.v[i] == 0.0)
            ++zeros;
        else
            CHECK(out.v[i] == doctest::Approx(x.v[i] * 2.0));
    }
    CHECK(zeros > 8);
    CHECK(zeros < 56);
}
