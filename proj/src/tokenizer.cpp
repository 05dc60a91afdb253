// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "revkit/common.hpp"

namespace revkit {

namespace {

constexpr const char* kSpecialNames[special::kSentinelBase] = {
    "PAD", "CLS", "EOS", "MASK", "ADD", "DEL", "KEEP", "MSG",
};

std::uint64_t pair_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::string base64_encode(std::string_view in) {
    static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= in.size()) {
        std::uint32_t v = (static_cast<unsigned char>(in[i]) << 16) |
                          (static_cast<unsigned char>(in[i + 1]) << 8) |
                          static_cast<unsigned char>(in[i + 2]);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += tbl[v & 63];
        i += 3;
    }
    if (i + 1 == in.size()) {
        std::uint32_t v = static_cast<unsigned char>(in[i]) << 16;
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == in.size()) {
        std::uint32_t v = (static_cast<unsigned char>(in[i]) << 16) |
                          (static_cast<unsigned char>(in[i + 1]) << 8);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view in) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    int buf = 0, bits = 0;
    for (char c : in) {
        if (c == '=') break;
        int v = val(c);
        if (v < 0) throw TokenizerError(TokenizerError::Kind::BadFormat, "bad base64");
        buf = (buf << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out += static_cast<char>((buf >> bits) & 0xFF);
        }
    }
    return out;
}

}  // namespace

std::string Vocab::special_name(int id) {
    if (id < special::kSentinelBase)
        return std::string("[") + kSpecialNames[id] + "]";
    return "[SENTINEL_" + std::to_string(id - special::kSentinelBase) + "]";
}

std::uint64_t Vocab::fingerprint() const {
    std::uint64_t h = fnv1a64("revkit-vocab-v1");
    for (const auto& t : tokens_) {
        h = fnv1a64(t, h);
        h = fnv1a64("\x1f", h);
    }
    for (const auto& [a, b] : merges_) {
        h = fnv1a64(std::to_string(a) + "," + std::to_string(b) + ";", h);
    }
    return h;
}

std::string Vocab::to_json_string() const {
    nlohmann::json j;
    auto& toks = j["tokens"] = nlohmann::json::array();
    for (const auto& t : tokens_) toks.push_back(base64_encode(t));
    auto& merges = j["merges"] = nlohmann::json::array();
    for (const auto& [a, b] : merges_) merges.push_back(nlohmann::json::array({a, b}));
    auto& specials = j["specials"] = nlohmann::json::object();
    for (int id = 0; id < special::kSentinelBase; ++id) specials[kSpecialNames[id]] = id;
    for (int i = 0; i < special::kNumSentinels; ++i)
        specials["SENTINEL_" + std::to_string(i)] = special::sentinel(i);
    return j.dump();
}

Vocab Vocab::from_json_string(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Vocab v;
    for (const auto& t : j.at("tokens")) v.tokens_.push_back(base64_decode(t.get<std::string>()));
    for (const auto& m : j.at("merges")) v.merges_.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    if (v.tokens_.size() < 256 || v.tokens_.size() != 256 + v.merges_.size())
        throw TokenizerError(TokenizerError::Kind::BadFormat, "token/merge lists inconsistent");
    return v;
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TokenizerError(TokenizerError::Kind::BadFormat, "cannot write " + path);
    out << to_json_string() << "\n";
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TokenizerError(TokenizerError::Kind::BadFormat, "cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

Vocab train_bpe(const std::vector<std::string>& corpus, int vocab_size) {
    if (vocab_size < Vocab::kByteBase + 256)
        throw TokenizerError(TokenizerError::Kind::VocabTooSmall,
                             "vocab_size must be at least " + std::to_string(Vocab::kByteBase + 256));

    Vocab vocab;
    vocab.tokens_.reserve(static_cast<std::size_t>(vocab_size - Vocab::kByteBase));
    for (int b = 0; b < 256; ++b) vocab.tokens_.push_back(std::string(1, static_cast<char>(b)));

    // Token stream over the whole corpus as a doubly linked list; strings do
    // not touch, so pairs never span corpus entries.
    std::vector<std::int32_t> tok, nxt, prv;
    std::size_t total = 0;
    for (const auto& s : corpus) total += s.size();
    tok.reserve(total);
    nxt.reserve(total);
    prv.reserve(total);
    for (const auto& s : corpus) {
        std::int32_t start = static_cast<std::int32_t>(tok.size());
        for (unsigned char c : s) {
            std::int32_t i = static_cast<std::int32_t>(tok.size());
            tok.push_back(Vocab::kByteBase + c);
            prv.push_back(i == start ? -1 : i - 1);
            nxt.push_back(-2);  // fixed up below
        }
        for (std::int32_t i = start; i < static_cast<std::int32_t>(tok.size()); ++i)
            nxt[i] = (i + 1 < static_cast<std::int32_t>(tok.size())) ? i + 1 : -1;
        if (!tok.empty()) nxt.back() = -1;
    }

    std::unordered_map<std::uint64_t, std::int64_t> count;
    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> where;

    struct HeapEntry {
        std::int64_t count;
        int a, b;
    };
    auto bytes_of = [&](int id) -> const std::string& { return vocab.tokens_[id - Vocab::kByteBase]; };
    auto heap_less = [&](const HeapEntry& x, const HeapEntry& y) {
        if (x.count != y.count) return x.count < y.count;  // max-heap on count
        const std::string& xa = bytes_of(x.a);
        const std::string& ya = bytes_of(y.a);
        if (xa != ya) return xa > ya;  // smaller bytes win
        return bytes_of(x.b) > bytes_of(y.b);
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(heap_less)> heap(heap_less);

    auto bump = [&](int a, int b, std::int32_t pos) {
        std::uint64_t key = pair_key(a, b);
        std::int64_t c = ++count[key];
        where[key].push_back(pos);
        heap.push({c, a, b});
    };
    auto drop = [&](int a, int b) { --count[pair_key(a, b)]; };

    for (std::int32_t i = 0; i < static_cast<std::int32_t>(tok.size()); ++i)
        if (nxt[i] >= 0) bump(tok[i], tok[nxt[i]], i);

    std::unordered_set<std::string> existing(vocab.tokens_.begin(), vocab.tokens_.end());

    while (vocab.size() < vocab_size && !heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        std::uint64_t key = pair_key(top.a, top.b);
        auto it = count.find(key);
        std::int64_t current = it == count.end() ? 0 : it->second;
        if (current != top.count) {
            if (current >= 2) heap.push({current, top.a, top.b});
            continue;
        }
        if (current < 2) continue;

        std::string merged_bytes = bytes_of(top.a) + bytes_of(top.b);
        if (existing.count(merged_bytes)) {
            // Two different pairs can concatenate to the same byte string; a
            // second token with identical bytes would be unreachable, so the
            // pair is retired instead.
            count.erase(key);
            where.erase(key);
            continue;
        }

        int new_id = vocab.size();
        vocab.tokens_.push_back(merged_bytes);
        vocab.merges_.emplace_back(top.a, top.b);
        existing.insert(merged_bytes);

        std::vector<std::int32_t> positions = std::move(where[key]);
        where.erase(key);
        std::sort(positions.begin(), positions.end());
        for (std::int32_t i : positions) {
            std::int32_t j = nxt[i];
            if (j < 0 || tok[i] != top.a || tok[j] != top.b) continue;  // stale
            std::int32_t p = prv[i];
            std::int32_t q = nxt[j];
            if (p >= 0) drop(tok[p], top.a);
            drop(top.a, top.b);
            if (q >= 0) drop(top.b, tok[q]);
            tok[i] = new_id;
            tok[j] = -1;
            nxt[i] = q;
            if (q >= 0) prv[q] = i;
            if (p >= 0) bump(tok[p], new_id, p);
            if (q >= 0) bump(new_id, tok[q], i);
        }
        count.erase(key);
    }
    return vocab;
}

std::vector<int> encode(std::string_view text, const Vocab& vocab) {
    std::vector<int> seq;
    seq.reserve(text.size());
    for (unsigned char c : text) seq.push_back(Vocab::kByteBase + c);
    if (seq.empty()) return seq;

    std::unordered_map<std::uint64_t, int> rank;
    rank.reserve(vocab.merges().size() * 2);
    for (std::size_t r = 0; r < vocab.merges().size(); ++r) {
        const auto& [a, b] = vocab.merges()[r];
        rank[pair_key(a, b)] = static_cast<int>(r);
    }

    // Repeatedly apply the lowest-ranked merge present in the sequence,
    // replacing occurrences left to right.
    while (seq.size() > 1) {
        int best_rank = -1;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            auto it = rank.find(pair_key(seq[i], seq[i + 1]));
            if (it != rank.end() && (best_rank < 0 || it->second < best_rank))
                best_rank = it->second;
        }
        if (best_rank < 0) break;
        const auto& [a, b] = vocab.merges()[static_cast<std::size_t>(best_rank)];
        int merged_id = Vocab::kByteBase + 256 + best_rank;
        std::vector<int> out;
        out.reserve(seq.size());
        std::size_t i = 0;
        while (i < seq.size()) {
            if (i + 1 < seq.size() && seq[i] == a && seq[i + 1] == b) {
                out.push_back(merged_id);
                i += 2;
            } else {
                out.push_back(seq[i]);
                ++i;
            }
        }
        seq = std::move(out);
    }
    return seq;
}

std::string decode(const std::vector<int>& ids, const Vocab& vocab) {
    std::string out;
    for (int id : ids) {
        if (id < 0 || id >= vocab.size())
            throw TokenizerError(TokenizerError::Kind::IdOutOfRange,
                                 "token id " + std::to_string(id) + " out of range");
        if (Vocab::is_special(id))
            out += Vocab::special_name(id);
        else
            out += vocab.token_bytes(id);
    }
    return out;
}

}  // namespace revkit
