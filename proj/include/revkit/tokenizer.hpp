// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revkit {

// Reserved token ids. BPE-produced ids start at special::kCount; the byte
// alphabet occupies [kCount, kCount + 256) and merge results follow.
namespace special {
inline constexpr int kPad = 0;
inline constexpr int kCls = 1;
inline constexpr int kEos = 2;
inline constexpr int kMask = 3;
inline constexpr int kAdd = 4;
inline constexpr int kDel = 5;
inline constexpr int kKeep = 6;
inline constexpr int kMsg = 7;
inline constexpr int kSentinelBase = 8;
inline constexpr int kNumSentinels = 100;
inline constexpr int kCount = kSentinelBase + kNumSentinels;  // 108

inline constexpr int sentinel(int i) { return kSentinelBase + i; }
}  // namespace special

struct TokenizerError : std::runtime_error {
    enum class Kind { VocabTooSmall, IdOutOfRange, BadFormat };
    Kind kind;
    TokenizerError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Byte-level BPE vocabulary. Immutable once built; encode/decode are pure.
class Vocab {
public:
    static constexpr int kByteBase = special::kCount;

    Vocab() = default;

    int size() const { return kByteBase + static_cast<int>(tokens_.size()); }
    int num_merges() const { return static_cast<int>(merges_.size()); }

    static bool is_special(int id) { return id >= 0 && id < kByteBase; }
    static std::string special_name(int id);  // "[CLS]", "[SENTINEL_3]", ...

    // Byte content of a non-special token. Precondition: kByteBase <= id < size().
    const std::string& token_bytes(int id) const { return tokens_[id - kByteBase]; }

    // Merge pairs in training order; result id of merge r is kByteBase+256+r.
    const std::vector<std::pair<int, int>>& merges() const { return merges_; }

    std::uint64_t fingerprint() const;

    std::string to_json_string() const;
    static Vocab from_json_string(std::string_view text);
    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

private:
    friend Vocab train_bpe(const std::vector<std::string>& corpus, int vocab_size);

    std::vector<std::string> tokens_;              // index = id - kByteBase
    std::vector<std::pair<int, int>> merges_;
};

// Greedy highest-frequency pair merging until vocab_size is reached or no
// pair occurs at least twice. Ties break toward the lexicographically
// smallest (left bytes, right bytes) pair. Deterministic.
Vocab train_bpe(const std::vector<std::string>& corpus, int vocab_size);

// Byte-level BPE encoding; never emits special ids.
std::vector<int> encode(std::string_view text, const Vocab& vocab);

// Inverse of encode; special ids render as their bracketed names.
std::string decode(const std::vector<int>& ids, const Vocab& vocab);

}  // namespace revkit
