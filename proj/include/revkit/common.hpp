// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace revkit {

inline constexpr char kToolVersion[] = "0.1.0";

// Deterministic splitmix64 generator. Used everywhere a seeded decision is
// made so results do not depend on the standard library's distributions.
struct Rng {
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform(std::uint64_t n) { return next() % n; }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller.
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Key-derivation helper: independent RNG streams from (seed, stream ids).
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

// FNV-1a over raw bytes, chainable through the seed argument.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// UTF-8 handling. repair_utf8 replaces every invalid sequence with U+FFFD.
bool is_valid_utf8(std::string_view s);
std::string repair_utf8(std::string_view s);

// RFC 3339 timestamps ("2023-01-02T03:04:05Z" or with a numeric offset).
// parse returns seconds since the Unix epoch; throws std::invalid_argument.
std::int64_t parse_rfc3339(std::string_view s);
std::string format_rfc3339(std::int64_t epoch_seconds);

// Split on '\n'. A trailing newline does not produce an empty final element.
std::vector<std::string> split_lines(std::string_view text);

std::string join_lines(const std::vector<std::string>& lines);

std::string to_lower(std::string_view s);

// Whitespace-delimited tokens.
std::vector<std::string> split_words(std::string_view s);

}  // namespace revkit
