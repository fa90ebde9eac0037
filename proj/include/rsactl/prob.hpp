// Copyright 2026 The rsactl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rsactl {

using TokenId = std::uint32_t;

// Excluded-token sentinel. Always test with is_excluded() before doing
// arithmetic with a log-probability.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_excluded(double logp) noexcept {
    return logp == kNegInf;
}

double log_sum_exp(std::span<const double> values);

/// Log-probabilities over a vocabulary (natural log). `normalized` records
/// whether log_sum_exp(logp) is known to be zero.
class TokenDist {
public:
    TokenDist() = default;
    explicit TokenDist(std::vector<double> logp, bool normalized = false);

    static TokenDist uniform(std::size_t vocab_size);
    static TokenDist from_probs(std::span<const double> probs);

    std::size_t size() const noexcept {
        return m_logp.size();
    }
    bool normalized() const noexcept {
        return m_normalized;
    }
    std::span<const double> logp() const noexcept {
        return m_logp;
    }
    double operator[](TokenId id) const {
        return m_logp.at(id);
    }
    double prob(TokenId id) const;
    std::vector<double> probs() const;

    TokenId argmax() const;
    std::size_t support_size() const;

private:
    std::vector<double> m_logp;
    bool m_normalized = false;
};

TokenDist normalize(const TokenDist &d);

struct TopK {
    std::size_t k = 1;
};
struct TopP {
    double p = 1.0;
};

TokenDist truncate(const TokenDist &d, TopK mode);
TokenDist truncate(const TokenDist &d, TopP mode);

/// Token ids ordered by descending log-probability, ties toward the lower
/// id. Excluded tokens are omitted.
std::vector<TokenId> ranked_support(const TokenDist &d);

/// Seeded mt19937_64 stream. Uniform variates are derived from the raw
/// 64-bit output by hand so the stream is identical on every standard
/// library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : m_seed(seed), m_engine(seed) {}

    std::uint64_t seed() const noexcept {
        return m_seed;
    }
    static constexpr std::string_view algorithm() noexcept {
        return "mt19937_64";
    }

    std::uint64_t next_u64() {
        return m_engine();
    }
    // Uniform in [0, 1) with 53 bits of resolution.
    double next_unit() {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t m_seed;
    std::mt19937_64 m_engine;
};

TokenId draw(const TokenDist &d, Rng &rng);

} // namespace rsactl
