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

#include "rsactl/backend.hpp"
#include "rsactl/frame.hpp"
#include "rsactl/rsa.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rsactl {

enum class Strategy { Greedy, Beam, Nucleus };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct DecodeConfig {
    Strategy strategy = Strategy::Greedy;
    std::size_t beam_size = 3;
    double top_p = 0.9;
    std::size_t max_new_tokens = 20;
    std::uint64_t seed = 0;
    std::optional<std::vector<TokenId>> stop_tokens; // unset: the backend's EOS
    bool length_normalization = false;

    void validate() const;
};

struct TraceStep {
    TokenId token = 0;
    std::string token_text;
    double alpha_used = 0.0;
    double r_c = 1.0;
    double r_a = 1.0;
    std::vector<double> posterior; // L1 posterior per attribute after this token
    double token_logp = 0.0;       // log P of the token under the step's final distribution
    std::size_t token_rank = 0;    // 0 = most probable
    std::size_t candidates = 0;    // nucleus size, beam candidate count or 1 for greedy

    bool operator==(const TraceStep &) const = default;
};

struct DecodeTrace {
    std::string strategy;
    std::vector<std::string> attributes;
    std::vector<TraceStep> steps;

    bool operator==(const DecodeTrace &) const = default;
};

enum class DecodeStatus { Ok, ZeroLengthOutput };

struct Hypothesis {
    std::vector<TokenId> tokens; // includes the stop token when finished by one
    double cum_logp = 0.0;
    BeliefState belief;                // L1
    std::optional<BeliefState> belief2; // L2 at recursion depth 2
    bool finished = false;
    DecodeTrace trace;

    /// Tokens with a trailing stop token removed.
    std::vector<TokenId> output_tokens(std::span<const TokenId> stop) const;
};

struct DecodeResult {
    std::vector<Hypothesis> sequences; // best first
    DecodeStatus status = DecodeStatus::Ok;

    const Hypothesis &best() const {
        return sequences.front();
    }
};

std::vector<TokenId> stop_set(const LanguageModel &lm, const DecodeConfig &cfg);

/// Controlled decoding from `content_prompt`; each step is an S1 (or S2) step.
DecodeResult decode(const LanguageModel &lm, const AttributeFrame &frame, std::span<const TokenId> content_prompt,
                    const RationalityConfig &rationality, const DecodeConfig &cfg);

/// Decoding straight from the backend's next-token distributions.
DecodeResult decode_raw(const LanguageModel &lm, std::span<const TokenId> content_prompt, const DecodeConfig &cfg);

struct RerankResult {
    std::size_t best = 0;
    std::vector<std::vector<TokenId>> samples;
    std::vector<double> target_posteriors; // final L1 target posterior per sample
};

/// Draws n uncontrolled samples (nucleus strategy, one RNG stream seeded by
/// cfg.seed) and keeps the one the listener most attributes to the target.
RerankResult rerank_samples(const LanguageModel &lm, const AttributeFrame &frame,
                            std::span<const TokenId> content_prompt, std::size_t n, const DecodeConfig &cfg);

enum class TraceFormat { Tsv, Json };

std::string export_trace(const DecodeTrace &trace, TraceFormat format);
DecodeTrace parse_trace_json(std::string_view text);

} // namespace rsactl
