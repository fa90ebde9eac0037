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

// Pragmatic decoding over a language model.
//
//   literal speaker   S0(w | w<n, a) = LM(w | w<n, prompt_a)
//   listener          L1(a | w<=n)   ∝ S0(w_n | w<n, a) * L1(a | w<n), uniform at n = 0
//   speaker           S1(w | w<n, c) ∝ LM(w | w<n, c) * L1(target | w<n, w)^alpha
//
// Everything is computed in natural-log space. The listener only ever sees
// the control prompts, never the content prompt c.

#include "rsactl/backend.hpp"
#include "rsactl/frame.hpp"
#include "rsactl/prob.hpp"

#include <span>
#include <vector>

namespace rsactl {

/// Listener posterior over a frame's attributes, in log space.
struct BeliefState {
    std::vector<double> log_posterior;

    static BeliefState uniform(std::size_t attributes);

    std::size_t size() const noexcept {
        return log_posterior.size();
    }
    double posterior(std::size_t attribute) const;
    std::vector<double> posteriors() const;
};

enum class RationalityMode { Fixed, Adaptive };

struct RationalityConfig {
    double alpha0 = 0.0;
    double alpha1 = 0.0; // ignored in fixed mode
    RationalityMode mode = RationalityMode::Fixed;
    std::size_t top_m = 5;
    int recursion_depth = 1; // 1 = S1, 2 = S2 over an L2 listener
    double inner_alpha = 0.0; // rationality of the inner S1 layer at depth 2

    void validate() const;
    double min_alpha() const noexcept {
        return alpha0;
    }
    double max_alpha() const noexcept {
        return mode == RationalityMode::Adaptive ? alpha0 + alpha1 : alpha0;
    }
};

struct AlphaChoice {
    double alpha = 0.0;
    double r_c = 1.0; // content-consistency ratio, <= 1
    double r_a = 1.0; // attribute-recognition ratio, >= 1
};

struct StepOutcome {
    TokenDist s1_dist;
    double alpha_used = 0.0;
    double r_c = 1.0;
    double r_a = 1.0;
    /// log L1(target | w<n, w_n = v) for every v.
    std::vector<double> target_logposterior;
    TokenDist content_dist;
    std::vector<TokenDist> s0_dists; // one per attribute; feed to l1_step once a token is chosen
};

/// S0 next-token distributions, one per frame attribute.
std::vector<TokenDist> s0_next_all(const LanguageModel &lm, const AttributeFrame &frame,
                                   std::span<const TokenId> generated);

/// Bayesian update of the listener after observing one token.
BeliefState l1_step(const BeliefState &belief, std::span<const TokenDist> s0_dists, TokenId observed);

/// Entry v is the log target posterior the listener would hold if v were the
/// next token. Tokens that every S0 excludes get kNegInf.
std::vector<double> target_posterior_per_token(const BeliefState &belief, std::span<const TokenDist> s0_dists,
                                               std::size_t target);

/// normalize(content + alpha * target_logposterior).
TokenDist s1_combine(const TokenDist &content, std::span<const double> target_logposterior, double alpha);

/// Self-adjusted rationality from the top-m candidates of the uncontrolled
/// and alpha0-controlled speakers:
///   r_c = mean LM prob over T_alpha0 / mean LM prob over T_0          (clamped <= 1)
///   r_a = mean target posterior over T_alpha0 / same over T_0        (clamped >= 1)
///   alpha = alpha0 + (r_c / r_a) * alpha1
AlphaChoice adaptive_alpha(const TokenDist &content, std::span<const double> target_logposterior,
                           const RationalityConfig &cfg);

AlphaChoice adaptive_alpha(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                           const BeliefState &belief, const RationalityConfig &cfg);

/// One S1 step. The content context and all attribute contexts are issued as
/// a single batch. `belief` is not modified.
StepOutcome rsa_step(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                     const BeliefState &belief, const RationalityConfig &cfg);

/// Listener state for two levels of reasoning. The L1 posterior does not
/// depend on which attribute is the target, so one state serves every
/// inner speaker.
struct RecursiveBelief {
    BeliefState l1;
    BeliefState l2;

    static RecursiveBelief uniform(std::size_t attributes) {
        return {BeliefState::uniform(attributes), BeliefState::uniform(attributes)};
    }
};

struct DeepStepOutcome {
    TokenDist s2_dist;
    double alpha_used = 0.0;
    std::vector<double> target_logposterior; // from L2
    TokenDist content_dist;
    std::vector<TokenDist> s0_dists;
    std::vector<TokenDist> s1_dists; // inner speaker per attribute, content-free
};

/// S2 step: for every attribute a, S1_a speaks from prompt_a with inner_alpha
/// treating a as the target; L2 reasons over those speakers; S2 combines the
/// content distribution with the L2 target posterior at alpha0.
DeepStepOutcome deepen(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                       const RecursiveBelief &beliefs, const RationalityConfig &cfg);

RecursiveBelief advance(const RecursiveBelief &beliefs, const DeepStepOutcome &step, TokenId observed);

/// Final L1 belief after reading `tokens` from a uniform prior.
BeliefState listen(const LanguageModel &lm, const AttributeFrame &frame, std::span<const TokenId> tokens);

} // namespace rsactl
