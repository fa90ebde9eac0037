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

#include "rsactl/rsa.hpp"

#include "rsactl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rsactl {

BeliefState BeliefState::uniform(std::size_t attributes) {
    if (attributes == 0) {
        throw Error(ErrorCode::InvalidArgument, "belief over zero attributes");
    }
    return {std::vector<double>(attributes, -std::log(static_cast<double>(attributes)))};
}

double BeliefState::posterior(std::size_t attribute) const {
    const double v = log_posterior.at(attribute);
    return is_excluded(v) ? 0.0 : std::exp(v);
}

std::vector<double> BeliefState::posteriors() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out[i] = posterior(i);
    }
    return out;
}

void RationalityConfig::validate() const {
    if (!(alpha0 >= 0.0) || !(alpha1 >= 0.0) || !std::isfinite(alpha0) || !std::isfinite(alpha1)) {
        throw Error(ErrorCode::InvalidArgument, "rationality parameters must be finite and >= 0");
    }
    if (top_m < 1) {
        throw Error(ErrorCode::InvalidArgument, "top_m must be >= 1");
    }
    if (recursion_depth < 1) {
        throw Error(ErrorCode::InvalidArgument, "recursion depth must be >= 1");
    }
    if (recursion_depth > 2) {
        throw Error(ErrorCode::UnsupportedDepth, "recursion depth " + std::to_string(recursion_depth) +
                                                     " is not supported (max 2)");
    }
    if (!(inner_alpha >= 0.0) || !std::isfinite(inner_alpha)) {
        throw Error(ErrorCode::InvalidArgument, "inner_alpha must be finite and >= 0");
    }
    if (recursion_depth == 2 && mode == RationalityMode::Adaptive) {
        throw Error(ErrorCode::InvalidArgument, "recursion depth 2 runs with fixed rationality only");
    }
}

namespace {

void check_dists(std::size_t expected, std::span<const TokenDist> dists) {
    if (dists.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "one S0 distribution per attribute is required");
    }
    for (const auto &d : dists) {
        if (d.size() != dists.front().size()) {
            throw Error(ErrorCode::InvalidArgument, "S0 distributions disagree on vocabulary size");
        }
    }
}

std::vector<Context> attribute_contexts(const AttributeFrame &frame, std::span<const TokenId> generated) {
    std::vector<Context> out;
    out.reserve(frame.size());
    for (const auto &a : frame.attributes()) {
        out.push_back({a.prompt, std::vector<TokenId>(generated.begin(), generated.end())});
    }
    return out;
}

double mean_over(std::span<const TokenId> ids, auto &&value) {
    double sum = 0.0;
    for (TokenId id : ids) {
        sum += value(id);
    }
    return sum / static_cast<double>(ids.size());
}

double safe_ratio(double num, double den) {
    if (den > 0.0) {
        return num / den;
    }
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

} // namespace

std::vector<TokenDist> s0_next_all(const LanguageModel &lm, const AttributeFrame &frame,
                                   std::span<const TokenId> generated) {
    const auto contexts = attribute_contexts(frame, generated);
    return lm.next_dist_batch(contexts);
}

BeliefState l1_step(const BeliefState &belief, std::span<const TokenDist> s0_dists, TokenId observed) {
    check_dists(belief.size(), s0_dists);
    if (observed >= s0_dists.front().size()) {
        throw Error(ErrorCode::InvalidArgument, "observed token outside the vocabulary");
    }
    std::vector<double> joint(belief.size());
    bool any = false;
    for (std::size_t a = 0; a < belief.size(); ++a) {
        const double prior = belief.log_posterior[a];
        const double lik = s0_dists[a][observed];
        joint[a] = is_excluded(prior) || is_excluded(lik) ? kNegInf : prior + lik;
        any = any || !is_excluded(joint[a]);
    }
    if (!any) {
        throw Error(ErrorCode::DegenerateEvidence, "no attribute can explain token " + std::to_string(observed));
    }
    const double z = log_sum_exp(joint);
    for (double &v : joint) {
        if (!is_excluded(v)) {
            v -= z;
        }
    }
    return {std::move(joint)};
}

std::vector<double> target_posterior_per_token(const BeliefState &belief, std::span<const TokenDist> s0_dists,
                                               std::size_t target) {
    check_dists(belief.size(), s0_dists);
    if (target >= belief.size()) {
        throw Error(ErrorCode::InvalidArgument, "target index out of range");
    }
    const std::size_t vocab = s0_dists.front().size();
    const std::size_t n = belief.size();
    std::vector<double> out(vocab);
    std::vector<double> joint(n);
    for (std::size_t v = 0; v < vocab; ++v) {
        double max = kNegInf;
        for (std::size_t a = 0; a < n; ++a) {
            const double prior = belief.log_posterior[a];
            const double lik = s0_dists[a].logp()[v];
            joint[a] = is_excluded(prior) || is_excluded(lik) ? kNegInf : prior + lik;
            max = std::max(max, joint[a]);
        }
        if (is_excluded(max) || is_excluded(joint[target])) {
            out[v] = kNegInf;
            continue;
        }
        double sum = 0.0;
        for (double j : joint) {
            if (!is_excluded(j)) {
                sum += std::exp(j - max);
            }
        }
        out[v] = joint[target] - (max + std::log(sum));
    }
    return out;
}

TokenDist s1_combine(const TokenDist &content, std::span<const double> target_logposterior, double alpha) {
    if (!content.normalized()) {
        throw Error(ErrorCode::InvalidArgument, "s1_combine needs a normalized content distribution");
    }
    if (target_logposterior.size() != content.size()) {
        throw Error(ErrorCode::InvalidArgument, "posterior vector does not match the vocabulary");
    }
    if (!(alpha >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    }
    if (alpha == 0.0) {
        return content;
    }
    std::vector<double> out(content.size());
    for (std::size_t v = 0; v < out.size(); ++v) {
        const double c = content.logp()[v];
        const double t = target_logposterior[v];
        out[v] = is_excluded(c) || is_excluded(t) ? kNegInf : c + alpha * t;
    }
    return normalize(TokenDist(std::move(out)));
}

AlphaChoice adaptive_alpha(const TokenDist &content, std::span<const double> target_logposterior,
                           const RationalityConfig &cfg) {
    if (cfg.mode != RationalityMode::Adaptive) {
        throw Error(ErrorCode::InvalidArgument, "adaptive_alpha needs adaptive mode");
    }
    if (cfg.alpha1 == 0.0) {
        return {cfg.alpha0, 1.0, 1.0};
    }
    const TokenDist controlled = s1_combine(content, target_logposterior, cfg.alpha0);

    auto top = [&](const TokenDist &d) {
        auto ranked = ranked_support(d);
        ranked.resize(std::min(ranked.size(), cfg.top_m));
        return ranked;
    };
    const auto base_set = top(content);
    const auto ctrl_set = top(controlled);

    auto lm_prob = [&](TokenId v) { return content.prob(v); };
    auto posterior = [&](TokenId v) {
        const double t = target_logposterior[v];
        return is_excluded(t) ? 0.0 : std::exp(t);
    };

    AlphaChoice out;
    out.r_c = std::min(1.0, safe_ratio(mean_over(ctrl_set, lm_prob), mean_over(base_set, lm_prob)));
    out.r_a = std::max(1.0, safe_ratio(mean_over(ctrl_set, posterior), mean_over(base_set, posterior)));
    out.alpha = cfg.alpha0 + (out.r_c / out.r_a) * cfg.alpha1;
    return out;
}

AlphaChoice adaptive_alpha(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                           const BeliefState &belief, const RationalityConfig &cfg) {
    const auto content = lm.next_dist(content_ctx);
    const auto s0 = s0_next_all(lm, frame, content_ctx.generated_tokens);
    const auto target = target_posterior_per_token(belief, s0, frame.target());
    return adaptive_alpha(content, target, cfg);
}

namespace {

// Content context first, then one context per attribute.
std::vector<TokenDist> batch_step(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx) {
    std::vector<Context> contexts;
    contexts.reserve(frame.size() + 1);
    contexts.push_back(content_ctx);
    for (auto &c : attribute_contexts(frame, content_ctx.generated_tokens)) {
        contexts.push_back(std::move(c));
    }
    return lm.next_dist_batch(contexts);
}

} // namespace

StepOutcome rsa_step(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                     const BeliefState &belief, const RationalityConfig &cfg) {
    cfg.validate();
    if (belief.size() != frame.size()) {
        throw Error(ErrorCode::InvalidArgument, "belief does not match the frame");
    }
    auto dists = batch_step(lm, frame, content_ctx);

    StepOutcome out;
    out.content_dist = std::move(dists.front());
    out.s0_dists.assign(std::make_move_iterator(dists.begin() + 1), std::make_move_iterator(dists.end()));
    out.target_logposterior = target_posterior_per_token(belief, out.s0_dists, frame.target());

    if (cfg.mode == RationalityMode::Adaptive) {
        const auto choice = adaptive_alpha(out.content_dist, out.target_logposterior, cfg);
        out.alpha_used = choice.alpha;
        out.r_c = choice.r_c;
        out.r_a = choice.r_a;
    } else {
        out.alpha_used = cfg.alpha0;
    }
    out.s1_dist = s1_combine(out.content_dist, out.target_logposterior, out.alpha_used);
    return out;
}

DeepStepOutcome deepen(const LanguageModel &lm, const AttributeFrame &frame, const Context &content_ctx,
                       const RecursiveBelief &beliefs, const RationalityConfig &cfg) {
    cfg.validate();
    if (cfg.recursion_depth != 2) {
        throw Error(ErrorCode::UnsupportedDepth, "deepen runs at recursion depth 2 only");
    }
    if (beliefs.l1.size() != frame.size() || beliefs.l2.size() != frame.size()) {
        throw Error(ErrorCode::InvalidArgument, "beliefs do not match the frame");
    }
    auto dists = batch_step(lm, frame, content_ctx);

    DeepStepOutcome out;
    out.content_dist = std::move(dists.front());
    out.s0_dists.assign(std::make_move_iterator(dists.begin() + 1), std::make_move_iterator(dists.end()));
    out.s1_dists.reserve(frame.size());
    for (std::size_t a = 0; a < frame.size(); ++a) {
        const auto posterior_a = target_posterior_per_token(beliefs.l1, out.s0_dists, a);
        out.s1_dists.push_back(s1_combine(out.s0_dists[a], posterior_a, cfg.inner_alpha));
    }
    out.target_logposterior = target_posterior_per_token(beliefs.l2, out.s1_dists, frame.target());
    out.alpha_used = cfg.alpha0;
    out.s2_dist = s1_combine(out.content_dist, out.target_logposterior, cfg.alpha0);
    return out;
}

RecursiveBelief advance(const RecursiveBelief &beliefs, const DeepStepOutcome &step, TokenId observed) {
    return {l1_step(beliefs.l1, step.s0_dists, observed), l1_step(beliefs.l2, step.s1_dists, observed)};
}

BeliefState listen(const LanguageModel &lm, const AttributeFrame &frame, std::span<const TokenId> tokens) {
    auto belief = BeliefState::uniform(frame.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto s0 = s0_next_all(lm, frame, tokens.first(i));
        belief = l1_step(belief, s0, tokens[i]);
    }
    return belief;
}

} // namespace rsactl
