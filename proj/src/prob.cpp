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

#include "rsactl/prob.hpp"

#include "rsactl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rsactl {

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::EmptySupport, "log_sum_exp of an empty vector");
    }
    double max = kNegInf;
    for (double v : values) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorCode::InvalidArgument, "log_sum_exp input must be finite or excluded");
        }
        max = std::max(max, v);
    }
    if (is_excluded(max)) {
        throw Error(ErrorCode::EmptySupport, "every entry is excluded");
    }
    double sum = 0.0;
    for (double v : values) {
        if (!is_excluded(v)) {
            sum += std::exp(v - max);
        }
    }
    return max + std::log(sum);
}

TokenDist::TokenDist(std::vector<double> logp, bool normalized)
    : m_logp(std::move(logp)), m_normalized(normalized) {
    if (m_logp.empty()) {
        throw Error(ErrorCode::InvalidArgument, "TokenDist needs vocab_size >= 1");
    }
    for (double v : m_logp) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorCode::InvalidArgument, "TokenDist entries must be finite or excluded");
        }
    }
}

TokenDist TokenDist::uniform(std::size_t vocab_size) {
    return TokenDist(std::vector<double>(vocab_size, -std::log(static_cast<double>(vocab_size))), true);
}

TokenDist TokenDist::from_probs(std::span<const double> probs) {
    std::vector<double> logp(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "negative probability");
        }
        logp[i] = probs[i] == 0.0 ? kNegInf : std::log(probs[i]);
    }
    return normalize(TokenDist(std::move(logp)));
}

double TokenDist::prob(TokenId id) const {
    double v = m_logp.at(id);
    return is_excluded(v) ? 0.0 : std::exp(v);
}

std::vector<double> TokenDist::probs() const {
    std::vector<double> out(m_logp.size());
    for (std::size_t i = 0; i < m_logp.size(); ++i) {
        out[i] = is_excluded(m_logp[i]) ? 0.0 : std::exp(m_logp[i]);
    }
    return out;
}

TokenId TokenDist::argmax() const {
    // max_element returns the first maximum, so ties go to the lower id.
    auto it = std::max_element(m_logp.begin(), m_logp.end());
    if (is_excluded(*it)) {
        throw Error(ErrorCode::EmptySupport, "argmax of a distribution with no support");
    }
    return static_cast<TokenId>(it - m_logp.begin());
}

std::size_t TokenDist::support_size() const {
    return static_cast<std::size_t>(
        std::count_if(m_logp.begin(), m_logp.end(), [](double v) { return !is_excluded(v); }));
}

TokenDist normalize(const TokenDist &d) {
    const double z = log_sum_exp(d.logp());
    std::vector<double> out(d.logp().begin(), d.logp().end());
    for (double &v : out) {
        if (!is_excluded(v)) {
            v -= z;
        }
    }
    return TokenDist(std::move(out), true);
}

std::vector<TokenId> ranked_support(const TokenDist &d) {
    auto logp = d.logp();
    std::vector<TokenId> ids;
    ids.reserve(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) {
        if (!is_excluded(logp[i])) {
            ids.push_back(static_cast<TokenId>(i));
        }
    }
    std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) { return logp[a] > logp[b]; });
    return ids;
}

namespace {

TokenDist keep_only(const TokenDist &d, std::span<const TokenId> keep) {
    std::vector<double> out(d.size(), kNegInf);
    for (TokenId id : keep) {
        out[id] = d.logp()[id];
    }
    return normalize(TokenDist(std::move(out)));
}

void require_normalized(const TokenDist &d, const char *op) {
    if (!d.normalized()) {
        throw Error(ErrorCode::InvalidArgument, std::string(op) + " requires a normalized distribution");
    }
}

} // namespace

TokenDist truncate(const TokenDist &d, TopK mode) {
    require_normalized(d, "truncate");
    if (mode.k < 1) {
        throw Error(ErrorCode::InvalidArgument, "top_k needs k >= 1");
    }
    auto ranked = ranked_support(d);
    if (ranked.size() > mode.k) {
        ranked.resize(mode.k);
    }
    return keep_only(d, ranked);
}

TokenDist truncate(const TokenDist &d, TopP mode) {
    require_normalized(d, "truncate");
    if (!(mode.p > 0.0 && mode.p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "top_p needs p in (0, 1]");
    }
    auto ranked = ranked_support(d);
    double cumulative = 0.0;
    std::size_t keep = 0;
    while (keep < ranked.size()) {
        cumulative += std::exp(d.logp()[ranked[keep]]);
        ++keep;
        if (cumulative >= mode.p) {
            break;
        }
    }
    ranked.resize(keep);
    return keep_only(d, ranked);
}

TokenId draw(const TokenDist &d, Rng &rng) {
    require_normalized(d, "draw");
    auto logp = d.logp();
    const double u = rng.next_unit();
    double cumulative = 0.0;
    std::size_t last = logp.size();
    for (std::size_t i = 0; i < logp.size(); ++i) {
        if (is_excluded(logp[i])) {
            continue;
        }
        last = i;
        cumulative += std::exp(logp[i]);
        if (u < cumulative) {
            return static_cast<TokenId>(i);
        }
    }
    if (last == logp.size()) {
        throw Error(ErrorCode::EmptySupport, "draw from a distribution with no support");
    }
    // Rounding left the CDF just short of 1.
    return static_cast<TokenId>(last);
}

} // namespace rsactl
