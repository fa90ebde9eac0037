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

#include "rsactl/backend.hpp"

#include "rsactl/error.hpp"
#include "rsactl/tokenizer.hpp"

#include <cmath>

namespace rsactl {

std::vector<TokenDist> LanguageModel::next_dist_batch(std::span<const Context> contexts) const {
    std::vector<TokenDist> out;
    out.reserve(contexts.size());
    for (const auto &ctx : contexts) {
        out.push_back(next_dist(ctx));
    }
    return out;
}

std::string LanguageModel::detokenize(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += token_text(id);
    }
    return out;
}

double score_sequence(const LanguageModel &lm, const Context &ctx, std::span<const TokenId> tokens) {
    if (tokens.empty()) {
        throw Error(ErrorCode::InvalidArgument, "score_sequence needs at least one token");
    }
    Context step = ctx;
    double total = 0.0;
    for (TokenId t : tokens) {
        if (t >= lm.vocab_size()) {
            throw Error(ErrorCode::InvalidArgument, "token id out of range");
        }
        const double lp = lm.next_dist(step)[t];
        if (is_excluded(lp)) {
            return kNegInf;
        }
        total += lp;
        step.generated_tokens.push_back(t);
    }
    return total;
}

double conditional_ppl(const LanguageModel &lm, std::span<const TokenId> prompt,
                       std::span<const TokenId> continuation) {
    if (continuation.empty()) {
        throw Error(ErrorCode::InvalidArgument, "conditional_ppl needs a non-empty continuation");
    }
    Context ctx{std::vector<TokenId>(prompt.begin(), prompt.end()), {}};
    const double score = score_sequence(lm, ctx, continuation);
    return std::exp(-score / static_cast<double>(continuation.size()));
}

TableModel::TableModel(std::vector<std::string> words, TokenDist fallback)
    : m_words(std::move(words)), m_fallback(normalize(fallback)) {
    if (m_words.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "table model needs at least <s> and </s>");
    }
    if (m_fallback.size() != m_words.size()) {
        throw Error(ErrorCode::InvalidArgument, "fallback size does not match vocabulary");
    }
}

void TableModel::set(std::vector<TokenId> prompt, std::vector<TokenId> generated, TokenDist dist) {
    if (dist.size() != m_words.size()) {
        throw Error(ErrorCode::InvalidArgument, "table entry size does not match vocabulary");
    }
    m_entries.insert_or_assign({std::move(prompt), std::move(generated)}, normalize(dist));
}

std::vector<TokenId> TableModel::tokenize(std::string_view text) const {
    std::vector<TokenId> ids;
    for (const auto &w : word_tokenize(text)) {
        auto it = std::find(m_words.begin(), m_words.end(), w);
        if (it == m_words.end()) {
            throw Error(ErrorCode::InvalidArgument, "word '" + w + "' not in table vocabulary");
        }
        ids.push_back(static_cast<TokenId>(it - m_words.begin()));
    }
    return ids;
}

std::string TableModel::token_text(TokenId id) const {
    return m_words.at(id);
}

TokenDist TableModel::next_dist(const Context &ctx) const {
    auto it = m_entries.find({ctx.prompt_tokens, ctx.generated_tokens});
    return it == m_entries.end() ? m_fallback : it->second;
}

} // namespace rsactl
