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

#include "rsactl/prob.hpp"

#include <map>
#include <span>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

namespace rsactl {

/// Conditioning for one next-token query: a fixed prompt plus the tokens
/// generated so far. Backends prepend their own BOS.
struct Context {
    std::vector<TokenId> prompt_tokens;
    std::vector<TokenId> generated_tokens;

    Context extended(std::span<const TokenId> more) const {
        Context c = *this;
        c.generated_tokens.insert(c.generated_tokens.end(), more.begin(), more.end());
        return c;
    }
};

enum class BackendKind { NGram, Remote, Table };

/// Next-token distribution source. Implementations are safe for concurrent
/// const use.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;

    virtual BackendKind kind() const = 0;
    virtual std::size_t vocab_size() const = 0;
    virtual TokenId bos() const = 0;
    virtual TokenId eos() const = 0;
    /// Human-readable tokenizer identifier; frames must be bound with the same one.
    virtual std::string tokenizer_name() const = 0;

    virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
    virtual std::string token_text(TokenId id) const = 0;

    /// Normalized distribution over the full vocabulary.
    virtual TokenDist next_dist(const Context &ctx) const = 0;

    /// One distribution per context, in order. The default runs them in sequence.
    virtual std::vector<TokenDist> next_dist_batch(std::span<const Context> contexts) const;

    std::string detokenize(std::span<const TokenId> ids) const;
};

/// Sum of log P(tokens[i] | ctx + tokens[0..i)).
double score_sequence(const LanguageModel &lm, const Context &ctx, std::span<const TokenId> tokens);

/// exp(-score / N) of a continuation given a prompt.
double conditional_ppl(const LanguageModel &lm, std::span<const TokenId> prompt,
                       std::span<const TokenId> continuation);

/// Fixed next-token table keyed by the full generated history; used for
/// hand-built fixtures. Histories without an entry fall back to `fallback`.
class TableModel final : public LanguageModel {
public:
    TableModel(std::vector<std::string> words, TokenDist fallback);

    void set(std::vector<TokenId> prompt, std::vector<TokenId> generated, TokenDist dist);

    BackendKind kind() const override {
        return BackendKind::Table;
    }
    std::size_t vocab_size() const override {
        return m_words.size();
    }
    TokenId bos() const override {
        return 0;
    }
    TokenId eos() const override {
        return 1;
    }
    std::string tokenizer_name() const override {
        return "table";
    }
    std::vector<TokenId> tokenize(std::string_view text) const override;
    std::string token_text(TokenId id) const override;
    TokenDist next_dist(const Context &ctx) const override;

private:
    std::vector<std::string> m_words;
    TokenDist m_fallback;
    std::map<std::pair<std::vector<TokenId>, std::vector<TokenId>>, TokenDist> m_entries;
};

} // namespace rsactl
