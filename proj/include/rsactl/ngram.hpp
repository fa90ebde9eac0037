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
#include "rsactl/tokenizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rsactl {

struct NGramOptions {
    std::size_t order = 3;
    double lambda = 0.9; // weight of the longer history at each interpolation level
    double delta = 0.1;  // additive constant
};

/// Jelinek-Mercer interpolated n-gram model:
///
///   P(w | h) = lambda * (c(h, w) + delta) / (c(h) + delta * |V|)
///            + (1 - lambda) * P(w | h minus its oldest token)
///
/// bottoming out at the additive-delta unigram. Every document is wrapped in
/// <s> ... </s>. Histories with no counts still contribute their (uniform)
/// additive term, so every token keeps non-zero probability everywhere.
class NGramModel final : public LanguageModel {
public:
    struct Successors {
        std::uint64_t total = 0;
        std::map<TokenId, std::uint64_t> counts;
    };
    using CountTable = std::map<std::vector<TokenId>, Successors>;

    static NGramModel train(std::span<const std::string> documents, const NGramOptions &opts = {});
    /// One document per non-blank line.
    static NGramModel train(std::istream &corpus, const NGramOptions &opts = {});

    static NGramModel load(std::istream &in);
    static NGramModel load_file(const std::string &path);
    void save(std::ostream &out) const;
    void save_file(const std::string &path) const;
    /// Human-readable dump of the options, vocabulary and counts.
    void export_text(std::ostream &out) const;

    const NGramOptions &options() const noexcept {
        return m_opts;
    }
    const Vocabulary &vocab() const noexcept {
        return m_vocab;
    }
    const CountTable &counts() const noexcept {
        return m_counts;
    }
    std::size_t ngram_count(std::size_t length) const;

    /// Linear P(word | history). Only the last order-1 ids of `history` are
    /// used; no <s> is prepended.
    double prob(std::span<const TokenId> history, TokenId word) const;

    BackendKind kind() const override {
        return BackendKind::NGram;
    }
    std::size_t vocab_size() const override {
        return m_vocab.size();
    }
    TokenId bos() const override {
        return Vocabulary::kBos;
    }
    TokenId eos() const override {
        return Vocabulary::kEos;
    }
    std::string tokenizer_name() const override {
        return "word-lower-punct";
    }
    std::vector<TokenId> tokenize(std::string_view text) const override {
        return m_vocab.encode(text);
    }
    std::string token_text(TokenId id) const override {
        return m_vocab.word(id);
    }
    TokenDist next_dist(const Context &ctx) const override;

private:
    NGramModel(NGramOptions opts, Vocabulary vocab, CountTable counts);

    std::vector<TokenId> history_of(const Context &ctx) const;

    NGramOptions m_opts;
    Vocabulary m_vocab;
    CountTable m_counts; // key length 0 holds the unigram counts
};

} // namespace rsactl
