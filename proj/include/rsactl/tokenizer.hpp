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

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rsactl {

/// Lowercases ASCII, splits on whitespace and emits every ASCII punctuation
/// character as its own token. Bytes >= 0x80 are treated as word characters.
std::vector<std::string> word_tokenize(std::string_view text);

class Vocabulary {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr std::size_t kReserved = 3;

    Vocabulary();

    /// Builds a vocabulary from reserved symbols plus `words` in the given order.
    explicit Vocabulary(std::vector<std::string> words);

    std::size_t size() const noexcept {
        return m_words.size();
    }
    TokenId id(std::string_view word) const; // kUnk when absent
    std::optional<TokenId> find(std::string_view word) const;
    const std::string &word(TokenId id) const {
        return m_words.at(id);
    }
    const std::vector<std::string> &words() const noexcept {
        return m_words;
    }

    std::vector<TokenId> encode(std::string_view text) const;
    std::string decode(std::span<const TokenId> ids) const;

private:
    std::vector<std::string> m_words;
    std::unordered_map<std::string, TokenId> m_index;
};

} // namespace rsactl
