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

#include "rsactl/tokenizer.hpp"

#include "rsactl/error.hpp"

namespace rsactl {

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c);
}

} // namespace

std::vector<std::string> word_tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            out.emplace_back(1, ch);
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    flush();
    return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) {
    m_words = {"<s>", "</s>", "<unk>"};
    m_words.reserve(words.size() + kReserved);
    for (auto &w : words) {
        m_words.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < m_words.size(); ++i) {
        auto [it, inserted] = m_index.emplace(m_words[i], static_cast<TokenId>(i));
        if (!inserted) {
            throw Error(ErrorCode::Format, "duplicate vocabulary entry '" + m_words[i] + "'");
        }
    }
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
    auto it = m_index.find(std::string(word));
    if (it == m_index.end()) {
        return std::nullopt;
    }
    return it->second;
}

TokenId Vocabulary::id(std::string_view word) const {
    return find(word).value_or(kUnk);
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (const auto &w : word_tokenize(text)) {
        ids.push_back(id(w));
    }
    return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += id < m_words.size() ? m_words[id] : "<unk>";
    }
    return out;
}

} // namespace rsactl
