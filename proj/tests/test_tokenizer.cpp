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

#include <doctest.h>

using namespace rsactl;

TEST_CASE("word_tokenize lowercases and splits punctuation") {
    const auto t = word_tokenize("Hello, World!  It's fine.");
    const std::vector<std::string> want{"hello", ",", "world", "!", "it", "'", "s", "fine", "."};
    CHECK(t == want);
    CHECK(word_tokenize("").empty());
    CHECK(word_tokenize(" \t\n ").empty());
    CHECK(word_tokenize("a...b") == std::vector<std::string>{"a", ".", ".", ".", "b"});
}

TEST_CASE("non-ascii bytes stay inside words") {
    const auto t = word_tokenize("caf\xc3\xa9 ok");
    REQUIRE(t.size() == 2);
    CHECK(t[0] == "caf\xc3\xa9");
}

TEST_CASE("vocabulary reserves bos, eos and unk") {
    const Vocabulary v({"go", "left"});
    CHECK(v.size() == 5);
    CHECK(v.word(Vocabulary::kBos) == "<s>");
    CHECK(v.word(Vocabulary::kEos) == "</s>");
    CHECK(v.word(Vocabulary::kUnk) == "<unk>");
    CHECK(v.id("go") == 3);
    CHECK(v.id("left") == 4);
    CHECK(v.id("right") == Vocabulary::kUnk);
    CHECK_FALSE(v.find("right").has_value());

    const auto ids = v.encode("Go left, right");
    CHECK(ids == std::vector<TokenId>{3, 4, Vocabulary::kUnk, Vocabulary::kUnk});
    CHECK(v.decode(std::vector<TokenId>{3, 4}) == "go left");
}
