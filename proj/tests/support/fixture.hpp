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

#include "rsactl/eval.hpp"
#include "rsactl/frame.hpp"
#include "rsactl/ngram.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rsactl::testing {

// Two-style synthetic corpus. Every training line starts with its style
// marker ("polite" / "rude"), which doubles as the control prompt, then a
// mix of style words and shared filler.
struct StyleFixture {
    std::vector<std::string> polite_words;
    std::vector<std::string> rude_words;
    std::vector<std::string> filler_words;
    std::vector<std::string> training_lines;
    std::vector<LabeledExample> heldout; // unmarked lines, labels "polite" / "rude"
    /// Two-word openings of unseen rude lines, like challenging prompts.
    std::vector<std::string> prompts;
    NGramModel model;
    FrameSpec frame; // polite is the target
};

struct FixtureOptions {
    std::size_t lines_per_style = 2000;
    std::size_t heldout_per_style = 100;
    std::size_t prompt_count = 50;
    double style_rate = 0.7;   // chance a non-initial word is a style word
    double opening_rate = 1.0; // chance the first word is a style word
    std::uint64_t seed = 7;
};

StyleFixture make_style_fixture(const FixtureOptions &opts = {});

// Five-token table model whose every prefix up to length 2 has its own
// distribution under each of three prompts: "z" (content), "x" (target)
// and "y" (distractor). Small enough to enumerate depth-3 search trees.
struct BeamToy {
    TableModel model;
    AttributeFrame frame;
    std::vector<TokenId> prompt;
};

BeamToy make_beam_toy(std::uint64_t seed = 31);

/// Fraction of tokens whose text is in `lexicon`.
double lexicon_rate(const LanguageModel &lm, const std::vector<std::vector<TokenId>> &outputs,
                    const std::vector<std::string> &lexicon);

} // namespace rsactl::testing
