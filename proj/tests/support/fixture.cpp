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

#include "fixture.hpp"

#include "rsactl/prob.hpp"

#include <algorithm>
#include <set>

namespace rsactl::testing {

namespace {

const std::vector<std::string> kPolite = {
    "please",    "thanks",    "kindly",     "grateful",  "appreciate", "welcome",   "gladly",    "sincerely",
    "pardon",    "respect",   "lovely",     "wonderful", "generous",   "gentle",    "pleasure",  "delighted",
    "cheers",    "warmly",    "thoughtful", "courteous", "helpful",    "honored",   "friendly",  "excellent",
    "admire",    "gracious",  "considerate", "patient",  "splendid",   "cordially",
};

const std::vector<std::string> kRude = {
    "idiot",   "stupid",  "shut",     "useless",  "moron",    "pathetic", "loser",   "dumb",
    "hate",    "awful",   "trash",    "garbage",  "clown",    "lousy",    "nasty",   "jerk",
    "ugly",    "fool",    "worthless", "disgusting", "lame",  "creep",    "annoying", "ridiculous",
    "rotten",  "pitiful", "crap",     "silly",    "freak",    "scum",
};

const std::vector<std::string> kFiller = {
    "the",   "a",     "we",    "you",   "it",    "is",     "was",   "this",  "that",   "to",
    "of",    "and",   "in",    "for",   "on",    "with",   "at",    "by",    "from",   "about",
    "team",  "meeting", "report", "plan", "today", "work", "project", "email", "call", "time",
    "really", "very", "so",    "just",  "again", "now",    "here",  "there", "your",  "our",
};

// Zipf(1) weights over a list.
TokenDist zipf(std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = 1.0 / static_cast<double>(i + 1);
    }
    double z = 0.0;
    for (double v : p) {
        z += v;
    }
    for (double &v : p) {
        v /= z;
    }
    return TokenDist::from_probs(p);
}

std::vector<std::string> sentence(const std::vector<std::string> &style, const TokenDist &style_w,
                                  const TokenDist &filler_w, double opening, double rate, Rng &rng) {
    const auto len = 8 + static_cast<std::size_t>(rng.next_u64() % 7);
    std::vector<std::string> words;
    while (words.size() < len) {
        if (rng.next_unit() < (words.empty() ? opening : rate)) {
            words.push_back(style[draw(style_w, rng)]);
        } else {
            words.push_back(kFiller[draw(filler_w, rng)]);
        }
    }
    return words;
}

std::string join(const std::vector<std::string> &words, std::size_t from = 0, std::size_t to = SIZE_MAX) {
    std::string out;
    for (std::size_t i = from; i < std::min(to, words.size()); ++i) {
        if (!out.empty()) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

} // namespace

StyleFixture make_style_fixture(const FixtureOptions &opts) {
    Rng rng(opts.seed);
    const auto style_w = zipf(kPolite.size());
    const auto filler_w = zipf(kFiller.size());

    std::vector<std::string> lines;
    for (std::size_t i = 0; i < opts.lines_per_style; ++i) {
        lines.push_back("polite " + join(sentence(kPolite, style_w, filler_w, opts.opening_rate, opts.style_rate, rng)));
        lines.push_back("rude " + join(sentence(kRude, style_w, filler_w, opts.opening_rate, opts.style_rate, rng)));
    }

    std::vector<LabeledExample> heldout;
    for (std::size_t i = 0; i < opts.heldout_per_style; ++i) {
        heldout.push_back({join(sentence(kPolite, style_w, filler_w, opts.opening_rate, opts.style_rate, rng)), "polite"});
        heldout.push_back({join(sentence(kRude, style_w, filler_w, opts.opening_rate, opts.style_rate, rng)), "rude"});
    }

    std::vector<std::string> prompts;
    std::set<std::string> seen;
    while (prompts.size() < opts.prompt_count) {
        auto p = join(sentence(kRude, style_w, filler_w, opts.opening_rate, opts.style_rate, rng), 0, 2);
        if (seen.insert(p).second) {
            prompts.push_back(std::move(p));
        }
    }

    FrameSpec frame;
    frame.attributes = {{"polite", "polite", AttributeRole::Target}, {"rude", "rude", AttributeRole::Distractor}};

    auto model = NGramModel::train(lines, NGramOptions{3, 0.9, 0.1});
    return StyleFixture{kPolite, kRude, kFiller, std::move(lines), std::move(heldout), std::move(prompts),
                        std::move(model), std::move(frame)};
}

BeamToy make_beam_toy(std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> words{"<s>", "</s>", "x", "y", "z"};
    auto random_dist = [&] {
        std::vector<double> logits(words.size());
        for (double &l : logits) {
            l = 3.0 * rng.next_unit();
        }
        return TokenDist(std::move(logits));
    };
    TableModel model(words, TokenDist::uniform(words.size()));
    const std::vector<std::vector<TokenId>> prompts{{4}, {2}, {3}};
    std::vector<std::vector<TokenId>> prefixes{{}};
    for (TokenId a = 0; a < 5; ++a) {
        prefixes.push_back({a});
        for (TokenId b = 0; b < 5; ++b) {
            prefixes.push_back({a, b});
        }
    }
    for (const auto &p : prompts) {
        for (const auto &pre : prefixes) {
            model.set(p, pre, random_dist());
        }
    }
    AttributeFrame frame({{"x", {2}, AttributeRole::Target}, {"y", {3}, AttributeRole::Distractor}});
    return BeamToy{std::move(model), std::move(frame), {4}};
}

double lexicon_rate(const LanguageModel &lm, const std::vector<std::vector<TokenId>> &outputs,
                    const std::vector<std::string> &lexicon) {
    const std::set<std::string> lex(lexicon.begin(), lexicon.end());
    std::size_t hits = 0;
    std::size_t total = 0;
    for (const auto &out : outputs) {
        for (auto t : out) {
            ++total;
            hits += lex.count(lm.token_text(t));
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

} // namespace rsactl::testing
