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
#include "rsactl/frame.hpp"
#include "rsactl/rsa.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rsactl {

// Text segmentation shared by the readability, overlap and novelty metrics.
//
// Sentences end at a maximal run of '.', '?' or '!' followed by whitespace
// or the end of the text. Words are whitespace-separated with leading and
// trailing ASCII punctuation stripped; empty results are dropped.
std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> split_words(std::string_view text);
std::string to_lower(std::string_view s);

/// Vowel groups (a, e, i, o, u, y) minus a silent trailing 'e' when that
/// leaves at least one; never below 1.
int count_syllables(std::string_view word);

using WordSet = std::unordered_set<std::string>;
WordSet load_word_set(const std::string &path);

struct ReadabilityReport {
    double fre = 0.0;       // Flesch Reading Ease
    double dcr = 0.0;       // Dale-Chall
    double gfi = 0.0;       // Gunning fog
    double cli_index = 0.0; // Coleman-Liau
    std::size_t word_count = 0;
    std::size_t sentence_count = 0;
    std::size_t syllable_count = 0;
    std::size_t complex_word_count = 0;
    std::size_t difficult_word_count = 0;
    std::size_t letter_count = 0;
};

ReadabilityReport readability(std::string_view text, const WordSet &familiar_words);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Longest-common-subsequence overlap of lowercased words.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

/// Fraction of the summary's n-gram occurrences that never occur in the source.
double ngram_novelty(std::string_view summary, std::string_view source, std::size_t n);

struct LabeledExample {
    std::string text;
    std::string label;
};

struct PairExample {
    std::string sent_more; // stereotypical
    std::string sent_less; // anti-stereotypical
    std::string bias_type;
};

std::vector<LabeledExample> load_labeled_tsv(const std::string &path);
std::vector<PairExample> load_pairs_tsv(const std::string &path);

/// Name of the attribute whose prompt gives `text` the higher likelihood;
/// ties go to the target. The frame must have exactly two attributes.
std::string classify(const LanguageModel &lm, const AttributeFrame &frame, std::string_view text);

double accuracy(const LanguageModel &lm, const AttributeFrame &frame, std::span<const LabeledExample> dataset);

using SequenceScorer = std::function<double(std::string_view)>;

/// Raw backend log-likelihood from an empty prompt.
SequenceScorer raw_scorer(const LanguageModel &lm);

/// Teacher-forced sum of log P_S1 under `frame` from an empty content prompt.
SequenceScorer pragmatic_scorer(const LanguageModel &lm, const AttributeFrame &frame, RationalityConfig cfg);

/// 100 * fraction of pairs where score(sent_more) > score(sent_less). Ties
/// count as not stereotypical.
double pairwise_bias_score(std::span<const PairExample> pairs, const SequenceScorer &scorer);

} // namespace rsactl
