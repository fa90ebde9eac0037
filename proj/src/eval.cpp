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

#include "rsactl/eval.hpp"

#include "rsactl/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace rsactl {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_ascii_punct(char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
}

bool is_terminal(char c) {
    return c == '.' || c == '?' || c == '!';
}

bool is_vowel(char c) {
    switch (c) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
    case 'y':
        return true;
    default:
        return false;
    }
}

} // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char &c : out) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80) {
            c = static_cast<char>(std::tolower(u));
        }
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_terminal(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && is_terminal(text[end])) {
            ++end;
        }
        if (end == text.size() || is_space(text[end])) {
            std::string_view piece = text.substr(start, end - start);
            if (!split_words(piece).empty()) {
                out.emplace_back(piece);
            }
            start = end;
        }
        i = end;
    }
    if (start < text.size()) {
        std::string_view piece = text.substr(start);
        if (!split_words(piece).empty()) {
            out.emplace_back(piece);
        }
    }
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) {
            ++j;
        }
        std::size_t b = i;
        std::size_t e = j;
        while (b < e && is_ascii_punct(text[b])) {
            ++b;
        }
        while (e > b && is_ascii_punct(text[e - 1])) {
            --e;
        }
        if (e > b) {
            out.emplace_back(text.substr(b, e - b));
        }
        i = j;
    }
    return out;
}

int count_syllables(std::string_view word) {
    const std::string w = to_lower(word);
    int groups = 0;
    bool in_group = false;
    for (char c : w) {
        if (is_vowel(c)) {
            if (!in_group) {
                ++groups;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    if (!w.empty() && w.back() == 'e' && groups > 1) {
        --groups;
    }
    return std::max(groups, 1);
}

WordSet load_word_set(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read word list '" + path + "'");
    }
    WordSet out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && is_space(line.back())) {
            line.pop_back();
        }
        if (!line.empty()) {
            out.insert(to_lower(line));
        }
    }
    return out;
}

ReadabilityReport readability(std::string_view text, const WordSet &familiar_words) {
    const auto words = split_words(text);
    if (words.empty()) {
        throw Error(ErrorCode::EmptyText, "readability of an empty text");
    }
    ReadabilityReport r;
    r.word_count = words.size();
    r.sentence_count = split_sentences(text).size();
    for (const auto &w : words) {
        const int syl = count_syllables(w);
        r.syllable_count += static_cast<std::size_t>(syl);
        if (syl >= 3) {
            ++r.complex_word_count;
        }
        if (!familiar_words.contains(to_lower(w))) {
            ++r.difficult_word_count;
        }
        r.letter_count += static_cast<std::size_t>(
            std::count_if(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }));
    }

    const double words_n = static_cast<double>(r.word_count);
    const double sentences = static_cast<double>(r.sentence_count);
    const double words_per_sentence = words_n / sentences;

    r.fre = 206.835 - 1.015 * words_per_sentence - 84.6 * (static_cast<double>(r.syllable_count) / words_n);
    r.gfi = 0.4 * (words_per_sentence + 100.0 * (static_cast<double>(r.complex_word_count) / words_n));

    const double letters_per_100 = static_cast<double>(r.letter_count) / words_n * 100.0;
    const double sentences_per_100 = sentences / words_n * 100.0;
    r.cli_index = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;

    const double pct_difficult = 100.0 * static_cast<double>(r.difficult_word_count) / words_n;
    r.dcr = 0.1579 * pct_difficult + 0.0496 * words_per_sentence;
    if (pct_difficult > 5.0) {
        r.dcr += 3.6365;
    }
    return r;
}

namespace {

std::vector<std::string> lower_words(std::string_view text) {
    auto words = split_words(text);
    for (auto &w : words) {
        w = to_lower(w);
    }
    return words;
}

std::size_t lcs_length(const std::vector<std::string> &a, const std::vector<std::string> &b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
    const auto cand = lower_words(candidate);
    const auto ref = lower_words(reference);
    if (cand.empty() || ref.empty()) {
        throw Error(ErrorCode::EmptyText, "rouge_l needs non-empty candidate and reference");
    }
    const double lcs = static_cast<double>(lcs_length(cand, ref));
    RougeScore s;
    s.precision = lcs / static_cast<double>(cand.size());
    s.recall = lcs / static_cast<double>(ref.size());
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

double ngram_novelty(std::string_view summary, std::string_view source, std::size_t n) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "n-gram order must be >= 1");
    }
    const auto sum = lower_words(summary);
    const auto src = lower_words(source);
    if (sum.size() < n) {
        throw Error(ErrorCode::TooShort, "summary has fewer than n words");
    }
    using Gram = std::vector<std::string>;
    std::set<Gram> source_grams;
    for (std::size_t i = 0; i + n <= src.size(); ++i) {
        source_grams.emplace(src.begin() + static_cast<std::ptrdiff_t>(i),
                             src.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    std::size_t total = 0;
    std::size_t novel = 0;
    for (std::size_t i = 0; i + n <= sum.size(); ++i) {
        Gram g(sum.begin() + static_cast<std::ptrdiff_t>(i), sum.begin() + static_cast<std::ptrdiff_t>(i + n));
        ++total;
        if (!source_grams.contains(g)) {
            ++novel;
        }
    }
    return static_cast<double>(novel) / static_cast<double>(total);
}

namespace {

std::vector<std::string> split_tabs(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::string &path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read '" + path + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() != columns) {
            throw Error(ErrorCode::Format, path + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(columns) + " tab-separated columns");
        }
        rows.push_back(std::move(cols));
    }
    if (rows.empty()) {
        throw Error(ErrorCode::Format, path + ": no records");
    }
    return rows;
}

} // namespace

std::vector<LabeledExample> load_labeled_tsv(const std::string &path) {
    std::vector<LabeledExample> out;
    for (auto &row : read_tsv(path, 2)) {
        out.push_back({std::move(row[0]), std::move(row[1])});
    }
    return out;
}

std::vector<PairExample> load_pairs_tsv(const std::string &path) {
    std::vector<PairExample> out;
    for (auto &row : read_tsv(path, 3)) {
        if (row[0].empty() || row[1].empty()) {
            throw Error(ErrorCode::Format, path + ": empty sentence in pair");
        }
        out.push_back({std::move(row[0]), std::move(row[1]), std::move(row[2])});
    }
    return out;
}

std::string classify(const LanguageModel &lm, const AttributeFrame &frame, std::string_view text) {
    if (frame.size() != 2) {
        throw Error(ErrorCode::InvalidFrame, "classification needs a two-attribute frame");
    }
    const auto tokens = lm.tokenize(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyText, "cannot classify an empty text");
    }
    const std::size_t target = frame.target();
    const std::size_t other = 1 - target;
    const auto &attrs = frame.attributes();
    const double target_score = score_sequence(lm, Context{attrs[target].prompt, {}}, tokens);
    const double other_score = score_sequence(lm, Context{attrs[other].prompt, {}}, tokens);
    return target_score >= other_score ? attrs[target].name : attrs[other].name;
}

double accuracy(const LanguageModel &lm, const AttributeFrame &frame, std::span<const LabeledExample> dataset) {
    if (dataset.empty()) {
        throw Error(ErrorCode::InvalidArgument, "accuracy over an empty dataset");
    }
    const auto names = frame.names();
    std::size_t correct = 0;
    for (const auto &ex : dataset) {
        if (std::find(names.begin(), names.end(), ex.label) == names.end()) {
            throw Error(ErrorCode::InvalidArgument, "label '" + ex.label + "' is not a frame attribute");
        }
        if (classify(lm, frame, ex.text) == ex.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

SequenceScorer raw_scorer(const LanguageModel &lm) {
    return [&lm](std::string_view text) { return score_sequence(lm, Context{}, lm.tokenize(text)); };
}

SequenceScorer pragmatic_scorer(const LanguageModel &lm, const AttributeFrame &frame, RationalityConfig cfg) {
    cfg.validate();
    if (cfg.recursion_depth != 1) {
        throw Error(ErrorCode::UnsupportedDepth, "pragmatic scoring runs at recursion depth 1");
    }
    return [&lm, frame, cfg](std::string_view text) {
        const auto tokens = lm.tokenize(text);
        if (tokens.empty()) {
            throw Error(ErrorCode::EmptyText, "cannot score an empty sentence");
        }
        Context ctx;
        auto belief = BeliefState::uniform(frame.size());
        double total = 0.0;
        for (TokenId t : tokens) {
            const auto step = rsa_step(lm, frame, ctx, belief, cfg);
            const double lp = step.s1_dist[t];
            if (is_excluded(lp)) {
                return kNegInf;
            }
            total += lp;
            belief = l1_step(belief, step.s0_dists, t);
            ctx.generated_tokens.push_back(t);
        }
        return total;
    };
}

double pairwise_bias_score(std::span<const PairExample> pairs, const SequenceScorer &scorer) {
    if (pairs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "pairwise score over an empty dataset");
    }
    std::size_t more = 0;
    for (const auto &p : pairs) {
        if (scorer(p.sent_more) > scorer(p.sent_less)) {
            ++more;
        }
    }
    return 100.0 * static_cast<double>(more) / static_cast<double>(pairs.size());
}

} // namespace rsactl
