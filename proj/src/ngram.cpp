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

#include "rsactl/ngram.hpp"

#include "rsactl/error.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace rsactl {

namespace {

constexpr std::array<char, 6> kMagic = {'R', 'S', 'A', 'N', 'G', '1'};

void validate(const NGramOptions &opts) {
    if (opts.order < 1) {
        throw Error(ErrorCode::InvalidArgument, "n-gram order must be >= 1");
    }
    if (!(opts.lambda > 0.0 && opts.lambda < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "lambda must be in (0, 1)");
    }
    if (!(opts.delta > 0.0) || !std::isfinite(opts.delta)) {
        throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
    }
}

// Little-endian fixed-width IO. The container layout is described in
// docs/model-format.md.
template <typename T> void put(std::ostream &out, T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
    }
}

void put_f64(std::ostream &out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put(out, bits);
}

template <typename T> T get(std::istream &in) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            throw Error(ErrorCode::Format, "truncated model file");
        }
        value |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return static_cast<T>(value);
}

double get_f64(std::istream &in) {
    auto bits = get<std::uint64_t>(in);
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

} // namespace

NGramModel::NGramModel(NGramOptions opts, Vocabulary vocab, CountTable counts)
    : m_opts(opts), m_vocab(std::move(vocab)), m_counts(std::move(counts)) {
    validate(m_opts);
}

NGramModel NGramModel::train(std::span<const std::string> documents, const NGramOptions &opts) {
    validate(opts);

    std::vector<std::vector<std::string>> tokenized;
    std::set<std::string> distinct;
    for (const auto &doc : documents) {
        auto words = word_tokenize(doc);
        if (words.empty()) {
            continue;
        }
        distinct.insert(words.begin(), words.end());
        tokenized.push_back(std::move(words));
    }
    if (tokenized.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "empty corpus");
    }
    // Reserved spellings are already in the table; a corpus word that
    // collides with one maps onto it.
    for (const char *reserved : {"<s>", "</s>", "<unk>"}) {
        distinct.erase(reserved);
    }
    Vocabulary vocab(std::vector<std::string>(distinct.begin(), distinct.end()));

    CountTable counts;
    counts[{}]; // unigram table always exists
    std::vector<TokenId> seq;
    for (const auto &words : tokenized) {
        seq.assign(1, Vocabulary::kBos);
        for (const auto &w : words) {
            seq.push_back(vocab.id(w));
        }
        seq.push_back(Vocabulary::kEos);
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const std::size_t max_len = std::min(opts.order - 1, i);
            for (std::size_t len = 0; len <= max_len; ++len) {
                std::vector<TokenId> key(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                                         seq.begin() + static_cast<std::ptrdiff_t>(i));
                auto &succ = counts[std::move(key)];
                succ.total += 1;
                succ.counts[seq[i]] += 1;
            }
        }
    }
    return NGramModel(opts, std::move(vocab), std::move(counts));
}

NGramModel NGramModel::train(std::istream &corpus, const NGramOptions &opts) {
    std::vector<std::string> docs;
    std::string line;
    while (std::getline(corpus, line)) {
        docs.push_back(line);
    }
    return train(docs, opts);
}

std::size_t NGramModel::ngram_count(std::size_t length) const {
    if (length == 0) {
        return 0;
    }
    std::size_t n = 0;
    for (const auto &[key, succ] : m_counts) {
        if (key.size() + 1 == length) {
            n += succ.counts.size();
        }
    }
    return n;
}

std::vector<TokenId> NGramModel::history_of(const Context &ctx) const {
    const std::size_t keep = m_opts.order - 1;
    std::vector<TokenId> full;
    full.reserve(1 + ctx.prompt_tokens.size() + ctx.generated_tokens.size());
    full.push_back(Vocabulary::kBos);
    full.insert(full.end(), ctx.prompt_tokens.begin(), ctx.prompt_tokens.end());
    full.insert(full.end(), ctx.generated_tokens.begin(), ctx.generated_tokens.end());
    for (TokenId id : full) {
        if (id >= m_vocab.size()) {
            throw Error(ErrorCode::InvalidArgument, "context token id out of range");
        }
    }
    if (full.size() > keep) {
        full.erase(full.begin(), full.end() - static_cast<std::ptrdiff_t>(keep));
    }
    return full;
}

double NGramModel::prob(std::span<const TokenId> history, TokenId word) const {
    const double v = static_cast<double>(m_vocab.size());
    const double lambda = m_opts.lambda;
    const double delta = m_opts.delta;

    const auto &uni = m_counts.at({});
    auto uni_it = uni.counts.find(word);
    const double c1 = uni_it == uni.counts.end() ? 0.0 : static_cast<double>(uni_it->second);
    double p = (c1 + delta) / (static_cast<double>(uni.total) + delta * v);

    const std::size_t max_len = std::min(m_opts.order - 1, history.size());
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<TokenId> key(history.end() - static_cast<std::ptrdiff_t>(len), history.end());
        double c = 0.0;
        double total = 0.0;
        if (auto it = m_counts.find(key); it != m_counts.end()) {
            total = static_cast<double>(it->second.total);
            if (auto wc = it->second.counts.find(word); wc != it->second.counts.end()) {
                c = static_cast<double>(wc->second);
            }
        }
        p = lambda * (c + delta) / (total + delta * v) + (1.0 - lambda) * p;
    }
    return p;
}

TokenDist NGramModel::next_dist(const Context &ctx) const {
    const auto history = history_of(ctx);
    const std::size_t vsize = m_vocab.size();
    const double v = static_cast<double>(vsize);
    const double lambda = m_opts.lambda;
    const double delta = m_opts.delta;

    std::vector<double> p(vsize);
    const auto &uni = m_counts.at({});
    const double uni_den = static_cast<double>(uni.total) + delta * v;
    for (std::size_t w = 0; w < vsize; ++w) {
        p[w] = delta / uni_den;
    }
    for (const auto &[w, c] : uni.counts) {
        p[w] += static_cast<double>(c) / uni_den;
    }

    for (std::size_t len = 1; len <= history.size(); ++len) {
        std::vector<TokenId> key(history.end() - static_cast<std::ptrdiff_t>(len), history.end());
        auto it = m_counts.find(key);
        const double total = it == m_counts.end() ? 0.0 : static_cast<double>(it->second.total);
        const double den = total + delta * v;
        for (std::size_t w = 0; w < vsize; ++w) {
            p[w] = lambda * delta / den + (1.0 - lambda) * p[w];
        }
        if (it != m_counts.end()) {
            for (const auto &[w, c] : it->second.counts) {
                p[w] += lambda * static_cast<double>(c) / den;
            }
        }
    }

    std::vector<double> logp(vsize);
    for (std::size_t w = 0; w < vsize; ++w) {
        logp[w] = std::log(p[w]);
    }
    return normalize(TokenDist(std::move(logp)));
}

void NGramModel::save(std::ostream &out) const {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m_opts.order));
    put_f64(out, m_opts.lambda);
    put_f64(out, m_opts.delta);

    put<std::uint32_t>(out, static_cast<std::uint32_t>(m_vocab.size()));
    for (const auto &w : m_vocab.words()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
    }

    put<std::uint64_t>(out, m_counts.size());
    for (const auto &[key, succ] : m_counts) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
        for (TokenId id : key) {
            put<std::uint32_t>(out, id);
        }
        put<std::uint64_t>(out, succ.total);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(succ.counts.size()));
        for (const auto &[id, c] : succ.counts) {
            put<std::uint32_t>(out, id);
            put<std::uint64_t>(out, c);
        }
    }
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing model");
    }
}

void NGramModel::save_file(const std::string &path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    }
    save(out);
    out.close();
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing '" + path + "'");
    }
}

NGramModel NGramModel::load(std::istream &in) {
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw Error(ErrorCode::Format, "not an RSANG1 model file");
    }
    NGramOptions opts;
    opts.order = get<std::uint32_t>(in);
    opts.lambda = get_f64(in);
    opts.delta = get_f64(in);

    const auto vsize = get<std::uint32_t>(in);
    if (vsize < Vocabulary::kReserved) {
        throw Error(ErrorCode::Format, "vocabulary block too small");
    }
    std::vector<std::string> words(vsize);
    for (auto &w : words) {
        const auto len = get<std::uint32_t>(in);
        w.resize(len);
        in.read(w.data(), len);
        if (!in) {
            throw Error(ErrorCode::Format, "truncated vocabulary block");
        }
    }
    if (words[0] != "<s>" || words[1] != "</s>" || words[2] != "<unk>") {
        throw Error(ErrorCode::Format, "reserved vocabulary entries missing");
    }
    Vocabulary vocab(std::vector<std::string>(words.begin() + Vocabulary::kReserved, words.end()));

    CountTable counts;
    const auto nctx = get<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < nctx; ++i) {
        std::vector<TokenId> key(get<std::uint32_t>(in));
        if (key.size() >= opts.order) {
            throw Error(ErrorCode::Format, "context longer than order - 1");
        }
        for (auto &id : key) {
            id = get<std::uint32_t>(in);
            if (id >= vsize) {
                throw Error(ErrorCode::Format, "context id out of range");
            }
        }
        Successors succ;
        succ.total = get<std::uint64_t>(in);
        const auto nsucc = get<std::uint32_t>(in);
        std::uint64_t sum = 0;
        for (std::uint32_t j = 0; j < nsucc; ++j) {
            const auto id = get<std::uint32_t>(in);
            const auto c = get<std::uint64_t>(in);
            if (id >= vsize || c == 0) {
                throw Error(ErrorCode::Format, "bad successor entry");
            }
            succ.counts[id] = c;
            sum += c;
        }
        if (sum != succ.total) {
            throw Error(ErrorCode::Format, "successor counts do not sum to total");
        }
        counts.emplace(std::move(key), std::move(succ));
    }
    if (!counts.contains({})) {
        throw Error(ErrorCode::Format, "missing unigram table");
    }
    return NGramModel(opts, std::move(vocab), std::move(counts));
}

NGramModel NGramModel::load_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open model '" + path + "'");
    }
    return load(in);
}

void NGramModel::export_text(std::ostream &out) const {
    out << "order\t" << m_opts.order << "\n";
    out << "lambda\t" << m_opts.lambda << "\n";
    out << "delta\t" << m_opts.delta << "\n";
    out << "vocab\t" << m_vocab.size() << "\n";
    for (std::size_t i = 0; i < m_vocab.size(); ++i) {
        out << i << "\t" << m_vocab.word(static_cast<TokenId>(i)) << "\n";
    }
    out << "counts\n";
    for (const auto &[key, succ] : m_counts) {
        std::string ctx;
        for (TokenId id : key) {
            ctx += (ctx.empty() ? "" : " ") + m_vocab.word(id);
        }
        for (const auto &[id, c] : succ.counts) {
            out << ctx << "\t" << m_vocab.word(id) << "\t" << c << "\n";
        }
    }
}

} // namespace rsactl
