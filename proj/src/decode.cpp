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

#include "rsactl/decode.hpp"

#include "rsactl/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <string>

namespace rsactl {

using nlohmann::json;

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::Greedy: return "greedy";
    case Strategy::Beam: return "beam";
    case Strategy::Nucleus: return "nucleus";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "greedy") {
        return Strategy::Greedy;
    }
    if (name == "beam") {
        return Strategy::Beam;
    }
    if (name == "nucleus") {
        return Strategy::Nucleus;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown decoding strategy '" + std::string(name) + "'");
}

void DecodeConfig::validate() const {
    if (beam_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "beam_size must be >= 1");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
    }
    if (max_new_tokens < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_new_tokens must be >= 1");
    }
}

std::vector<TokenId> Hypothesis::output_tokens(std::span<const TokenId> stop) const {
    std::vector<TokenId> out = tokens;
    if (finished && !out.empty() && std::find(stop.begin(), stop.end(), out.back()) != stop.end()) {
        out.pop_back();
    }
    return out;
}

std::vector<TokenId> stop_set(const LanguageModel &lm, const DecodeConfig &cfg) {
    return cfg.stop_tokens ? *cfg.stop_tokens : std::vector<TokenId>{lm.eos()};
}

namespace {

struct StepResult {
    TokenDist dist;
    double alpha = 0.0;
    double r_c = 1.0;
    double r_a = 1.0;
    std::vector<TokenDist> s0;
    std::vector<TokenDist> s1; // depth 2 only
};

class Speaker {
public:
    virtual ~Speaker() = default;
    virtual StepResult step(const Hypothesis &h) const = 0;
    virtual void advance(Hypothesis &h, const StepResult &r, TokenId token) const = 0;
};

class RawSpeaker final : public Speaker {
public:
    RawSpeaker(const LanguageModel &lm, std::span<const TokenId> prompt)
        : m_lm(lm), m_prompt(prompt.begin(), prompt.end()) {}

    StepResult step(const Hypothesis &h) const override {
        StepResult r;
        r.dist = m_lm.next_dist(Context{m_prompt, h.tokens});
        return r;
    }
    void advance(Hypothesis &, const StepResult &, TokenId) const override {}

private:
    const LanguageModel &m_lm;
    std::vector<TokenId> m_prompt;
};

class PragmaticSpeaker final : public Speaker {
public:
    PragmaticSpeaker(const LanguageModel &lm, const AttributeFrame &frame, std::span<const TokenId> prompt,
                     const RationalityConfig &cfg)
        : m_lm(lm), m_frame(frame), m_prompt(prompt.begin(), prompt.end()), m_cfg(cfg) {
        m_cfg.validate();
    }

    StepResult step(const Hypothesis &h) const override {
        const Context ctx{m_prompt, h.tokens};
        StepResult r;
        if (m_cfg.recursion_depth == 2) {
            auto out = deepen(m_lm, m_frame, ctx, RecursiveBelief{h.belief, *h.belief2}, m_cfg);
            r.dist = std::move(out.s2_dist);
            r.alpha = out.alpha_used;
            r.s0 = std::move(out.s0_dists);
            r.s1 = std::move(out.s1_dists);
        } else {
            auto out = rsa_step(m_lm, m_frame, ctx, h.belief, m_cfg);
            r.dist = std::move(out.s1_dist);
            r.alpha = out.alpha_used;
            r.r_c = out.r_c;
            r.r_a = out.r_a;
            r.s0 = std::move(out.s0_dists);
        }
        return r;
    }

    void advance(Hypothesis &h, const StepResult &r, TokenId token) const override {
        h.belief = l1_step(h.belief, r.s0, token);
        if (h.belief2) {
            h.belief2 = l1_step(*h.belief2, r.s1, token);
        }
    }

private:
    const LanguageModel &m_lm;
    const AttributeFrame &m_frame;
    std::vector<TokenId> m_prompt;
    RationalityConfig m_cfg;
};

std::size_t rank_of(const TokenDist &d, TokenId token) {
    const auto logp = d.logp();
    const double lp = logp[token];
    std::size_t rank = 0;
    for (std::size_t v = 0; v < logp.size(); ++v) {
        if (logp[v] > lp || (logp[v] == lp && v < token)) {
            ++rank;
        }
    }
    return rank;
}

bool is_stop(std::span<const TokenId> stop, TokenId t) {
    return std::find(stop.begin(), stop.end(), t) != stop.end();
}

struct Driver {
    const LanguageModel &lm;
    const Speaker &speaker;
    std::vector<TokenId> stop;

    Hypothesis extend(const Hypothesis &h, const StepResult &r, TokenId token, std::size_t candidates) const {
        Hypothesis next = h;
        next.tokens.push_back(token);
        next.cum_logp += r.dist[token];
        speaker.advance(next, r, token);
        next.finished = is_stop(stop, token);

        TraceStep ts;
        ts.token = token;
        ts.token_text = lm.token_text(token);
        ts.alpha_used = r.alpha;
        ts.r_c = r.r_c;
        ts.r_a = r.r_a;
        if (!next.belief.log_posterior.empty()) {
            ts.posterior = next.belief.posteriors();
        }
        ts.token_logp = r.dist[token];
        ts.token_rank = rank_of(r.dist, token);
        ts.candidates = candidates;
        next.trace.steps.push_back(std::move(ts));
        return next;
    }

    Hypothesis single_path(Hypothesis h, const DecodeConfig &cfg, Rng &rng) const {
        for (std::size_t i = 0; i < cfg.max_new_tokens && !h.finished; ++i) {
            const auto r = speaker.step(h);
            if (cfg.strategy == Strategy::Nucleus) {
                const auto nucleus = truncate(r.dist, TopP{cfg.top_p});
                const TokenId token = draw(nucleus, rng);
                h = extend(h, r, token, nucleus.support_size());
            } else {
                h = extend(h, r, r.dist.argmax(), 1);
            }
        }
        return h;
    }

    static double rank_score(double cum_logp, std::size_t length, const DecodeConfig &cfg) {
        if (cfg.length_normalization && length > 0) {
            return cum_logp / static_cast<double>(length);
        }
        return cum_logp;
    }
    static double rank_score(const Hypothesis &h, const DecodeConfig &cfg) {
        return rank_score(h.cum_logp, h.tokens.size(), cfg);
    }

    std::vector<Hypothesis> beam(Hypothesis init, const DecodeConfig &cfg) const {
        std::vector<Hypothesis> beam{std::move(init)};
        for (std::size_t i = 0; i < cfg.max_new_tokens; ++i) {
            if (std::all_of(beam.begin(), beam.end(), [](const Hypothesis &h) { return h.finished; })) {
                break;
            }
            struct Candidate {
                double score;
                std::size_t parent;
                TokenId token;
                bool frozen;
            };
            std::vector<Candidate> candidates;
            std::vector<std::optional<StepResult>> steps(beam.size());
            // Finished hypotheses compete unchanged, ahead of extensions on ties.
            for (std::size_t b = 0; b < beam.size(); ++b) {
                if (beam[b].finished) {
                    candidates.push_back({rank_score(beam[b], cfg), b, 0, true});
                }
            }
            for (std::size_t b = 0; b < beam.size(); ++b) {
                if (beam[b].finished) {
                    continue;
                }
                steps[b] = speaker.step(beam[b]);
                const auto logp = steps[b]->dist.logp();
                for (std::size_t v = 0; v < logp.size(); ++v) {
                    if (is_excluded(logp[v])) {
                        continue;
                    }
                    const double score = rank_score(beam[b].cum_logp + logp[v], beam[b].tokens.size() + 1, cfg);
                    candidates.push_back({score, b, static_cast<TokenId>(v), false});
                }
            }
            std::stable_sort(candidates.begin(), candidates.end(),
                             [](const Candidate &a, const Candidate &b) { return a.score > b.score; });
            const std::size_t considered = candidates.size();
            if (candidates.size() > cfg.beam_size) {
                candidates.resize(cfg.beam_size);
            }
            std::vector<Hypothesis> next;
            next.reserve(candidates.size());
            for (const auto &c : candidates) {
                if (c.frozen) {
                    next.push_back(beam[c.parent]);
                } else {
                    next.push_back(extend(beam[c.parent], *steps[c.parent], c.token, considered));
                }
            }
            beam = std::move(next);
        }
        std::stable_sort(beam.begin(), beam.end(), [&](const Hypothesis &a, const Hypothesis &b) {
            return rank_score(a, cfg) > rank_score(b, cfg);
        });
        return beam;
    }

    DecodeResult run(Hypothesis init, const DecodeConfig &cfg) const {
        cfg.validate();
        DecodeResult result;
        if (cfg.strategy == Strategy::Beam) {
            result.sequences = beam(std::move(init), cfg);
        } else {
            Rng rng(cfg.seed);
            result.sequences.push_back(single_path(std::move(init), cfg, rng));
        }
        const auto &best = result.sequences.front();
        if (!best.tokens.empty() && best.output_tokens(stop).empty()) {
            result.status = DecodeStatus::ZeroLengthOutput;
        }
        return result;
    }
};

Hypothesis initial(const AttributeFrame *frame, const RationalityConfig *cfg, std::string strategy) {
    Hypothesis h;
    h.trace.strategy = std::move(strategy);
    if (frame) {
        h.belief = BeliefState::uniform(frame->size());
        if (cfg && cfg->recursion_depth == 2) {
            h.belief2 = BeliefState::uniform(frame->size());
        }
        h.trace.attributes = frame->names();
    }
    return h;
}

std::string strategy_label(const DecodeConfig &cfg) {
    switch (cfg.strategy) {
    case Strategy::Greedy: return "greedy";
    case Strategy::Beam: return "beam(" + std::to_string(cfg.beam_size) + ")";
    case Strategy::Nucleus: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "nucleus(%g)", cfg.top_p);
        return buf;
    }
    }
    return "unknown";
}

} // namespace

DecodeResult decode(const LanguageModel &lm, const AttributeFrame &frame, std::span<const TokenId> content_prompt,
                    const RationalityConfig &rationality, const DecodeConfig &cfg) {
    PragmaticSpeaker speaker(lm, frame, content_prompt, rationality);
    Driver driver{lm, speaker, stop_set(lm, cfg)};
    return driver.run(initial(&frame, &rationality, strategy_label(cfg)), cfg);
}

DecodeResult decode_raw(const LanguageModel &lm, std::span<const TokenId> content_prompt, const DecodeConfig &cfg) {
    RawSpeaker speaker(lm, content_prompt);
    Driver driver{lm, speaker, stop_set(lm, cfg)};
    return driver.run(initial(nullptr, nullptr, strategy_label(cfg)), cfg);
}

RerankResult rerank_samples(const LanguageModel &lm, const AttributeFrame &frame,
                            std::span<const TokenId> content_prompt, std::size_t n, const DecodeConfig &cfg) {
    cfg.validate();
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "rerank needs n >= 1");
    }
    if (cfg.strategy != Strategy::Nucleus) {
        throw Error(ErrorCode::InvalidArgument, "rerank draws samples; use the nucleus strategy");
    }
    RawSpeaker speaker(lm, content_prompt);
    Driver driver{lm, speaker, stop_set(lm, cfg)};
    Rng rng(cfg.seed);

    RerankResult out;
    for (std::size_t i = 0; i < n; ++i) {
        auto h = driver.single_path(initial(nullptr, nullptr, strategy_label(cfg)), cfg, rng);
        const auto belief = listen(lm, frame, h.tokens);
        out.target_posteriors.push_back(belief.posterior(frame.target()));
        out.samples.push_back(std::move(h.tokens));
        if (out.target_posteriors.back() > out.target_posteriors[out.best]) {
            out.best = i;
        }
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string tsv_safe(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return s;
}

} // namespace

std::string export_trace(const DecodeTrace &trace, TraceFormat format) {
    if (format == TraceFormat::Tsv) {
        std::string out = "step\ttoken_text\ttoken_id\talpha_used\tr_c\tr_a";
        for (const auto &name : trace.attributes) {
            out += "\t" + tsv_safe(name);
        }
        out += "\n";
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            const auto &s = trace.steps[i];
            out += std::to_string(i + 1) + "\t" + tsv_safe(s.token_text) + "\t" + std::to_string(s.token) + "\t" +
                   fmt(s.alpha_used) + "\t" + fmt(s.r_c) + "\t" + fmt(s.r_a);
            for (double p : s.posterior) {
                out += "\t" + fmt(p);
            }
            out += "\n";
        }
        return out;
    }

    json steps = json::array();
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto &s = trace.steps[i];
        steps.push_back({{"step", i + 1},
                         {"token_id", s.token},
                         {"token_text", s.token_text},
                         {"alpha_used", s.alpha_used},
                         {"r_c", s.r_c},
                         {"r_a", s.r_a},
                         {"posterior", s.posterior},
                         {"token_logp", s.token_logp},
                         {"token_rank", s.token_rank},
                         {"candidates", s.candidates}});
    }
    json j{{"schema_version", 1}, {"strategy", trace.strategy}, {"attributes", trace.attributes}, {"steps", steps}};
    return j.dump(2) + "\n";
}

DecodeTrace parse_trace_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        DecodeTrace trace;
        trace.strategy = j.at("strategy").get<std::string>();
        trace.attributes = j.at("attributes").get<std::vector<std::string>>();
        for (const auto &s : j.at("steps")) {
            TraceStep ts;
            ts.token = s.at("token_id").get<TokenId>();
            ts.token_text = s.at("token_text").get<std::string>();
            ts.alpha_used = s.at("alpha_used").get<double>();
            ts.r_c = s.at("r_c").get<double>();
            ts.r_a = s.at("r_a").get<double>();
            ts.posterior = s.at("posterior").get<std::vector<double>>();
            ts.token_logp = s.at("token_logp").get<double>();
            ts.token_rank = s.at("token_rank").get<std::size_t>();
            ts.candidates = s.at("candidates").get<std::size_t>();
            trace.steps.push_back(std::move(ts));
        }
        return trace;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::Format, std::string("bad trace JSON: ") + e.what());
    }
}

} // namespace rsactl
